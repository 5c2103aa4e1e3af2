"""Closed-form references: Barenblatt solutions on R^n and Gaussians.

The self-similar source solution of du/dt = Delta(u^p) is

    M(x, t) = t^(-alpha) (C - beta |x t^(-1/nu)|^2)_+^(1/(p-1)),
    nu = 2 + n (p-1),  alpha = n/nu,  beta = (p-1)/(2 p nu),

with C fixed by unit mass.  For p < 1 the positive part is vacuous
(beta < 0) and the profile has algebraic tails.  Entropy functionals are
evaluated with an adaptive composite Simpson radial quadrature after a
trigonometric substitution that flattens the root singularity at the free
boundary; infinite tails are handled by a binomial tail expansion.

Everything here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import ConfigError, DataError, QuadratureError
from .functionals import FunctionalSample

_SIMPSON_TOL = 1e-12
_TAIL_CUT = 10.0
_TAIL_TERMS = 12


def sphere_surface(n: float) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# --------------------------------------------------------------------- #
# adaptive Simpson
# --------------------------------------------------------------------- #


def _simpson(f, a, fa, m, fm, b, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, m, fm, b, fb, whole, tol, depth, floor):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(f, a, fa, lm, flm, m, fm)
    right = _simpson(f, m, fm, rm, frm, b, fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * max(tol, floor):
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError("adaptive Simpson: maximum depth reached")
    return _adaptive(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, floor) + _adaptive(
        f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, floor
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = _SIMPSON_TOL,
    max_depth: int = 60,
    floor_abs: float = 0.0,
) -> float:
    """Adaptive composite Simpson quadrature of f on [a, b].

    ``tol`` is relative to a coarse 33-point estimate of the integral scale;
    ``floor_abs`` is an absolute error floor below which refinement stops
    (useful when [a, b] is a negligible piece of a larger integral).
    """
    if b <= a:
        return 0.0
    # composite start: 16 Simpson cells, so narrow interior features are seen
    xs = np.linspace(a, b, 33)
    fs = [f(x) for x in xs]
    h = (b - a) / 32.0
    coarse = h / 3.0 * (fs[0] + fs[-1] + 4.0 * sum(fs[1:-1:2]) + 2.0 * sum(fs[2:-2:2]))
    scale = abs(coarse) + 1e-300
    floor = max(1e-15 * scale, floor_abs)  # refinement below this is rounding noise
    total = 0.0
    for k in range(16):
        i = 2 * k
        aa, mm, bb = xs[i], xs[i + 1], xs[i + 2]
        whole = _simpson(f, aa, fs[i], mm, fs[i + 1], bb, fs[i + 2])
        total += _adaptive(
            f, aa, fs[i], mm, fs[i + 1], bb, fs[i + 2], whole, tol * scale / 16.0, max_depth, floor
        )
    return total


# --------------------------------------------------------------------- #
# Barenblatt
# --------------------------------------------------------------------- #


@dataclass(frozen=True)
class BarenblattSpec:
    """Parameters of the self-similar solution on R^n."""

    n: int
    p: float
    C: float

    def __post_init__(self):
        if self.p == 1.0:
            raise ConfigError("barenblatt: p = 1 is the heat kernel, use the gaussian reference")
        if self.p <= 1.0 - 2.0 / self.n:
            raise ConfigError(f"barenblatt: need p > 1 - 2/n = {1.0 - 2.0 / self.n:.6g}")
        if self.C <= 0.0:
            raise ConfigError("barenblatt: need C > 0")

    @property
    def nu(self) -> float:
        return 2.0 + self.n * (self.p - 1.0)

    @property
    def alpha(self) -> float:
        return self.n / self.nu

    @property
    def beta(self) -> float:
        return (self.p - 1.0) / (2.0 * self.p * self.nu)

    def support_radius(self, t: float = 1.0) -> float:
        """Free-boundary radius at time t; infinite in the fast-diffusion range."""
        if self.p < 1.0:
            return math.inf
        return math.sqrt(self.C / self.beta) * t ** (1.0 / self.nu)

    @classmethod
    def unit_mass(cls, n: int, p: float) -> "BarenblattSpec":
        return cls(n=n, p=p, C=barenblatt_constant(n, p))


def barenblatt_profile(x, spec: BarenblattSpec):
    """Self-similar profile (C - beta |x|^2)_+^(1/(p-1)) at t = 1."""
    x = np.asarray(x, dtype=float)
    base = spec.C - spec.beta * x**2
    if spec.p > 1.0:
        return np.where(base > 0.0, base, 0.0) ** (1.0 / (spec.p - 1.0))
    return base ** (1.0 / (spec.p - 1.0))


def barenblatt_solution(x, t: float, spec: BarenblattSpec):
    """M(x, t) = t^(-alpha) profile(x t^(-1/nu)); classical inside its support."""
    if t <= 0.0:
        raise DataError("barenblatt_solution: need t > 0")
    x = np.asarray(x, dtype=float)
    return t ** (-spec.alpha) * barenblatt_profile(x * t ** (-1.0 / spec.nu), spec)


@lru_cache(maxsize=None)
def _normalized_profile_integral(compact: bool, gamma_exp: float, j: float) -> float:
    """C-independent part of the radial profile integrals.

    Compact support: int_0^(pi/2) cos^(2 gamma + 1) sin^j dphi after the
    substitution y = R sin(phi), which flattens the root at the boundary.
    Fat tails: int_0^inf (1 + z^2)^gamma z^j dz split into Simpson on
    [0, _TAIL_CUT] plus a binomial expansion of the remainder.
    """
    if compact:
        expo = 2.0 * gamma_exp + 1.0

        def f(phi):
            return math.cos(phi) ** expo * math.sin(phi) ** j

        if expo <= 100.0:
            return adaptive_simpson(f, 0.0, 0.5 * math.pi, tol=1e-13)
        # near p = 1 the integrand spikes at phi ~ sqrt(j/expo); split there
        width = max(math.sqrt(j / expo) if j > 0 else 0.0, 1.0 / math.sqrt(expo))
        split = min(0.5 * math.pi, 30.0 * width)
        out = adaptive_simpson(f, 0.0, split, tol=1e-13)
        if split < 0.5 * math.pi:
            out += adaptive_simpson(f, split, 0.5 * math.pi, tol=1e-13, floor_abs=1e-15 * abs(out))
        return out
    if 2.0 * abs(gamma_exp) <= j + 1.0:
        raise QuadratureError("fast-diffusion radial integral diverges for these exponents")

    def g(z):
        return (1.0 + z * z) ** gamma_exp * z**j

    # for large |gamma| the mass concentrates near z ~ 1/sqrt(|gamma|); split
    # there so the coarse scale estimate sees the peak
    ag = abs(gamma_exp)
    peak = math.sqrt(j / (2.0 * ag - j)) if j > 0 else 0.0
    width = max(peak, 1.0 / math.sqrt(2.0 * ag))
    z_split = min(_TAIL_CUT, 30.0 * width)
    main = adaptive_simpson(g, 0.0, z_split, tol=1e-13)
    if z_split < _TAIL_CUT:
        main += adaptive_simpson(g, z_split, _TAIL_CUT, tol=1e-13, floor_abs=1e-15 * abs(main))
    # tail: (1 + z^2)^gamma = z^(2 gamma) sum_k binom(gamma, k) z^(-2k)
    tail = 0.0
    coeff = 1.0
    for k in range(_TAIL_TERMS):
        if k > 0:
            coeff *= (gamma_exp - (k - 1)) / k
        power = 2.0 * (gamma_exp - k) + j
        if power >= -1.0:
            raise QuadratureError("fast-diffusion tail term diverges")
        tail += coeff * (-(_TAIL_CUT ** (power + 1.0)) / (power + 1.0))
    return main + tail


def _profile_power_integral(n: float, p: float, C: float, gamma_exp: float, j: float) -> float:
    """int_0^inf (C - beta y^2)_+^gamma y^j dy for the (n, p) profile."""
    nu = 2.0 + n * (p - 1.0)
    beta = (p - 1.0) / (2.0 * p * nu)
    scale_radius = math.sqrt(C / abs(beta))
    val = _normalized_profile_integral(p > 1.0, float(gamma_exp), float(j))
    return (C**gamma_exp) * scale_radius ** (j + 1.0) * val


def barenblatt_mass(n: int, p: float, C: float) -> float:
    """Total mass of the profile with constant C (radial quadrature)."""
    return sphere_surface(n) * _profile_power_integral(n, p, C, 1.0 / (p - 1.0), n - 1.0)


def _log_barenblatt_mass(n: int, p: float, log_c: float) -> float:
    """log of the mass, overflow-safe for exponents near p = 1."""
    gamma_exp = 1.0 / (p - 1.0)
    j = n - 1.0
    nu = 2.0 + n * (p - 1.0)
    beta = (p - 1.0) / (2.0 * p * nu)
    val = _normalized_profile_integral(p > 1.0, float(gamma_exp), float(j))
    return (
        math.log(sphere_surface(n) * val)
        + gamma_exp * log_c
        + 0.5 * (j + 1.0) * (log_c - math.log(abs(beta)))
    )


_CONSTANT_CACHE: Dict[Tuple[int, float], Tuple[float, float]] = {}


def barenblatt_constant(n: int, p: float) -> float:
    """C giving unit mass, by bisection on the radial quadrature; cached."""
    key = (n, float(p))
    if key in _CONSTANT_CACHE:
        return _CONSTANT_CACHE[key][0]
    # the log-mass is monotone in log C; bisect the sign change of log(mass)
    lo, hi = math.log(1e-8), math.log(1e8)
    f_lo = _log_barenblatt_mass(n, p, lo)
    f_hi = _log_barenblatt_mass(n, p, hi)
    if f_lo * f_hi > 0:
        raise QuadratureError("barenblatt_constant: bracket failure")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _log_barenblatt_mass(n, p, mid)
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo < 1e-15:
            break
    C = math.exp(0.5 * (lo + hi))
    residual = abs(barenblatt_mass(n, p, C) - 1.0)
    if residual > 1e-10:
        raise QuadratureError(f"barenblatt_constant: mass residual {residual:.3e}")
    _CONSTANT_CACHE[key] = (C, residual)
    return C


def barenblatt_constant_residual(n: int, p: float) -> float:
    barenblatt_constant(n, p)
    return _CONSTANT_CACHE[(n, float(p))][1]


def barenblatt_functionals(spec: BarenblattSpec, t: float, m: float = None) -> FunctionalSample:
    """Entropy functionals of the Barenblatt solution at time t.

    H_p, N_p, I_p, E, E' come from the radial quadrature; d/dt N_u, dW/dt and
    d^2 N_p/dt^2 vanish identically (the solution is the equality case) and
    are reported as exact zeros.
    """
    if t <= 0.0:
        raise DataError("barenblatt_functionals: need t > 0")
    n, p, C = spec.n, spec.p, spec.C
    if m is None:
        m = float(n)
    omega = sphere_surface(n)
    alpha, nu = spec.alpha, spec.nu
    beta = spec.beta
    norm1 = omega * _profile_power_integral(n, p, C, p / (p - 1.0), n - 1.0)
    fisher1 = (
        omega
        * (2.0 * abs(beta) * p / (p - 1.0)) ** 2
        * _profile_power_integral(n, p, C, 1.0 / (p - 1.0), n + 1.0)
    )
    norm_up_t = t ** (alpha * (1.0 - p)) * norm1
    fisher_num_t = t ** (2.0 * alpha * (1.0 - p) - 2.0 / nu) * fisher1
    I_p = fisher_num_t / norm_up_t
    H_p = math.log(norm_up_t) / (1.0 - p)
    sigma = p - 1.0 + 2.0 / m
    N_p = math.exp(sigma * H_p)
    kappa = 1.0 / sigma
    a = (p - 1.0) * kappa
    int_vu = p / (p - 1.0) * norm_up_t
    N_u = -(t**a) * int_vu
    # int |grad v|^2 u dmu = int |grad u^p|^2 / u dmu pointwise
    E_prime_t = fisher_num_t
    W_p = t ** (a + 1.0) * (p * E_prime_t - (a + 1.0) / t * int_vu)
    return FunctionalSample(
        t=t,
        H_p=H_p,
        N_p=N_p,
        I_p=I_p,
        E=norm_up_t / (p - 1.0),
        Eprime=E_prime_t,
        Edoubleprime=float("nan"),
        N_u=N_u,
        W_p=W_p,
        dW_dt=0.0,
        d2Np_dt2_formula=0.0,
        norm_up=norm_up_t,
    )


def barenblatt_gamma(n: int, p: float, t: float = 1.0) -> float:
    """Scale-invariant product N_p * I_p of the unit-mass solution."""
    spec = BarenblattSpec.unit_mass(n, p)
    fs = barenblatt_functionals(spec, t)
    return fs.N_p * fs.I_p


# --------------------------------------------------------------------- #
# Gaussian reference (p -> 1 limit)
# --------------------------------------------------------------------- #


@dataclass(frozen=True)
class GaussianReference:
    """Heat-kernel Gaussian with closed-form and quadrature functionals."""

    n: int
    variance: float
    density: Callable[[np.ndarray], np.ndarray]
    closed: Dict[str, float]
    quadrature: Dict[str, float]


def gaussian_reference(n: int, variance: float, t_offset: float = 0.0) -> GaussianReference:
    """Centered Gaussian of variance s^2 + 2 t after heat flow for time t."""
    if variance <= 0.0:
        raise ConfigError("gaussian_reference: need variance > 0")
    s2 = variance + 2.0 * t_offset

    def density(x):
        x = np.asarray(x, dtype=float)
        return (2.0 * math.pi * s2) ** (-n / 2.0) * np.exp(-(x**2) / (2.0 * s2))

    H = 0.5 * n * math.log(2.0 * math.pi * math.e * s2)
    closed = {"H": H, "I": n / s2, "N": math.exp(2.0 * H / n)}
    closed["NI"] = closed["N"] * closed["I"]

    omega = sphere_surface(n)
    cut = 14.0 * math.sqrt(s2)

    def h_int(r):
        u = float(density(r))
        return -u * math.log(u) * r ** (n - 1) if u > 0 else 0.0

    def i_int(r):
        u = float(density(r))
        return (r / s2) ** 2 * u * r ** (n - 1)

    Hq = omega * adaptive_simpson(h_int, 0.0, cut, tol=1e-13)
    Iq = omega * adaptive_simpson(i_int, 0.0, cut, tol=1e-13)
    quadrature = {"H": Hq, "I": Iq, "N": math.exp(2.0 * Hq / n)}
    quadrature["NI"] = quadrature["N"] * quadrature["I"]
    return GaussianReference(n=n, variance=s2, density=density, closed=closed, quadrature=quadrature)


# --------------------------------------------------------------------- #
# radial grids for sampled-function checks
# --------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Cell-centered radial grid on [0, r_max] with weight omega r^(n-1) dr.

    The dimension may be non-integer; weights are the exact cell integrals of
    the radial measure, so constants integrate to the exact ball volume.
    """

    n: float
    r: np.ndarray
    weights: np.ndarray
    spacing: float

    @classmethod
    def build(cls, n: float, r_max: float, num: int) -> "RadialGrid":
        h = r_max / num
        r = h * (np.arange(num) + 0.5)
        faces = h * np.arange(num + 1)
        omega = sphere_surface(n)
        w = omega * (faces[1:] ** n - faces[:-1] ** n) / n
        return cls(n=n, r=r, weights=w, spacing=h)

    def integrate(self, f: np.ndarray) -> float:
        f = np.asarray(f, dtype=float)
        if f.shape != self.r.shape:
            raise DataError("radial grid: shape mismatch")
        return float((f * self.weights).sum())

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """d/dr with even reflection at r = 0 and one-sided closure at r_max."""
        f = np.asarray(f, dtype=float)
        g = np.empty_like(f)
        h = self.spacing
        g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        g[0] = (f[1] - f[0]) / (2.0 * h)
        g[-1] = (f[-1] - f[-2]) / h
        return g
