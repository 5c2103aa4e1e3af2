"""Discretized model geometries with weighted measure and differential operators.

Five kinds are supported, all on structured grids:

* ``torus1d`` / ``torus2d``: flat periodic boxes, unweighted (phi = 0), K = 0.
* ``weighted_interval``: [x0, x1] with measure exp(-phi) dx, phi = a x^2,
  homogeneous Neumann closure, K certified from phi'' - (phi')^2/(m-n).
* ``zonal_sphere``: unit round 2-sphere restricted to axisymmetric fields
  f(theta) with measure 2 pi sin(theta) dtheta, K = 1.
* ``scaled_torus``: 1d torus with metric g(t) = s(t)^2 g_flat, s(t) = exp(c t),
  drift potential chosen so the weighted measure is time invariant.

Stencils are centered and second order.  On the periodic kinds the Laplacian
is the centered first-difference operator applied twice, which makes discrete
integration by parts and operator symmetry exact to rounding; on the bounded
kinds mirror ghost cells give a flux-free closure and integration by parts
holds to O(h^2).

Geometries are immutable after construction and safe to share across threads;
all operators are pure functions of their inputs with deterministic
fixed-order reductions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erf

from .errors import ConfigError, DataError

TORUS_1D = "torus1d"
TORUS_2D = "torus2d"
WEIGHTED_INTERVAL = "weighted_interval"
ZONAL_SPHERE = "zonal_sphere"
SCALED_TORUS = "scaled_torus"

KINDS = (TORUS_1D, TORUS_2D, WEIGHTED_INTERVAL, ZONAL_SPHERE, SCALED_TORUS)

# Half-width of the widest derivative stencil, per kind; used by the
# diagnostics to erode free-boundary supports.
STENCIL_HALFWIDTH = {
    TORUS_1D: 2,
    TORUS_2D: 2,
    SCALED_TORUS: 2,
    WEIGHTED_INTERVAL: 1,
    ZONAL_SPHERE: 1,
}


@dataclass(frozen=True)
class HessianField:
    """Pointwise Hessian data of a scalar field.

    ``hess_sq`` is the squared Hilbert-Schmidt norm of the Hessian, ``delta``
    the metric Laplacian (trace of the Hessian, no drift), ``traceless_sq``
    the squared HS norm of the trace-free part, and ``drift_dot`` the drift
    term grad(phi) . grad(f).  By construction delta equals the trace of the
    discrete Hessian exactly, so the pointwise decomposition identities hold
    to rounding.
    """

    hess_sq: np.ndarray
    delta: np.ndarray
    traceless_sq: np.ndarray
    drift_dot: np.ndarray


@dataclass(frozen=True, eq=False)
class Geometry:
    """A discretized model geometry: nodes, quadrature weights, operators."""

    kind: str
    nodes: np.ndarray
    spacing: tuple
    measure_weights: np.ndarray
    phi: np.ndarray
    dim_n: int
    curvature_K: float
    extent: tuple
    dphi: Optional[np.ndarray] = None
    d2phi: Optional[np.ndarray] = None
    scale_rate: Optional[float] = field(default=None)  # c in s(t) = exp(c t)

    def __post_init__(self):
        # shared across threads: freeze the array payloads too
        for name in ("nodes", "measure_weights", "phi", "dphi", "d2phi"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    # ------------------------------------------------------------------ #
    # constructors
    # ------------------------------------------------------------------ #

    @classmethod
    def torus1d(cls, n_nodes: int, extent: float = 1.0) -> "Geometry":
        h = extent / n_nodes
        x = h * np.arange(n_nodes)
        w = np.full(n_nodes, h)
        return cls(
            kind=TORUS_1D,
            nodes=x,
            spacing=(h,),
            measure_weights=w,
            phi=np.zeros(n_nodes),
            dim_n=1,
            curvature_K=0.0,
            extent=(extent,),
        )

    @classmethod
    def torus2d(cls, n_nodes, extent=(1.0, 1.0)) -> "Geometry":
        if np.isscalar(n_nodes):
            n_nodes = (int(n_nodes), int(n_nodes))
        if np.isscalar(extent):
            extent = (float(extent), float(extent))
        nx, ny = n_nodes
        lx, ly = extent
        hx, hy = lx / nx, ly / ny
        x = hx * np.arange(nx)
        y = hy * np.arange(ny)
        coords = np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)
        w = np.full((nx, ny), hx * hy)
        return cls(
            kind=TORUS_2D,
            nodes=coords,
            spacing=(hx, hy),
            measure_weights=w,
            phi=np.zeros((nx, ny)),
            dim_n=2,
            curvature_K=0.0,
            extent=(lx, ly),
        )

    @classmethod
    def weighted_interval(
        cls, n_nodes: int, x0: float = -0.5, x1: float = 0.5, phi_coeff: float = 0.0, m: Optional[float] = None
    ) -> "Geometry":
        """Interval [x0, x1] with phi(x) = a x^2, a >= 0, Neumann closure.

        Quadrature weights are the exact cell masses of exp(-a x^2) dx, so the
        total weight telescopes to the analytic mu-volume.
        """
        if phi_coeff < 0:
            raise ConfigError("geometry.phi: negative quadratic coefficient gives negative curvature")
        h = (x1 - x0) / n_nodes
        x = x0 + h * (np.arange(n_nodes) + 0.5)
        faces = x0 + h * np.arange(n_nodes + 1)
        a = phi_coeff
        if a == 0.0:
            w = np.full(n_nodes, h)
        else:
            sa = np.sqrt(a)
            cdf = 0.5 * np.sqrt(np.pi / a) * erf(sa * faces)
            w = np.diff(cdf)
        phi = a * x**2
        dphi = 2.0 * a * x
        d2phi = np.full(n_nodes, 2.0 * a)
        if m is None:
            m = 1 if a == 0.0 else 3
        K = cls._interval_curvature(dphi, d2phi, float(m), a)
        return cls(
            kind=WEIGHTED_INTERVAL,
            nodes=x,
            spacing=(h,),
            measure_weights=w,
            phi=phi,
            dim_n=1,
            curvature_K=K,
            extent=(x1 - x0,),
            dphi=dphi,
            d2phi=d2phi,
        )

    @classmethod
    def zonal_sphere(cls, n_nodes: int) -> "Geometry":
        """Unit round S^2, axisymmetric fields on a theta in (0, pi) grid."""
        h = np.pi / n_nodes
        theta = h * (np.arange(n_nodes) + 0.5)
        faces = h * np.arange(n_nodes + 1)
        # exact cell masses of 2 pi sin(theta) dtheta; the sum telescopes to 4 pi
        w = 2.0 * np.pi * (np.cos(faces[:-1]) - np.cos(faces[1:]))
        return cls(
            kind=ZONAL_SPHERE,
            nodes=theta,
            spacing=(h,),
            measure_weights=w,
            phi=np.zeros(n_nodes),
            dim_n=2,
            curvature_K=1.0,
            extent=(np.pi,),
        )

    @classmethod
    def scaled_torus(cls, n_nodes: int, extent: float = 1.0, scale_rate: float = 0.1) -> "Geometry":
        """1d torus with g(t) = exp(2 c t) g_flat and time-invariant measure."""
        h = extent / n_nodes
        x = h * np.arange(n_nodes)
        w = np.full(n_nodes, h)
        return cls(
            kind=SCALED_TORUS,
            nodes=x,
            spacing=(h,),
            measure_weights=w,
            phi=np.zeros(n_nodes),
            dim_n=1,
            curvature_K=0.0,
            extent=(extent,),
            scale_rate=float(scale_rate),
        )

    @staticmethod
    def _interval_curvature(dphi, d2phi, m, a) -> float:
        if a == 0.0:
            return 0.0
        if m <= 1:
            raise ConfigError("geometry: weighted interval needs m > n = 1 when phi is nonzero")
        return float(np.min(d2phi - dphi**2 / (m - 1.0)))

    # ------------------------------------------------------------------ #
    # measure and scaling helpers
    # ------------------------------------------------------------------ #

    @property
    def shape(self):
        return self.measure_weights.shape

    @property
    def n_total(self) -> int:
        return int(self.measure_weights.size)

    def mu_volume(self) -> float:
        return float(self.measure_weights.sum())

    def scale_factor(self, t: float) -> float:
        if self.kind != SCALED_TORUS:
            return 1.0
        return float(np.exp(self.scale_rate * t))

    def scale_rate_K2(self, t: float = 0.0) -> float:
        """Certified K2 with d/dt g = 2 K2 g; zero on static geometries."""
        return self.scale_rate if self.kind == SCALED_TORUS else 0.0

    def _check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise DataError(f"field shape {f.shape} does not match geometry {self.shape}")
        return f

    # ------------------------------------------------------------------ #
    # quadrature
    # ------------------------------------------------------------------ #

    def integrate(self, f: np.ndarray) -> float:
        """Weighted sum  sum_i f_i w_i  approximating  int f dmu.

        Deterministic fixed-order summation; second order in h for smooth f.
        """
        f = self._check(f)
        if not np.all(np.isfinite(f)):
            raise DataError("integrate: non-finite value in field")
        return float((f * self.measure_weights).sum())

    # ------------------------------------------------------------------ #
    # first derivatives
    # ------------------------------------------------------------------ #

    def _d_periodic(self, f: np.ndarray, axis: int = 0) -> np.ndarray:
        h = self.spacing[axis]
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)

    def _d_mirror(self, f: np.ndarray) -> np.ndarray:
        h = self.spacing[0]
        g = np.empty_like(f)
        g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        g[0] = (f[1] - f[0]) / (2.0 * h)
        g[-1] = (f[-1] - f[-2]) / (2.0 * h)
        return g

    def _dd_mirror(self, f: np.ndarray) -> np.ndarray:
        h = self.spacing[0]
        g = np.empty_like(f)
        g[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
        g[0] = (f[1] - f[0]) / (h * h)
        g[-1] = (f[-2] - f[-1]) / (h * h)
        return g

    # ------------------------------------------------------------------ #
    # operators
    # ------------------------------------------------------------------ #

    def grad_norm_sq(self, f: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Pointwise |grad f|^2 in the geometry's metric, centered differences."""
        f = self._check(f)
        if self.kind in (TORUS_1D,):
            return self._d_periodic(f) ** 2
        if self.kind == SCALED_TORUS:
            return self.scale_factor(t) ** -2 * self._d_periodic(f) ** 2
        if self.kind == TORUS_2D:
            return self._d_periodic(f, 0) ** 2 + self._d_periodic(f, 1) ** 2
        return self._d_mirror(f) ** 2

    def grad_inner(self, f: np.ndarray, g: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Pointwise <grad f, grad g> in the geometry's metric."""
        f, g = self._check(f), self._check(g)
        if self.kind == TORUS_2D:
            return (
                self._d_periodic(f, 0) * self._d_periodic(g, 0)
                + self._d_periodic(f, 1) * self._d_periodic(g, 1)
            )
        if self.kind in (TORUS_1D, SCALED_TORUS):
            out = self._d_periodic(f) * self._d_periodic(g)
            if self.kind == SCALED_TORUS:
                out = self.scale_factor(t) ** -2 * out
            return out
        return self._d_mirror(f) * self._d_mirror(g)

    def witten_laplacian(self, f: np.ndarray, t: float = 0.0) -> np.ndarray:
        """L f = Delta f - grad(phi) . grad(f), matching hessian_data exactly.

        On the periodic kinds this is the centered first difference applied
        twice, so  sum (Lf) g w = -sum <grad f, grad g> w  holds to rounding.
        """
        hd = self.hessian_data(f, t=t)
        return hd.delta - hd.drift_dot

    def hessian_data(self, f: np.ndarray, t: float = 0.0) -> HessianField:
        f = self._check(f)
        n = self.dim_n
        if self.kind in (TORUS_1D, SCALED_TORUS):
            fxx = self._d_periodic(self._d_periodic(f))
            if self.kind == SCALED_TORUS:
                # Delta_t f = s^-2 f''; the HS norm s^-4 (f'')^2 is its square
                fxx = fxx * self.scale_factor(t) ** -2
            zero = np.zeros_like(f)
            return HessianField(hess_sq=fxx**2, delta=fxx, traceless_sq=zero, drift_dot=zero)
        if self.kind == TORUS_2D:
            fx = self._d_periodic(f, 0)
            fxx = self._d_periodic(fx, 0)
            fxy = self._d_periodic(fx, 1)
            fyy = self._d_periodic(self._d_periodic(f, 1), 1)
            delta = fxx + fyy
            hess_sq = fxx**2 + 2.0 * fxy**2 + fyy**2
            traceless_sq = hess_sq - delta**2 / n
            zero = np.zeros_like(f)
            return HessianField(hess_sq=hess_sq, delta=delta, traceless_sq=traceless_sq, drift_dot=zero)
        if self.kind == ZONAL_SPHERE:
            ft = self._d_mirror(f)
            ftt = self._dd_mirror(f)
            cot = 1.0 / np.tan(self.nodes)
            second = cot * ft  # phi-phi Hessian component over g_{phi phi}
            delta = ftt + second
            hess_sq = ftt**2 + second**2
            traceless_sq = hess_sq - delta**2 / n
            return HessianField(
                hess_sq=hess_sq, delta=delta, traceless_sq=traceless_sq, drift_dot=np.zeros_like(f)
            )
        # weighted interval
        fxx = self._dd_mirror(f)
        drift = self.dphi * self._d_mirror(f)
        zero = np.zeros_like(f)
        return HessianField(hess_sq=fxx**2, delta=fxx, traceless_sq=zero, drift_dot=drift)

    # ------------------------------------------------------------------ #
    # curvature forms
    # ------------------------------------------------------------------ #

    def certify_curvature(self, m: float) -> float:
        """Certified lower bound K of the m-dimensional Bakry-Emery form.

        The bound is the minimum over nodes of the smallest eigenvalue of
        Ric + Hess(phi) - grad(phi) x grad(phi)/(m - n); tori are exactly
        flat, the unit zonal sphere has Ric = g.
        """
        if m < self.dim_n:
            raise ConfigError(f"certify_curvature: m={m} below topological dimension n={self.dim_n}")
        weighted = self.kind == WEIGHTED_INTERVAL and np.any(self.phi != 0.0)
        if m == self.dim_n and weighted:
            raise ConfigError("certify_curvature: m = n requires phi identically zero")
        if self.kind in (TORUS_1D, TORUS_2D, SCALED_TORUS):
            return 0.0
        if self.kind == ZONAL_SPHERE:
            return 1.0
        if not weighted:
            return 0.0
        return float(np.min(self.d2phi - self.dphi**2 / (m - self.dim_n)))

    def ric_form(self, f: np.ndarray, m: Optional[float] = None, t: float = 0.0) -> np.ndarray:
        """Pointwise curvature quadratic form on grad f.

        With ``m is None`` this is Ric(L) = Ric + Hess(phi); otherwise the
        m-dimensional form with the extra -(grad phi . grad f)^2/(m-n) term.
        """
        f = self._check(f)
        if self.kind == ZONAL_SPHERE:
            base = self.grad_norm_sq(f)  # Ric = g on the unit sphere
        elif self.kind == WEIGHTED_INTERVAL:
            base = self.d2phi * self._d_mirror(f) ** 2
        else:
            base = np.zeros(self.shape)
        if m is None or m == self.dim_n:
            return base
        if m < self.dim_n:
            raise ConfigError("ric_form: m < n")
        if self.kind == WEIGHTED_INTERVAL:
            drift = self.dphi * self._d_mirror(f)
            return base - drift**2 / (m - self.dim_n)
        return base

    def dgdt_form(self, f: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Pointwise (d/dt g)(grad f, grad f); nonzero only on the scaled torus."""
        if self.kind != SCALED_TORUS:
            return np.zeros(self.shape)
        return 2.0 * self.scale_rate * self.grad_norm_sq(f, t=t)

    def metric_factor(self, t: float = 0.0) -> float:
        """Multiplier of the flat Laplacian eigenvalues, used by the CFL bound."""
        if self.kind == SCALED_TORUS:
            return self.scale_factor(t) ** -2
        return 1.0
