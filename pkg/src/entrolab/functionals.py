"""Scalar functionals of a density along the nonlinear diffusion flow.

Renyi entropy H_p = log(int u^p dmu)/(1-p), entropy power N_p = exp(sigma H_p),
p-Fisher information, the entropy functional chain E, E', E'', the pressure
field v = p/(p-1) u^(p-1) and its F_alpha combinations, the t-weighted
entropy N_u = -t^a int v u dmu with its Perelman-type W-entropy, the closed
form of dW/dt, and the explicit formula for the second time derivative of the
entropy power.  Shannon variants cover the p -> 1 limit; Renyi formulas are
never evaluated at p = 1.

All functions are pure; dgamma-weighted means recompute the normalization
int u^p dmu on every call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import DataError
from .flow import FlowParams, ScalarField, Trajectory
from .geometry import Geometry

CSV_COLUMNS = (
    "t",
    "H_p",
    "N_p",
    "I_p",
    "E",
    "Eprime",
    "Edoubleprime",
    "N_u",
    "W_p",
    "dW_dt",
    "d2Np_dt2_formula",
    "norm_up",
)


@dataclass(frozen=True)
class FunctionalSample:
    """One row of sampled functional values; the CSV schema of the CLI."""

    t: float
    H_p: float
    N_p: float
    I_p: float
    E: float
    Eprime: float
    Edoubleprime: float
    N_u: float
    W_p: float
    dW_dt: float
    d2Np_dt2_formula: float
    norm_up: float

    def row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def _require_renyi(params: FlowParams):
    if params.p == 1.0:
        raise DataError("p = 1: use the Shannon operations instead")


def support_mask(values: np.ndarray, params: FlowParams) -> np.ndarray:
    """Nodes where 1/u-type integrands are evaluated; the rest contribute 0."""
    return values > params.floor_for(values)


def norm_up(u: ScalarField, params: FlowParams) -> float:
    return u.geometry.integrate(np.maximum(u.values, 0.0) ** params.p)


def pressure(u: ScalarField, params: FlowParams) -> ScalarField:
    """v = p/(p-1) u^(p-1), the derivative of e(r) = r^p/(p-1)."""
    _require_renyi(params)
    p = params.p
    vals = p / (p - 1.0) * np.maximum(u.values, 0.0) ** (p - 1.0)
    if p < 1.0:
        # u^(p-1) blows up at u = 0; mask it to 0 outside the support
        vals = np.where(u.values > 0, vals, 0.0)
    return u.with_values(vals, u.t)


def renyi_entropy(u: ScalarField, params: FlowParams) -> float:
    """H_p = log(int u^p dmu) / (1 - p)."""
    _require_renyi(params)
    s = norm_up(u, params)
    if s <= 0.0:
        raise DataError("renyi_entropy: int u^p dmu is zero")
    return float(np.log(s) / (1.0 - params.p))


def entropy_power(u: ScalarField, params: FlowParams) -> float:
    """N_p = exp(sigma H_p), sigma = p - 1 + 2/m."""
    return float(np.exp(params.sigma * renyi_entropy(u, params)))


def fisher_information(u: ScalarField, params: FlowParams) -> float:
    """I_p = (int u^p dmu)^-1 int_{u>eps} |grad u^p|^2 / u dmu  >= 0."""
    _require_renyi(params)
    geo = u.geometry
    up = np.maximum(u.values, 0.0) ** params.p
    gsq = geo.grad_norm_sq(up, t=u.t)
    mask = support_mask(u.values, params)
    integrand = np.where(mask, gsq / np.where(mask, u.values, 1.0), 0.0)
    s = norm_up(u, params)
    if s <= 0.0:
        raise DataError("fisher_information: int u^p dmu is zero")
    return float(geo.integrate(integrand) / s)


def E_value(u: ScalarField, params: FlowParams) -> float:
    """E = int u^p/(p-1) dmu."""
    _require_renyi(params)
    return norm_up(u, params) / (params.p - 1.0)


def E_prime(u: ScalarField, params: FlowParams) -> float:
    """E' = int |grad v|^2 u dmu, the dissipation rate of E."""
    v = pressure(u, params)
    geo = u.geometry
    return float(geo.integrate(geo.grad_norm_sq(v.values, t=u.t) * u.values))


def E_doubleprime(u: ScalarField, params: FlowParams, geo: Optional[Geometry] = None) -> float:
    """Second dissipation rate of E.

    E'' = 2 int (|Hess v|^2 + Ric(L)(grad v, grad v)) u^p dmu
        + 2 (p-1) int (L v)^2 u^p dmu + int (dg/dt)(grad v, grad v) u dmu,

    with the infinite-dimensional form Ric(L) = Ric + Hess(phi); the dg/dt
    term is active only on the scaled torus.
    """
    geo = geo or u.geometry
    v = pressure(u, params).values
    t = u.t
    hd = geo.hessian_data(v, t=t)
    lv = hd.delta - hd.drift_dot
    up = np.maximum(u.values, 0.0) ** params.p
    ric = geo.ric_form(v, m=None, t=t)
    out = 2.0 * geo.integrate((hd.hess_sq + ric) * up)
    out += 2.0 * (params.p - 1.0) * geo.integrate(lv**2 * up)
    out += geo.integrate(geo.dgdt_form(v, t=t) * u.values)
    return float(out)


def F_alpha(u: ScalarField, params: FlowParams, alpha: float = 1.0) -> ScalarField:
    """F_alpha = alpha (p-1) L v + (alpha-1) |grad v|^2 / v; F_1 = (p-1) L v."""
    if alpha < 1.0:
        raise DataError("F_alpha: need alpha >= 1")
    geo = u.geometry
    v = pressure(u, params).values
    out = alpha * (params.p - 1.0) * geo.witten_laplacian(v, t=u.t)
    if alpha > 1.0:
        mask = support_mask(u.values, params) & (np.abs(v) > 0)
        out = out + (alpha - 1.0) * np.where(mask, geo.grad_norm_sq(v, t=u.t) / np.where(mask, v, 1.0), 0.0)
    return u.with_values(out, u.t)


def ni_entropy(u: ScalarField, params: FlowParams, t: Optional[float] = None) -> float:
    """N_u(t) = -t^a int v u dmu, a = (p-1) kappa."""
    _require_renyi(params)
    t = u.t if t is None else t
    if t <= 0.0:
        raise DataError("ni_entropy: need t > 0")
    v = pressure(u, params).values
    return float(-(t**params.a) * u.geometry.integrate(v * u.values))


def ni_entropy_rate(u: ScalarField, params: FlowParams, t: Optional[float] = None) -> float:
    """dN_u/dt = -t^a int (F_1 + a/t) v u dmu (evaluated by quadrature)."""
    t = u.t if t is None else t
    if t <= 0.0:
        raise DataError("ni_entropy_rate: need t > 0")
    geo = u.geometry
    v = pressure(u, params).values
    f1 = (params.p - 1.0) * geo.witten_laplacian(v, t=t)
    integrand = (f1 + params.a / t) * v * u.values
    return float(-(t**params.a) * geo.integrate(integrand))


def w_entropy(u: ScalarField, params: FlowParams, t: Optional[float] = None) -> float:
    """W_p = t^(a+1) int (p |grad v|^2/v - (a+1)/t) v u dmu.

    Evaluated with the v in the weight cancelled against the 1/v, so no
    division by the pressure is performed:
    W_p = t^(a+1) [ p int |grad v|^2 u dmu - (a+1)/t int v u dmu ].
    """
    _require_renyi(params)
    t = u.t if t is None else t
    if t <= 0.0:
        raise DataError("w_entropy: need t > 0")
    geo = u.geometry
    v = pressure(u, params).values
    grad_term = params.p * geo.integrate(geo.grad_norm_sq(v, t=t) * u.values)
    mass_term = (params.a + 1.0) / t * geo.integrate(v * u.values)
    return float(t ** (params.a + 1.0) * (grad_term - mass_term))


def w_entropy_rate(
    u: ScalarField,
    params: FlowParams,
    geo: Optional[Geometry] = None,
    t: Optional[float] = None,
    interior_mask: Optional[np.ndarray] = None,
) -> float:
    """Closed-form dW_p/dt; nonpositive under CD(0,m) for p >= 1 - 1/m.

    dW/dt = -2p t^(a+1) int [ |Hess v + g/((b+2)t)|^2
              + (grad phi . grad v - (m-n)/((b+2)t))^2/(m-n)      (m > n only)
              + Ric_{m,n}(L)(grad v, grad v)
              + (p-1) (L v + kappa/t)^2 ] u^p dmu.

    ``interior_mask`` restricts the integrals to a support interior; the
    Hessian integrands of free-boundary data are meaningful only there.
    """
    _require_renyi(params)
    geo = geo or u.geometry
    t = u.t if t is None else t
    if t <= 0.0:
        raise DataError("w_entropy_rate: need t > 0")
    m, n = params.m, geo.dim_n
    weighted = bool(np.any(geo.phi != 0.0))
    if m == n and weighted:
        raise DataError("w_entropy_rate: m = n requires phi identically zero")
    v = pressure(u, params).values
    hd = geo.hessian_data(v, t=t)
    lv = hd.delta - hd.drift_dot
    c = 1.0 / ((params.b + 2.0) * t)
    # |Hess v + c g|^2 = |Hess v|^2 + 2 c Delta v + n c^2
    sq = hd.hess_sq + 2.0 * c * hd.delta + n * c * c
    if m > n:
        sq = sq + (hd.drift_dot - (m - n) * c) ** 2 / (m - n)
    sq = sq + geo.ric_form(v, m=m, t=t)
    sq = sq + (params.p - 1.0) * (lv + params.kappa / t) ** 2
    up = np.maximum(u.values, 0.0) ** params.p
    if interior_mask is not None:
        up = np.where(interior_mask, up, 0.0)
    return float(-2.0 * params.p * t ** (params.a + 1.0) * geo.integrate(sq * up))


def d2_entropy_power(
    u: ScalarField,
    params: FlowParams,
    geo: Optional[Geometry] = None,
    t: Optional[float] = None,
    interior_mask: Optional[np.ndarray] = None,
) -> float:
    """Explicit formula for d^2 N_p / dt^2 along the flow.

    Assembled from the geometry primitives as

    -2 sigma N_p [ (p-1+1/m) Var_gamma(L v)
                   + int Ric_{m,n}(L)(grad v, grad v) dgamma
                   + int ((m-n)/(mn)) (L v + m/(m-n) grad phi . grad v)^2
                         + |Hess v - (Delta v / n) g|^2 dgamma ]
    - sigma N_p int (dg/dt)(grad v, grad v) u dmu / |u|_p^p,

    with dgamma = u^p dmu / int u^p dmu.  The (m-n) terms drop when m = n.
    ``interior_mask`` restricts all dgamma integrals to a support interior
    (free-boundary data only carries classical curvature there).
    """
    _require_renyi(params)
    geo = geo or u.geometry
    t = u.t if t is None else t
    m, n = params.m, geo.dim_n
    v = pressure(u, params).values
    hd = geo.hessian_data(v, t=t)
    lv = hd.delta - hd.drift_dot
    up = np.maximum(u.values, 0.0) ** params.p
    if interior_mask is not None:
        up = np.where(interior_mask, up, 0.0)
    s = geo.integrate(up)
    if s <= 0.0:
        raise DataError("d2_entropy_power: int u^p dmu is zero")

    def gamma_mean(x):
        return geo.integrate(x * up) / s

    lv_mean = gamma_mean(lv)
    var = gamma_mean((lv - lv_mean) ** 2)
    total = (params.p - 1.0 + 1.0 / m) * var
    total += gamma_mean(geo.ric_form(v, m=m, t=t))
    if m > n:
        total += gamma_mean((m - n) / (m * n) * (lv + m / (m - n) * hd.drift_dot) ** 2)
    total += gamma_mean(hd.traceless_sq)
    np_ = entropy_power(u, params)
    out = -2.0 * params.sigma * np_ * total
    uvals = u.values if interior_mask is None else np.where(interior_mask, u.values, 0.0)
    out -= params.sigma * np_ * geo.integrate(geo.dgdt_form(v, t=t) * uvals) / s
    return float(out)


# --------------------------------------------------------------------- #
# Shannon (p -> 1) variants
# --------------------------------------------------------------------- #

DEFAULT_SHANNON_FLOOR = 1e-10


def shannon_entropy(u: ScalarField, params: Optional[FlowParams] = None) -> float:
    """H = -int u log u dmu over the support of u."""
    vals = u.values
    vmax = float(np.max(vals))
    if vmax <= 0.0:
        raise DataError("shannon_entropy: zero field")
    eps = params.floor_for(vals) if params is not None else DEFAULT_SHANNON_FLOOR * vmax
    mask = vals > eps
    integrand = np.where(mask, vals * np.log(np.where(mask, vals, 1.0)), 0.0)
    return float(-u.geometry.integrate(integrand))


def shannon_power(u: ScalarField, m: float) -> float:
    """N = exp(2 H / m); entropy-power semantics assume unit mass."""
    return float(np.exp(2.0 * shannon_entropy(u) / m))


def shannon_fisher(u: ScalarField, params: Optional[FlowParams] = None) -> float:
    """I = int |grad u|^2 / u dmu over the support of u."""
    vals = u.values
    vmax = float(np.max(vals))
    if vmax <= 0.0:
        raise DataError("shannon_fisher: zero field")
    eps = params.floor_for(vals) if params is not None else DEFAULT_SHANNON_FLOOR * vmax
    geo = u.geometry
    gsq = geo.grad_norm_sq(vals, t=u.t)
    mask = vals > eps
    integrand = np.where(mask, gsq / np.where(mask, vals, 1.0), 0.0)
    return float(geo.integrate(integrand))


# --------------------------------------------------------------------- #
# sampling
# --------------------------------------------------------------------- #


def functional_sample(u: ScalarField, params: FlowParams, geo: Optional[Geometry] = None) -> FunctionalSample:
    """Evaluate the full functional row at the field's time stamp."""
    geo = geo or u.geometry
    h = renyi_entropy(u, params)
    npow = float(np.exp(params.sigma * h))
    t = u.t
    if t > 0.0:
        nu = ni_entropy(u, params)
        wp = w_entropy(u, params)
        dw = w_entropy_rate(u, params, geo)
        d2n = d2_entropy_power(u, params, geo)
    else:
        nu = wp = dw = d2n = float("nan")
    return FunctionalSample(
        t=t,
        H_p=h,
        N_p=npow,
        I_p=fisher_information(u, params),
        E=E_value(u, params),
        Eprime=E_prime(u, params),
        Edoubleprime=E_doubleprime(u, params, geo),
        N_u=nu,
        W_p=wp,
        dW_dt=dw,
        d2Np_dt2_formula=d2n,
        norm_up=norm_up(u, params),
    )


def evaluate_trajectory(traj: Trajectory, params: FlowParams) -> List[FunctionalSample]:
    """One FunctionalSample per stored time, in time order."""
    geo = traj.geometry
    return [functional_sample(u, params, geo) for u in traj.fields]
