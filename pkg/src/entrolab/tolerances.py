"""Single source of truth for check tolerances.

Values are pinned at the reference resolutions (N = 256 in 1d, 512 for the
free-boundary runs, 128^2 in 2d, CFL time step, sampling interval
1e-3 * (t1 - t0)).  Experiment configs may override individual entries.
"""

from typing import Dict

DEFAULT_TOLERANCES: Dict[str, float] = {
    # identity checks: relative residuals
    "dissipation_first": 1e-3,
    "dissipation_second": 5e-3,
    "entropy_rate": 1e-3,
    "d2np_identity": 5e-3,
    "d2np_identity_weighted": 1e-2,
    "w_identity": 5e-3,
    "nu_rate_identity": 5e-3,
    "fisher_w_link": 5e-3,
    # inequality checks: margin >= -tol * scale
    "concavity_flat": 1e-8,
    "concavity_margin": 1e-6,
    "ab_margin": 1e-6,
    "fisher_margin": 1e-6,
    "w_rate_sign": 1e-8,
    "fisher_w_margin": 1e-6,
    "dissipation_bound": 5e-3,
    # equality-case (free boundary) variants
    "ab_equality_h_factor": 3.0,  # |min| <= factor * h on the level-set interior
    "fisher_equality": 1e-3,  # |kappa/t - I_p| <= tol * kappa/t
    "rigidity_residual": 1e-2,  # |I' + sigma I^2| <= tol / t^2
    # interior mask for pointwise checks on free-boundary data: the discrete
    # interface layer spreads into the support, so the certified interior is
    # the 20% level set eroded by two stencil widths
    "support_level": 0.2,
}


def merge_tolerances(overrides: Dict[str, float] = None) -> Dict[str, float]:
    table = dict(DEFAULT_TOLERANCES)
    if overrides:
        unknown = set(overrides) - set(table)
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        table.update(overrides)
    return table
