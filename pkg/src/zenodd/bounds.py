"""Closed-form evaluators for the analytic decoupling and Zeno bounds.

Every function here is a pure scalar function of dimensions, state norms,
the dimensionless time T = t ||Ĥ||_inf, and the step count n, so simulation
code can assert ``numeric <= bound`` directly.

System-2 bounds take the Frobenius norm of the system-1 state; system-1
bounds take the operator norm of the system-2 state.  That asymmetry is a
feature of the bounds, not a unit mix-up, and no conversion is applied.

For small n some floors go negative and some ceilings exceed their trivial
range; the inequalities are vacuous there.  Raw values are returned by the
evaluators, and :func:`clip_floor` / :func:`clip_unit` mark the explicit
clipping points used before feeding the values into vacuity-safe checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundInputs:
    """Scalar inputs shared by the bound evaluators.

    sigma_fro is ||sigma_1||_2 in [1/sqrt(d1), 1]; sigma_inf is
    ||sigma_2||_inf in [1/d2, 1]; r is the tail threshold in [0, 1).
    """

    d1: int
    d2: int
    big_t: float
    n: int
    sigma_fro: float = 1.0
    sigma_inf: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.big_t < 0:
            raise ValueError("T must be nonnegative")
        if not (0.0 < self.sigma_fro <= 1.0 + 1e-12):
            raise ValueError("||sigma_1||_2 must lie in (0, 1]")
        if not (0.0 < self.sigma_inf <= 1.0 + 1e-12):
            raise ValueError("||sigma_2||_inf must lie in (0, 1]")


def clip_floor(x: float) -> float:
    """Clip a purity/opnorm floor to the trivial range [0, inf)."""
    return max(x, 0.0)


def clip_unit(x: float) -> float:
    """Clip a probability-like bound into [0, 1]."""
    return min(max(x, 0.0), 1.0)


def zeno_bound_one_sided(big_t: float, n: int) -> float:
    """Zeno error bound T/n + T²/n for products ending on the projection."""
    return big_t / n + big_t**2 / n


def zeno_bound_sandwich(big_t: float, n: int) -> float:
    """Tighter bound T²/n for fully projection-sandwiched products."""
    return big_t**2 / n


def tr2_deviation(b: BoundInputs) -> float:
    """The recurring system-2 deviation sqrt(d1) ||sigma_1||_2 T² / n."""
    return np.sqrt(b.d1) * b.sigma_fro * b.big_t**2 / b.n


def tr1_deviation(b: BoundInputs) -> float:
    """The recurring system-1 deviation d2 ||sigma_2||_inf T² / n."""
    return b.d2 * b.sigma_inf * b.big_t**2 / b.n


def av2_bounds(b: BoundInputs) -> tuple[float, float]:
    """Average-protocol distance of system 2 from the Zeno unitary.

    Returns (Choi Frobenius distance bound, diamond distance bound).
    """
    x = tr2_deviation(b)
    return x, b.d2**2 * x


def tr2_purity_floor(b: BoundInputs) -> float:
    """Floor 1 - sqrt(d1)||sigma_1||_2 T²/n on sqrt(E[P]), E[opnorm], E[fidelity].

    Raw value; may be negative (vacuous) for small n.
    """
    return 1.0 - tr2_deviation(b)


def tr2_distance_bound(b: BoundInputs) -> tuple[float, float]:
    """Expected trajectory distance of system 2 from the Zeno unitary.

    Returns (Choi Frobenius bound sqrt(2 sqrt(d1)||sigma_1||_2 T²/n),
    diamond bound d2² times that).
    """
    x = np.sqrt(2.0 * tr2_deviation(b))
    return float(x), float(b.d2**2 * x)


def tr2_tail(b: BoundInputs) -> float:
    """Probability bound for system-2 fidelity at most r, clipped to [0, 1]."""
    if not (0.0 <= b.r < 1.0):
        raise ValueError("tail threshold r must lie in [0, 1)")
    return clip_unit(tr2_deviation(b) / (1.0 - b.r))


def tr1_purity_floor(b: BoundInputs) -> float:
    """Floor 1 - d2 ||sigma_2||_inf T²/n on sqrt(E[P]) and E[opnorm] of system 1."""
    return 1.0 - tr1_deviation(b)


def tr1_pure_choi_distance(b: BoundInputs) -> float:
    """Bound d2 ||sigma_2||_inf T²/n on E[||Λ1 - leading projector||_inf]."""
    return tr1_deviation(b)


def channel_unitary_bounds(
    d: int, purity: float, opnorm: float
) -> tuple[float, float, float, float]:
    """Distance-to-closest-unitary brackets from purity and Choi opnorm.

    Returns (lower, upper_fro, upper_fro_loose, upper_diamond):
    d(1-sqrt(P)), d sqrt(P-P²) + d sqrt(1-P²), 2d sqrt(1-P²), 3d(1-||Λ||_inf).
    Inputs must satisfy the spectral sandwich P ∈ [1/d², 1],
    ||Λ||_inf ∈ [P, sqrt(P)].
    """
    eps = 1e-12
    if not (1.0 / d**2 - eps <= purity <= 1.0 + eps):
        raise ValueError(f"purity {purity} outside [1/d², 1]")
    if not (purity - eps <= opnorm <= np.sqrt(purity) + eps):
        raise ValueError(f"opnorm {opnorm} violates the purity sandwich")
    p = min(max(purity, 0.0), 1.0)
    lower = d * (1.0 - np.sqrt(p))
    upper_fro = d * np.sqrt(max(p - p * p, 0.0)) + d * np.sqrt(max(1.0 - p * p, 0.0))
    upper_fro_loose = 2.0 * d * np.sqrt(max(1.0 - p * p, 0.0))
    upper_diamond = 3.0 * d * (1.0 - opnorm)
    return float(lower), float(upper_fro), float(upper_fro_loose), float(upper_diamond)


def tr1_unitary_distance_bounds(b: BoundInputs) -> tuple[float, float, float, float]:
    """Mean/variance bounds for the system-1 distance to its closest unitary.

    Returns (fro_mean, fro_var, diamond_mean, diamond_var):
    2 d1 sqrt(1 - (1-x)⁴), 4 d1² sqrt(1 - (1-x)⁴), 3 d1 x, 6 d1 x with
    x = d2 ||sigma_2||_inf T²/n.  The fourth-power base is clipped at zero,
    where the Frobenius bounds saturate at their trivial maxima 2 d1, 4 d1².
    """
    x = tr1_deviation(b)
    base = clip_floor(1.0 - x)
    root = np.sqrt(max(1.0 - base**4, 0.0))
    return (
        float(2.0 * b.d1 * root),
        float(4.0 * b.d1**2 * root),
        float(3.0 * b.d1 * x),
        float(6.0 * b.d1 * x),
    )


def tr2_variance_bounds(b: BoundInputs) -> tuple[float, float, float, float, float]:
    """Variance bounds for the system-2 trajectory quantities.

    Returns (purity_var, opnorm_var, fidelity_var, fro_dist_var,
    diamond_dist_var).  Each composes the Bhatia-Davis product with the
    matching mean floor/ceiling and trivial range; the Frobenius-distance
    entry assumes the distance maximum 2 (triangle inequality for trace-one
    positive matrices), the diamond entry the maximum 2 of the diamond
    distance of channels.
    """
    x = tr2_deviation(b)
    floor = clip_floor(1.0 - x)
    dist_choi, dist_diamond = tr2_distance_bound(b)
    purity_var = (1.0 - 1.0 / b.d2) * (1.0 - floor**2)
    opnorm_var = (1.0 - 1.0 / b.d2) * min(x, 1.0)
    fidelity_var = min(x, 1.0)
    fro_dist_var = 2.0 * dist_choi
    diamond_dist_var = 2.0 * dist_diamond
    return purity_var, opnorm_var, fidelity_var, fro_dist_var, diamond_dist_var


def bhatia_davis(max_val: float, min_val: float, mean: float) -> float:
    """Variance bound (max - E)(E - min) for a bounded random variable."""
    if not (min_val <= mean <= max_val):
        raise ValueError("need min <= mean <= max")
    return (max_val - mean) * (mean - min_val)
