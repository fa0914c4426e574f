"""Seeded, deterministically parallel trajectory sampling and statistics.

Every trajectory is drawn from a substream keyed by (master_seed, ordinal),
so sample ``k`` of a run is the same no matter which worker thread computes
it or how many workers exist.  Results are placed into ordinal-indexed slots
and reduced in ordinal order; no emitted digit depends on the thread count.

Per-trajectory statistics are plain functions (model, set, sample) -> float,
registered by name so the experiment runner can select them.  Registered
names:

    purity-1, purity-2          purity of the sigma-reduced Choi state
    opnorm-1, opnorm-2          its largest eigenvalue
    fidelity-2-zeno             overlap of system 2 with the Zeno unitary
    frob-dist-2-zeno            Frobenius distance to the Zeno pure Choi
    trace-dist-1-identity       pulse-inverted system 1 vs identity Choi
    frob-dist-superop-1-closest-unitary   matrix-representation distance
    frob-dist-superop-2-closest-unitary     to the closest unitary
    diamond-upper-1-closest-unitary       3 d1 (1 - ||Λ1||_inf)

The ``-1`` statistics reduce over a fixed system-2 state sigma2, the ``-2``
ones over a fixed system-1 state sigma1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from . import linalg
from .channel import (
    choi_from_superop,
    choi_of_reduced_map,
    closest_unitary_channel,
    fidelity_to_unitary,
    identity_choi,
    pure_choi,
    reduced_superop,
    superop_from_unitary,
)
from .linalg import schatten_norm, substream
from .model import BipartiteModel
from .protocol import (
    ENUM_CAP,
    DecouplingSet,
    TrajectorySample,
    pulse_inverted_evolution,
    trajectory_evolution,
)


@dataclass(frozen=True)
class Statistic:
    """A named, pure, deterministic per-trajectory evaluator."""

    name: str
    evaluator: Callable[[BipartiteModel, DecouplingSet, TrajectorySample], float]


@dataclass(frozen=True)
class EstimateReport:
    """Monte-Carlo moments of one statistic at one step count."""

    n: int
    samples: int
    mean: float
    variance: float
    stderr: float
    seed: int
    statistic: str


def sample_trajectory(
    dset: DecouplingSet, n: int, master_seed: int, ordinal: int
) -> TrajectorySample:
    """Draw n+1 i.i.d. pulse indices from the set's weights.

    The stream is a deterministic function of (master_seed, ordinal); the
    same arguments always return the identical sample.  Index draws invert
    the cumulative weight table on uniform floats.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = substream(master_seed, ordinal)
    cum = np.cumsum(dset.probabilities())
    u = rng.random(n + 1)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(dset) - 1)
    return TrajectorySample(n=n, indices=tuple(int(i) for i in idx), seed=master_seed)


def _evaluate_range(model, dset, n, master_seed, statistics, out, start, stop):
    for k in range(start, stop):
        sample = sample_trajectory(dset, n, master_seed, k)
        for j, stat in enumerate(statistics):
            try:
                out[j, k] = stat.evaluator(model, dset, sample)
            except Exception as e:  # noqa: BLE001 - annotate and re-raise
                raise RuntimeError(
                    f"statistic {stat.name!r} failed at ordinal {k}: {e}"
                ) from e


def _collect_values(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    samples: int,
    master_seed: int,
    statistics: list[Statistic],
    threads: int,
) -> np.ndarray:
    values = np.empty((len(statistics), samples), dtype=float)
    if threads <= 1 or samples < 2 * threads:
        _evaluate_range(model, dset, n, master_seed, statistics, values, 0, samples)
    else:
        # disjoint ordinal blocks per worker; slot writes keep ordinal order
        edges = np.linspace(0, samples, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(
                    _evaluate_range, model, dset, n, master_seed, statistics, values, a, b
                )
                for a, b in zip(edges[:-1], edges[1:])
                if b > a
            ]
            for f in futures:
                f.result()
    if not np.all(np.isfinite(values)):
        raise RuntimeError("statistic produced a non-finite value")
    return values


def estimate_many(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    samples: int,
    master_seed: int,
    statistics: list[Statistic],
    threads: int = 1,
) -> list[EstimateReport]:
    """Estimate several statistics on one shared trajectory stream."""
    if samples < 2:
        raise ValueError("need at least 2 samples for a variance estimate")
    values = _collect_values(model, dset, n, samples, master_seed, statistics, threads)
    reports = []
    for stat, row in zip(statistics, values):
        mean = float(np.mean(row))
        var = float(np.var(row, ddof=1))
        reports.append(
            EstimateReport(
                n=n,
                samples=samples,
                mean=mean,
                variance=var,
                stderr=float(np.sqrt(var / samples)),
                seed=master_seed,
                statistic=stat.name,
            )
        )
    return reports


def estimate(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    samples: int,
    master_seed: int,
    statistic: Statistic,
    threads: int = 1,
) -> EstimateReport:
    """Mean, unbiased variance, and standard error of one statistic."""
    return estimate_many(model, dset, n, samples, master_seed, [statistic], threads)[0]


def tail_probability(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    samples: int,
    master_seed: int,
    statistic: Statistic,
    threshold: float,
    direction: str = "le",
    threads: int = 1,
) -> tuple[float, float]:
    """Empirical P[statistic <= threshold] (or >=) with binomial stderr."""
    if samples < 1:
        raise ValueError("need at least one sample")
    values = _collect_values(model, dset, n, samples, master_seed, [statistic], threads)[0]
    if direction == "le":
        hits = int(np.sum(values <= threshold))
    elif direction == "ge":
        hits = int(np.sum(values >= threshold))
    else:
        raise ValueError("direction must be 'le' or 'ge'")
    p = hits / samples
    return p, float(np.sqrt(p * (1.0 - p) / samples))


@dataclass(frozen=True)
class EnumerationResult:
    """Exact moments of a statistic over every trajectory, with weights."""

    mean: float
    variance: float
    values: np.ndarray
    weights: np.ndarray

    def tail(self, threshold: float, direction: str = "le") -> float:
        if direction == "le":
            return float(np.sum(self.weights[self.values <= threshold]))
        if direction == "ge":
            return float(np.sum(self.weights[self.values >= threshold]))
        raise ValueError("direction must be 'le' or 'ge'")


def enumerate_statistic(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    statistic: Statistic,
    cap: int = ENUM_CAP,
) -> EnumerationResult:
    """Exact expectation over all |V|^(n+1) trajectories with their weights."""
    k = len(dset)
    total = k ** (n + 1)
    if total > cap:
        raise ValueError(f"{total} sequences exceed the enumeration cap {cap}")
    probs = dset.probabilities()
    values = np.empty(total, dtype=float)
    weights = np.empty(total, dtype=float)
    for j, idx in enumerate(product(range(k), repeat=n + 1)):
        weights[j] = float(np.prod([probs[i] for i in idx]))
        values[j] = statistic.evaluator(model, dset, TrajectorySample(n=n, indices=idx))
    mean = float(np.dot(weights, values))
    variance = float(np.dot(weights, (values - mean) ** 2))
    return EnumerationResult(mean=mean, variance=variance, values=values, weights=weights)


# ---------------------------------------------------------------------------
# statistic registry
# ---------------------------------------------------------------------------


def _reduced_choi_stat(sigma: np.ndarray, fixed_on: int, fn) -> Callable:
    def evaluator(model, dset, sample):
        s = trajectory_evolution(model, dset, sample)
        return fn(choi_of_reduced_map(s, sigma, fixed_on), model)

    return evaluator


def _build_purity_1(model, dset, sigma1, sigma2):
    return Statistic("purity-1", _reduced_choi_stat(sigma2, 2, lambda c, m: c.purity()))


def _build_purity_2(model, dset, sigma1, sigma2):
    return Statistic("purity-2", _reduced_choi_stat(sigma1, 1, lambda c, m: c.purity()))


def _build_opnorm_1(model, dset, sigma1, sigma2):
    return Statistic("opnorm-1", _reduced_choi_stat(sigma2, 2, lambda c, m: c.opnorm()))


def _build_opnorm_2(model, dset, sigma1, sigma2):
    return Statistic("opnorm-2", _reduced_choi_stat(sigma1, 1, lambda c, m: c.opnorm()))


def _build_fidelity_2_zeno(model, dset, sigma1, sigma2):
    u2 = linalg.expm_i(model.h2, model.t)
    return Statistic(
        "fidelity-2-zeno",
        _reduced_choi_stat(sigma1, 1, lambda c, m: fidelity_to_unitary(c, u2)),
    )


def _build_frob_dist_2_zeno(model, dset, sigma1, sigma2):
    target = pure_choi(linalg.expm_i(model.h2, model.t)).matrix

    def evaluator(m, ds, sample):
        s = trajectory_evolution(m, ds, sample)
        c = choi_of_reduced_map(s, sigma1, 1)
        return schatten_norm(c.matrix - target, 2)

    return Statistic("frob-dist-2-zeno", evaluator)


def _build_trace_dist_1_identity(model, dset, sigma1, sigma2):
    target = identity_choi(model.d1).matrix

    def evaluator(m, ds, sample):
        s = pulse_inverted_evolution(m, ds, sample)
        c = choi_of_reduced_map(s, sigma2, 2)
        return schatten_norm(c.matrix - target, 1)

    return Statistic("trace-dist-1-identity", evaluator)


def _superop_unitary_dist(sigma: np.ndarray, fixed_on: int) -> Callable:
    def evaluator(model, dset, sample):
        s = trajectory_evolution(model, dset, sample)
        s_red = reduced_superop(s, sigma, fixed_on)
        u, _, _, _ = closest_unitary_channel(choi_from_superop(s_red))
        return schatten_norm(s_red - superop_from_unitary(u), 2)

    return evaluator


def _build_frob_dist_superop_1(model, dset, sigma1, sigma2):
    return Statistic(
        "frob-dist-superop-1-closest-unitary", _superop_unitary_dist(sigma2, 2)
    )


def _build_frob_dist_superop_2(model, dset, sigma1, sigma2):
    return Statistic(
        "frob-dist-superop-2-closest-unitary", _superop_unitary_dist(sigma1, 1)
    )


def _build_diamond_upper_1(model, dset, sigma1, sigma2):
    return Statistic(
        "diamond-upper-1-closest-unitary",
        _reduced_choi_stat(sigma2, 2, lambda c, m: 3.0 * m.d1 * (1.0 - c.opnorm())),
    )


REGISTRY: dict[str, Callable] = {
    "purity-1": _build_purity_1,
    "purity-2": _build_purity_2,
    "opnorm-1": _build_opnorm_1,
    "opnorm-2": _build_opnorm_2,
    "fidelity-2-zeno": _build_fidelity_2_zeno,
    "frob-dist-2-zeno": _build_frob_dist_2_zeno,
    "trace-dist-1-identity": _build_trace_dist_1_identity,
    "frob-dist-superop-1-closest-unitary": _build_frob_dist_superop_1,
    "frob-dist-superop-2-closest-unitary": _build_frob_dist_superop_2,
    "diamond-upper-1-closest-unitary": _build_diamond_upper_1,
}


def make_statistic(
    name: str,
    model: BipartiteModel,
    dset: DecouplingSet,
    sigma1: np.ndarray | None = None,
    sigma2: np.ndarray | None = None,
) -> Statistic:
    """Instantiate a registered statistic for a model and reduction states.

    sigma1/sigma2 default to the maximally mixed state of their subsystem.
    """
    if name not in REGISTRY:
        raise KeyError(f"unknown statistic {name!r}; known: {sorted(REGISTRY)}")
    if sigma1 is None:
        sigma1 = np.eye(model.d1, dtype=complex) / model.d1
    if sigma2 is None:
        sigma2 = np.eye(model.d2, dtype=complex) / model.d2
    return REGISTRY[name](model, dset, sigma1, sigma2)
