"""Decoupling protocols: periodic, random-trajectory, and exact-average.

All evolutions are returned as matrix representations (superoperators) on the
row-vectorized doubled space of the full bipartite system.  Pulses act on
system 1 only and are lifted as V ⊗ 1_2 before conversion.

A trajectory applies n+1 pulses interleaving n free-evolution steps; the
``terminal_pulse`` flag drops the final pulse, which weakens the analytic
error constant from T² to T(1+T) but needs no separate code path.

The two printed 101-pulse reference sequences (one drawn uniformly, one with
the identity pulse 20 times more likely) are shipped as label tuples; an
experiment at step count n uses their length-(n+1) prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import linalg
from .channel import superop_from_unitary
from .linalg import dag, tensor
from .model import BipartiteModel, generator_superop, projector_d, zeno_generator

UNITARY_TOL = 1e-10
ENUM_CAP = 500_000


@dataclass
class DecouplingSet:
    """Pulse unitaries on system 1 with sampling weights and display labels."""

    unitaries: list[np.ndarray]
    weights: list[float]
    labels: list[str]
    _lift_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.unitaries:
            raise ValueError("decoupling set needs at least one unitary")
        if not (len(self.unitaries) == len(self.weights) == len(self.labels)):
            raise ValueError("unitaries, weights, and labels must align")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        for u in self.unitaries:
            d = u.shape[0]
            if np.abs(u @ dag(u) - np.eye(d)).max() > UNITARY_TOL:
                raise ValueError("pulse is not unitary within tolerance")

    def __len__(self) -> int:
        return len(self.unitaries)

    @property
    def d1(self) -> int:
        return self.unitaries[0].shape[0]

    def probabilities(self) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        return w / w.sum()

    def lifted(self, d2: int) -> list[np.ndarray]:
        """Superoperators of V ⊗ 1_2, cached per bath dimension."""
        if d2 not in self._lift_cache:
            eye = np.eye(d2)
            self._lift_cache[d2] = [superop_from_unitary(tensor(u, eye)) for u in self.unitaries]
        return self._lift_cache[d2]


def pauli_set() -> DecouplingSet:
    """The uniform single-qubit set {1, X, Y, Z}."""
    from .model import PAULI

    return DecouplingSet(
        unitaries=[PAULI[k].copy() for k in "IXYZ"],
        weights=[1.0, 1.0, 1.0, 1.0],
        labels=list("IXYZ"),
    )


def pauli_atypical_set() -> DecouplingSet:
    """{1, X, Y, Z} with the identity pulse 20 times more likely."""
    s = pauli_set()
    s.weights = [20.0, 1.0, 1.0, 1.0]
    return s


@dataclass(frozen=True)
class TrajectorySample:
    """A concrete sampled pulse-index sequence: n steps, n+1 pulses."""

    n: int
    indices: tuple[int, ...]
    seed: int = -1

    def __post_init__(self):
        if len(self.indices) != self.n + 1:
            raise ValueError(f"need n+1 = {self.n + 1} indices, got {len(self.indices)}")


def serialize_sample(sample: TrajectorySample, dset: DecouplingSet) -> str:
    """Comma-separated pulse-label line, e.g. ``Z,Z,Y,...``."""
    return ",".join(dset.labels[i] for i in sample.indices)


def parse_sequence(line: str, dset: DecouplingSet) -> tuple[int, ...]:
    """Label line back to pulse indices."""
    lookup = {lab: i for i, lab in enumerate(dset.labels)}
    toks = [t.strip() for t in line.strip().split(",") if t.strip()]
    try:
        return tuple(lookup[t] for t in toks)
    except KeyError as e:
        raise ValueError(f"unknown pulse label {e.args[0]!r}") from e


def fixture_sample(labels: tuple[str, ...], n: int, dset: DecouplingSet) -> TrajectorySample:
    """Length-(n+1) prefix of a stored label sequence as a sample."""
    if n + 1 > len(labels):
        raise ValueError(f"sequence has only {len(labels)} pulses, need {n + 1}")
    lookup = {lab: i for i, lab in enumerate(dset.labels)}
    return TrajectorySample(n=n, indices=tuple(lookup[l] for l in labels[: n + 1]))


def step_superop(model: BipartiteModel, dt: float) -> np.ndarray:
    """One free-evolution step e^{-i dt Ĥ} of the full generator."""
    spec = model.gen_spectrum
    phases = np.exp(-1j * dt * spec.eigenvalues)
    return (spec.eigenvectors * phases) @ dag(spec.eigenvectors)


def pdd_evolution(model: BipartiteModel, dset: DecouplingSet, m: int) -> np.ndarray:
    """Periodic deterministic decoupling: m cycles through the whole set.

    One cycle conjugates a free step of length t/(m|V|) by each pulse in
    order; the result is the m-th power of the cycle.
    """
    if m < 1:
        raise ValueError("cycle count must be at least 1")
    k = len(dset)
    e = step_superop(model, model.t / (m * k))
    lifted = dset.lifted(model.d2)
    cycle = np.eye(model.dim**2, dtype=complex)
    for v in lifted:
        cycle = dag(v) @ e @ v @ cycle
    return np.linalg.matrix_power(cycle, m)


def trajectory_evolution(
    model: BipartiteModel,
    dset: DecouplingSet,
    sample: TrajectorySample,
    terminal_pulse: bool = True,
) -> np.ndarray:
    """One random-decoupling trajectory V_{n+1} E V_n ... E V_1.

    E = e^{-i (t/n) Ĥ}; with ``terminal_pulse=False`` the final pulse is
    dropped and the product ends on a free step.
    """
    if sample.n < 1:
        raise ValueError("trajectory needs at least one step")
    lifted = dset.lifted(model.d2)
    e = step_superop(model, model.t / sample.n)
    idx = sample.indices
    if any(i < 0 or i >= len(lifted) for i in idx):
        raise IndexError("pulse index out of range for the decoupling set")
    acc = lifted[idx[0]].copy()
    for k in range(1, sample.n + 1):
        acc = e @ acc
        if terminal_pulse or k < sample.n:
            acc = lifted[idx[k]] @ acc
    return acc


def pulse_inverted_evolution(
    model: BipartiteModel, dset: DecouplingSet, sample: TrajectorySample
) -> np.ndarray:
    """Trajectory evolution with the accumulated pulse product undone at the end."""
    traj = trajectory_evolution(model, dset, sample)
    w = np.eye(dset.d1, dtype=complex)
    for i in sample.indices:
        w = dset.unitaries[i] @ w
    w_hat = superop_from_unitary(tensor(w, np.eye(model.d2)))
    return dag(w_hat) @ traj


def average_evolution_exact(
    model: BipartiteModel, n: int, terminal_pulse: bool = True
) -> np.ndarray:
    """Trajectory ensemble average (D̂ e^{-i(t/n)Ĥ} D̂)^n.

    Without the terminal pulse the average is (e^{-i(t/n)Ĥ} D̂)^n instead.
    """
    if n < 1:
        raise ValueError("step count must be at least 1")
    dproj = projector_d(model.d1, model.d2)
    e = step_superop(model, model.t / n)
    core = dproj @ e @ dproj if terminal_pulse else e @ dproj
    return np.linalg.matrix_power(core, n)


def brute_force_average(
    model: BipartiteModel,
    dset: DecouplingSet,
    n: int,
    cap: int = ENUM_CAP,
    terminal_pulse: bool = True,
) -> np.ndarray:
    """Explicit weighted sum of trajectories over all |V|^(n+1) sequences.

    This is the enumeration oracle for :func:`average_evolution_exact`; it
    follows the definition term by term and refuses to run past ``cap``
    sequences.
    """
    k = len(dset)
    total = k ** (n + 1)
    if total > cap:
        raise ValueError(f"{total} sequences exceed the enumeration cap {cap}")
    probs = dset.probabilities()
    acc = np.zeros((model.dim**2, model.dim**2), dtype=complex)
    for idx in product(range(k), repeat=n + 1):
        w = float(np.prod([probs[i] for i in idx]))
        sample = TrajectorySample(n=n, indices=idx)
        acc += w * trajectory_evolution(model, dset, sample, terminal_pulse=terminal_pulse)
    return acc


def zeno_limit(model: BipartiteModel, tol: float = 1e-10) -> np.ndarray:
    """n -> infinity limit of the average protocol: e^{-i t D̂ĤD̂} D̂.

    Computed both from the projected generator and from the bath generator
    e^{-i t (I_1 ⊗ Ĥ_2)} D̂; the two must agree, otherwise the model's split
    is inconsistent and an error is raised.
    """
    sandwich, _ = zeno_generator(model)
    dproj = projector_d(model.d1, model.d2)
    via_projected = linalg.expm_i(sandwich, model.t) @ dproj
    bath_gen = generator_superop(tensor(np.eye(model.d1), model.h2))
    via_bath = linalg.expm_i(bath_gen, model.t) @ dproj
    if linalg.schatten_norm(via_projected - via_bath, np.inf) > tol:
        raise ValueError("Zeno-limit forms disagree; leg ordering or split is broken")
    return via_projected


def zeno_product(h: np.ndarray, p: np.ndarray, t: float, n: int, variant: str) -> np.ndarray:
    """Projected evolution products for the Zeno-limit comparisons.

    variant "P-last": (e^{-i(t/n)H} P)^n, "P-sandwich": (P e^{-i(t/n)H} P)^n,
    "P-first": (P e^{-i(t/n)H})^n.  Requires P to be a Hermitian projection.
    """
    p = np.asarray(p, dtype=complex)
    if np.abs(p @ p - p).max() > UNITARY_TOL or not linalg.is_hermitian(p):
        raise ValueError("p must be a Hermitian projection")
    if n < 1:
        raise ValueError("step count must be at least 1")
    e = linalg.expm_i(h, t / n)
    if variant == "P-last":
        core = e @ p
    elif variant == "P-sandwich":
        core = p @ e @ p
    elif variant == "P-first":
        core = p @ e
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return np.linalg.matrix_power(core, n)


def zeno_target(h: np.ndarray, p: np.ndarray, t: float) -> np.ndarray:
    """Limit point e^{-i t PHP} P shared by all the product variants."""
    php = linalg.hermitize(p @ h @ p)
    return linalg.expm_i(php, t) @ p


# 101-pulse reference sequences (uniform draw / identity-heavy draw).
TYPICAL_LABELS: tuple[str, ...] = tuple(
    "Z Z Y Y Y Y X X I I I Y I I Y Y Y Z Z X Z Y Y Y Y "
    "Z X Y Z I X Y I Z Y X Y Y Z I Z Z X Y I Y Z X I I "
    "Z X Y Y Y X Y Z Y Y X Y Y Y Y I Z Y X Y Z Z X I X "
    "I X Y Y Z X Y Z X I X Z Z I Z Y X X I I Z Y Y X Y I".split()
)

ATYPICAL_LABELS: tuple[str, ...] = tuple(
    "I X Y I I I I I I I I I I I I I I I I I I I I I X "
    "I X I I I I I I I I I I I I I I I I I I I I I I I "
    "I Z Z I I I I I I I Z I I I I I I I I I I I I I I "
    "I I I I Z I I I I I I I I I I I I I I I I I I I I I".split()
)
