"""Quantum-channel representations and distance measures.

A channel on a d-dimensional system appears in three forms:

* a list of Kraus operators ``[E_0, E_1, ...]`` with sum E†E = 1,
* its matrix representation ("superoperator"), the d²×d² matrix
  sum_k E_k ⊗ conj(E_k) acting on row-vectorized operators,
* its Choi state, the trace-one positive d²×d² matrix
  Λ = (T ⊗ I)(|1)(1|/d).

Subsystem convention for bipartite Choi states: the doubled space is stored
in the order (1, 2, 1', 2') — output legs first, then reference legs, each
split by subsystem.  This is the natural layout produced by row-vectorizing
operators on H1 ⊗ H2, and every partial trace over Choi legs goes through
:func:`zenodd.linalg.partial_trace` on dims ``[d1, d2, d1, d2]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .linalg import dag, devectorize, schatten_norm, substream, tensor, vectorize

TP_TOL = 1e-9
KRAUS_TOL = 1e-6
CHOI_EIG_TOL = 1e-9
DEGENERACY_TOL = 1e-12
KRAUS_CUTOFF = 1e-12


def superop_dim(s: np.ndarray) -> int:
    """Underlying Hilbert-space dimension d of a d²×d² superoperator."""
    d = int(round(np.sqrt(s.shape[0])))
    if s.shape != (d * d, d * d):
        raise ValueError(f"superoperator shape {s.shape} is not d² × d²")
    return d


def is_trace_preserving(s: np.ndarray, tol: float = TP_TOL) -> bool:
    """Check (1| S = (1| on the vectorized identity."""
    d = superop_dim(s)
    bra = vectorize(np.eye(d)).conj()
    return bool(np.abs(bra @ s - bra).max() <= tol)


def superop_from_unitary(u: np.ndarray, tol: float = TP_TOL) -> np.ndarray:
    """Matrix representation U ⊗ conj(U) of a unitary conjugation."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if np.abs(u @ dag(u) - np.eye(d)).max() > tol:
        raise ValueError("input is not unitary within tolerance")
    return tensor(u, u.conj())


def kraus_defect(kraus: list[np.ndarray]) -> float:
    """Deviation of sum E†E from the identity, in max-entry norm."""
    d = kraus[0].shape[0]
    acc = sum(dag(e) @ e for e in kraus)
    return float(np.abs(acc - np.eye(d)).max())


def superop_from_kraus(kraus: list[np.ndarray], tol: float = KRAUS_TOL) -> np.ndarray:
    """Matrix representation sum_k E_k ⊗ conj(E_k) of a Kraus family."""
    if not kraus:
        raise ValueError("empty Kraus list")
    if kraus_defect(kraus) > tol:
        raise ValueError("Kraus condition sum E†E = 1 violated beyond tolerance")
    return sum(tensor(e, np.conj(e)) for e in kraus)


def _reshuffle(m: np.ndarray) -> np.ndarray:
    """Involutive index swap (i,i')(j,j') -> (i,j)(i',j') on a d²×d² matrix."""
    d = superop_dim(m)
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


@dataclass
class ChoiState:
    """Normalized Choi state with cached spectral data.

    Validates Hermiticity, unit trace, and positivity (eigenvalues above
    -1e-9) at construction; negative eigenvalues inside the tolerance band
    are clamped to zero before purity or Kraus extraction.
    """

    matrix: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = superop_dim(self.matrix)
        if self.dim == 0:
            self.dim = d
        elif self.dim != d:
            raise ValueError(f"declared dim {self.dim} does not match matrix of dim {d}")
        if not linalg.is_hermitian(self.matrix):
            raise ValueError("Choi matrix is not Hermitian")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > TP_TOL:
            raise ValueError(f"Choi matrix has trace {tr}, expected 1 (normalized convention)")

    @cached_property
    def spectrum(self) -> linalg.Spectrum:
        spec = linalg.eigh_spectrum(self.matrix)
        if spec.eigenvalues[-1] < -CHOI_EIG_TOL:
            raise ValueError(f"Choi matrix has negative eigenvalue {spec.eigenvalues[-1]}")
        vals = np.clip(spec.eigenvalues, 0.0, None)
        return linalg.Spectrum(eigenvalues=vals, eigenvectors=spec.eigenvectors)

    @property
    def leading_degenerate(self) -> bool:
        """True when the two largest Choi eigenvalues coincide within 1e-12."""
        vals = self.spectrum.eigenvalues
        return vals.size > 1 and (vals[0] - vals[1]) <= DEGENERACY_TOL

    def purity(self) -> float:
        return float(np.sum(self.spectrum.eigenvalues**2))

    def opnorm(self) -> float:
        return float(self.spectrum.eigenvalues[0])


def choi_from_superop(s: np.ndarray) -> ChoiState:
    """Choi state (T ⊗ I)(|1)(1|/d) of a trace-preserving superoperator.

    Block (a,b) of the result is T(|a><b|)/d; assembled here as an index
    reshuffle of the superoperator matrix.
    """
    if not is_trace_preserving(s):
        raise ValueError("superoperator is not trace preserving")
    d = superop_dim(s)
    return ChoiState(_reshuffle(s) / d)


def superop_from_choi(c: ChoiState) -> np.ndarray:
    """Inverse of :func:`choi_from_superop` (same reshuffle, rescaled)."""
    return _reshuffle(c.matrix) * c.dim


def fix_global_phase(m: np.ndarray) -> np.ndarray:
    """Rotate a matrix so its largest-magnitude entry is real positive."""
    idx = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    z = m[idx]
    if abs(z) == 0.0:
        return m
    return m * (abs(z) / z)


def kraus_from_choi(c: ChoiState) -> list[np.ndarray]:
    """Kraus operators E_k = sqrt(d λ_k) devec(v_k) from the Choi spectrum.

    Eigenvalues below 1e-12 are dropped.  The family is Hilbert–Schmidt
    orthogonal with tr(E_k† E_l) = d λ_k δ_kl.  Each operator's global phase
    is fixed (largest entry real positive) so extraction is deterministic.
    """
    spec = c.spectrum
    ops = []
    for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        if lam <= KRAUS_CUTOFF:
            continue
        ops.append(np.sqrt(c.dim * lam) * fix_global_phase(devectorize(vec)))
    return ops


def purity(c: ChoiState) -> float:
    """tr(Λ²); equals 1 exactly for unitary channels, 1/d² at the bottom."""
    return c.purity()


def pure_choi(u: np.ndarray) -> ChoiState:
    """Choi state |u)(u|/d of the unitary channel u • u†."""
    v = vectorize(u)
    d = u.shape[0]
    return ChoiState(np.outer(v, v.conj()) / d)


def identity_choi(d: int) -> ChoiState:
    return pure_choi(np.eye(d))


def reduced_choi(c: ChoiState, which: int, d1: int, d2: int) -> ChoiState:
    """Reduced Choi state Λ1 = tr_{22'} Λ or Λ2 = tr_{11'} Λ.

    The Choi legs are stored as (1, 2, 1', 2'), so reducing keeps slots
    (0, 2) for system 1 and (1, 3) for system 2.
    """
    if c.dim != d1 * d2:
        raise ValueError(f"Choi dim {c.dim} does not factor as {d1} x {d2}")
    dims = [d1, d2, d1, d2]
    if which == 1:
        keep = (0, 2)
    elif which == 2:
        keep = (1, 3)
    else:
        raise ValueError("which must be 1 or 2")
    return ChoiState(linalg.partial_trace(c.matrix, dims, keep))


def reduced_superop(s: np.ndarray, fixed_state: np.ndarray, fixed_on: int) -> np.ndarray:
    """Matrix representation of the reduced map rho -> tr_other[T(rho ⊗ σ)].

    ``fixed_on`` names the subsystem (1 or 2) held in the density ``σ``;
    the returned superoperator acts on the other one.
    """
    fixed_state = np.asarray(fixed_state, dtype=complex)
    if not linalg.is_hermitian(fixed_state) or abs(np.trace(fixed_state) - 1) > TP_TOL:
        raise ValueError("fixed state must be a trace-one Hermitian density matrix")
    if np.linalg.eigvalsh(linalg.hermitize(fixed_state)).min() < -CHOI_EIG_TOL:
        raise ValueError("fixed state must be positive semidefinite")
    d = superop_dim(s)
    df = fixed_state.shape[0]
    dr = d // df
    if dr * df != d:
        raise ValueError("fixed state dimension does not divide the total dimension")
    if fixed_on not in (1, 2):
        raise ValueError("fixed_on must be 1 or 2")
    dims = [dr, df] if fixed_on == 2 else [df, dr]
    keep = [0] if fixed_on == 2 else [1]
    out = np.empty((dr * dr, dr * dr), dtype=complex)
    for a in range(dr):
        for b in range(dr):
            unit = np.zeros((dr, dr), dtype=complex)
            unit[a, b] = 1.0
            inp = tensor(unit, fixed_state) if fixed_on == 2 else tensor(fixed_state, unit)
            img = devectorize(s @ vectorize(inp))
            out[:, a * dr + b] = vectorize(linalg.partial_trace(img, dims, keep))
    return out


def choi_of_reduced_map(s: np.ndarray, fixed_state: np.ndarray, fixed_on: int) -> ChoiState:
    """Choi state of the reduced map T_{1,σ2} (or T_{2,σ1})."""
    return choi_from_superop(reduced_superop(s, fixed_state, fixed_on))


def fidelity_to_unitary(c: ChoiState, u: np.ndarray) -> float:
    """(1/d)(u|Λ|u) with |u) = vec(u); equals 1 iff Λ is the Choi of u."""
    v = vectorize(u)
    if v.size != c.matrix.shape[0]:
        raise ValueError("unitary dimension does not match the Choi state")
    return float(np.real(v.conj() @ c.matrix @ v) / c.dim)


def closest_unitary_channel(c: ChoiState) -> tuple[np.ndarray, float, float, float]:
    """Closest unitary via the leading Kraus operator, with distance bounds.

    Returns ``(u, lower, upper_frobenius, upper_diamond)`` where ``u`` is the
    polar unitary of the leading Kraus operator and the scalars bracket the
    distances:  d(1-sqrt(P)) <= ||T̂-Û||_2 <= d sqrt(P-P²) + d sqrt(1-P²),
    and ||T-U||_diamond <= 3d(1-||Λ||_inf).
    """
    spec = c.spectrum
    e0 = np.sqrt(c.dim * spec.eigenvalues[0]) * fix_global_phase(
        devectorize(spec.eigenvectors[:, 0])
    )
    u = linalg.closest_unitary(e0)
    p = c.purity()
    d = c.dim
    lower = d * (1.0 - np.sqrt(p))
    upper_fro = d * np.sqrt(max(p - p * p, 0.0)) + d * np.sqrt(max(1.0 - p * p, 0.0))
    upper_diamond = 3.0 * d * (1.0 - c.opnorm())
    return u, float(lower), float(upper_fro), float(upper_diamond)


def diamond_bounds(a: ChoiState, b: ChoiState) -> tuple[float, float]:
    """Bracket of the diamond distance from the Choi trace distance.

    ||Λa - Λb||_1 <= ||S - T||_diamond <= d ||Λa - Λb||_1, so the returned
    pair (lower, upper) sandwiches the true diamond distance.
    """
    if a.dim != b.dim:
        raise ValueError("Choi states have different dimensions")
    t = schatten_norm(a.matrix - b.matrix, 1)
    return t, a.dim * t


def extend_superop(s: np.ndarray) -> np.ndarray:
    """Superoperator of S ⊗ I on the doubled space H ⊗ H' (ancilla dim d).

    Acts on row-vectorized operators on H ⊗ H', whose index order is
    (row_H, row_H', col_H, col_H'); the bare superoperator acts on the
    (row_H, col_H) pair.
    """
    d = superop_dim(s)
    big = tensor(s, np.eye(d * d))  # slots (row_H, col_H, row_H', col_H')
    return linalg.permute_subsystems(big, [d, d, d, d], [0, 2, 1, 3])


def sampled_diamond_lower(
    sa: np.ndarray, sb: np.ndarray, samples: int, seed: int
) -> float:
    """Monte-Carlo lower bound on the diamond distance of two superoperators.

    Draws Haar-random pure states on the doubled space and maximizes
    ||((S-T) ⊗ I)(|ψ><ψ|)||_1; a running maximum over trace-norm-1 inputs,
    so it never exceeds the true diamond distance and is nondecreasing in
    the sample count for a fixed stream.
    """
    if sa.shape != sb.shape:
        raise ValueError("superoperators have different shapes")
    d = superop_dim(sa)
    delta = extend_superop(sa - sb)
    rng = substream(seed)
    best = 0.0
    dd = d * d
    for _ in range(samples):
        psi = rng.standard_normal(dd) + 1j * rng.standard_normal(dd)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        out = devectorize(delta @ vectorize(rho))
        best = max(best, schatten_norm(out, 1))
    return best


@dataclass(frozen=True)
class MaxMixedSplit:
    """Convex split 1/d = p σ + (1-p) ω of the maximally mixed state."""

    p: float
    residual: np.ndarray


def max_mixed_split(sigma: np.ndarray) -> MaxMixedSplit:
    """Decompose 1/d = p σ + (1-p) ω with p = 1/(d ||σ||_inf).

    ω mixes the eigenvectors of σ with weights (1 - s_i/||σ||_inf); for
    σ = 1/d the weight is p = 1 and ω degenerates to the maximally mixed
    state (any density works, the residual carries zero weight).
    """
    sigma = np.asarray(sigma, dtype=complex)
    d = sigma.shape[0]
    if not linalg.is_hermitian(sigma) or abs(np.trace(sigma) - 1) > TP_TOL:
        raise ValueError("sigma must be a trace-one Hermitian density matrix")
    spec = linalg.eigh_spectrum(sigma)
    if spec.eigenvalues[-1] < -CHOI_EIG_TOL:
        raise ValueError("sigma must be positive semidefinite")
    s_max = spec.eigenvalues[0]
    p = 1.0 / (d * s_max)
    denom = d - 1.0 / s_max
    if abs(denom) < 1e-14:
        return MaxMixedSplit(p=1.0, residual=np.eye(d, dtype=complex) / d)
    weights = (1.0 - spec.eigenvalues / s_max) / denom
    omega = (spec.eigenvectors * weights) @ dag(spec.eigenvectors)
    return MaxMixedSplit(p=float(p), residual=omega)


def reduced_choi_lower_bounds(
    full_reduced: ChoiState, sigma_norm_inf: float, other_dim: int, probe
) -> float:
    """Lower bound 1 - d_o ||σ||_inf (1 - x) on reduced-Choi overlap/opnorm.

    ``probe`` is either a vector |v) on the doubled space, in which case
    x = (v|Λ|v), or the string "opnorm", in which case x = ||Λ||_inf.  The
    caller compares the returned floor with the directly computed quantity
    for the σ-reduced Choi state.
    """
    if not (0.0 < sigma_norm_inf <= 1.0):
        raise ValueError("sigma_norm_inf must lie in (0, 1]")
    if isinstance(probe, str):
        if probe != "opnorm":
            raise ValueError(f"unknown probe {probe!r}")
        x = full_reduced.opnorm()
    else:
        v = np.asarray(probe, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        x = float(np.real(v.conj() @ full_reduced.matrix @ v))
    return 1.0 - other_dim * sigma_norm_inf * (1.0 - x)


def random_cptp_kraus(d: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random CPTP channel with k Kraus operators (Stinespring isometry slices)."""
    g = rng.standard_normal((k * d, d)) + 1j * rng.standard_normal((k * d, d))
    q, _ = np.linalg.qr(g)
    return [q[i * d : (i + 1) * d, :].copy() for i in range(k)]
