"""Dense complex linear algebra for superoperator simulations.

All matrices are numpy ``complex128`` arrays in row-major (C) order.
Vectorization is *row*-vectorization throughout: the rows of a matrix are
concatenated into a column vector.  Column-stacking is deliberately not
provided; mixing the two conventions is the classic source of silent
transposition bugs in Liouville-space code.

Randomness: every random draw in this package goes through :func:`substream`,
which builds a numpy ``Generator`` backed by the named PCG64 bit generator
from an integer key path.  PCG64 is seedable, platform independent, and emits
64-bit words; ``Generator.random`` produces floats by dividing a 53-bit
mantissa by 2**53.  The same key path always yields the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERM_TOL = 1e-10


def substream(*key: int) -> np.random.Generator:
    """Deterministic PCG64 generator for an integer key path.

    ``substream(seed, ordinal)`` and ``substream(seed, ordinal)`` called
    anywhere, in any process, on any platform, produce identical streams;
    distinct key paths produce independent streams (SeedSequence hashing).
    """
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A†)/2."""
    return (a + dag(a)) / 2


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    """Check Hermiticity up to ``tol`` relative to the matrix scale."""
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return bool(np.abs(a - dag(a)).max(initial=0.0) <= tol * scale)


def tensor(*matrices: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor's indices major."""
    out = np.asarray(matrices[0], dtype=complex)
    for m in matrices[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def vectorize(a: np.ndarray) -> np.ndarray:
    """Row-vectorize a square matrix: rows concatenated into a column.

    Equivalent to (A ⊗ 1)|1) with |1) the unnormalized maximally entangled
    vector, and satisfies vec(ABC) = (A ⊗ C^T) vec(B).
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"vectorize expects a square matrix, got shape {a.shape}")
    return a.reshape(-1)


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize` for square targets."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square matrix on ⊗_k C^{dims[k]}.

    ``perm[i] = j`` means output slot ``i`` is input subsystem ``j``.  Row and
    column indices are permuted together.  Every subsystem reshuffle in this
    package (Choi-leg reordering, projector construction) routes through here.
    """
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    m = np.asarray(m, dtype=complex)
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    tens = m.reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    out_dims = [dims[p] for p in perm]
    return tens.transpose(axes).reshape(int(np.prod(out_dims)), -1)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out the complement of ``keep``, preserving kept-subsystem order.

    ``dims`` lists the subsystem dimensions whose product must match the
    matrix dimension; ``keep`` holds indices into ``dims``.
    """
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    m = np.asarray(m, dtype=complex)
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    tens = m.reshape(dims + dims)
    # trace pairs (k, k+n') back to front so axis numbers stay valid
    traced = tens
    removed = 0
    for k in range(n - 1, -1, -1):
        if k in keep:
            continue
        cur = n - removed
        traced = np.trace(traced, axis1=k, axis2=k + cur)
        removed += 1
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return traced.reshape(kept_dim, kept_dim)


def schatten_norm(a: np.ndarray, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}.

    p=1 is the sum of singular values, p=2 the Frobenius norm, p=inf the
    largest singular value.
    """
    a = np.asarray(a, dtype=complex)
    if p == 2:
        return float(np.linalg.norm(a))
    s = np.linalg.svd(a, compute_uv=False)
    if p == 1:
        return float(np.sum(s))
    if p == np.inf or p == "inf":
        return float(s[0]) if s.size else 0.0
    raise ValueError(f"unsupported Schatten order {p!r}")


@dataclass(frozen=True)
class Spectrum:
    """Hermitian eigendecomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, orthonormal, aligned with eigenvalues

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ dag(self.eigenvectors)


def eigh_spectrum(h: np.ndarray, tol: float = HERM_TOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, descending eigenvalues.

    Inputs within ``tol`` of Hermitian are symmetrized first; anything
    further away is rejected.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(hermitize(h))
    order = np.argsort(vals)[::-1]
    return Spectrum(eigenvalues=vals[order].copy(), eigenvectors=vecs[:, order].copy())


def expm_i(h: np.ndarray, t: float) -> np.ndarray:
    """e^{-i t H} for Hermitian H, via eigendecomposition."""
    spec = eigh_spectrum(h)
    phases = np.exp(-1j * t * spec.eigenvalues)
    return (spec.eigenvectors * phases) @ dag(spec.eigenvectors)


def closest_unitary(a: np.ndarray, rank_tol: float = 1e-12) -> np.ndarray:
    """Unitary factor U of the polar decomposition A = U|A|.

    U is the unique minimizer of ||A - V||_2 over unitaries V when A has full
    rank; rank deficiency makes the polar unitary non-unique and is rejected.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"closest_unitary expects a square matrix, got {a.shape}")
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[-1] <= rank_tol:
        raise ValueError("matrix is rank deficient; polar unitary is not unique")
    return u @ vh


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a partial-traced Haar pure state."""
    k = rank if rank is not None else d
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_traceless_hermitian(d: int, seed: int) -> np.ndarray:
    """Generic traceless Hermitian matrix, normalized and rounded.

    Entries get real and imaginary parts uniform in [-1, 1]; the matrix is
    hermitized as A + A†, the trace is subtracted, the operator norm is
    scaled to 1, and every entry is rounded to two decimals.  The rounding
    leaves a trace residue of order 0.01 and an operator norm within a few
    percent of 1.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    rng = substream(seed)
    a = rng.uniform(-1.0, 1.0, (d, d)) + 1j * rng.uniform(-1.0, 1.0, (d, d))
    h = a + dag(a)
    h = h - (np.trace(h) / d) * np.eye(d)
    h = h / schatten_norm(h, np.inf)
    return np.round(h.real, 2) + 1j * np.round(h.imag, 2)
