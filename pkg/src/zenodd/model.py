"""Bipartite Hamiltonian models: Schmidt split, Pauli basis, decoupling projector.

The two-qubit reference model used by the experiment runner ships as a
literal fixture (:func:`reference_model`): a generic traceless Hermitian
4×4 matrix with entries rounded to two decimals, evolved for a time t chosen
so that t times the generator norm equals one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from . import linalg
from .linalg import dag, tensor, vectorize

TRACE_TOL = 1e-9
IDENTITY_TOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis named by a label like ``"XZ"``."""
    return tensor(*(PAULI[ch] for ch in label))


def schmidt_split(h: np.ndarray, d1: int, d2: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split H = h1 ⊗ 1 + 1 ⊗ h2 + h12 with mutually orthogonal parts.

    h1 = tr2(H)/d2 and h2 = tr1(H)/d1 are the local parts; the remainder h12
    has vanishing partial traces on both factors.  Requires H Hermitian and
    traceless.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match dims ({d1},{d2})")
    if not linalg.is_hermitian(h):
        raise ValueError("Hamiltonian must be Hermitian")
    if abs(np.trace(h)) > TRACE_TOL * max(1.0, float(np.abs(h).max(initial=0.0))):
        raise ValueError("Hamiltonian must be traceless")
    dims = [d1, d2]
    h1 = linalg.partial_trace(h, dims, [0]) / d2
    h2 = linalg.partial_trace(h, dims, [1]) / d1
    h12 = h - tensor(h1, np.eye(d2)) - tensor(np.eye(d1), h2)
    return h1, h2, h12


def pauli_decompose(h: np.ndarray, num_qubits: int) -> dict[str, float]:
    """Real coefficients of a Hermitian operator in the Pauli-string basis.

    coeff(P) = tr(P H) / 2^n; the reconstruction sum coeff(P) P recovers H.
    """
    d = 2**num_qubits
    h = np.asarray(h, dtype=complex)
    if h.shape != (d, d):
        raise ValueError(f"dimension {h.shape} is not 2^{num_qubits}")
    out: dict[str, float] = {}
    for chars in product("IXYZ", repeat=num_qubits):
        label = "".join(chars)
        coeff = complex(np.trace(pauli_string(label) @ h)) / d
        out[label] = float(coeff.real)
    return out


def pauli_reconstruct(coeffs: dict[str, float]) -> np.ndarray:
    """Sum coeff(P) P over the labels present in ``coeffs``."""
    labels = list(coeffs)
    n = len(labels[0])
    acc = np.zeros((2**n, 2**n), dtype=complex)
    for label, c in coeffs.items():
        acc += c * pauli_string(label)
    return acc


def generator_superop(h: np.ndarray) -> np.ndarray:
    """Matrix representation H ⊗ 1 - 1 ⊗ H^T of the commutator [H, •].

    Hermitian whenever H is; its operator norm is the eigenvalue spread
    max(eig H) - min(eig H).
    """
    h = np.asarray(h, dtype=complex)
    if not linalg.is_hermitian(h):
        raise ValueError("generator requires a Hermitian Hamiltonian")
    d = h.shape[0]
    eye = np.eye(d)
    return tensor(h, eye) - tensor(eye, h.T)


def projector_d(d1: int, d2: int) -> np.ndarray:
    """Group-average projector (1/d1)|1_1)(1_1| ⊗ I_22' as a superoperator.

    Acting on vec(ρ) it produces vec((1_1/d1) ⊗ tr1 ρ).  Built on the leg
    grouping (1, 1', 2, 2') and permuted into the storage order (1, 2, 1', 2').
    """
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    v1 = vectorize(np.eye(d1))
    grouped = tensor(np.outer(v1, v1.conj()) / d1, np.eye(d2 * d2))
    return linalg.permute_subsystems(grouped, [d1, d1, d2, d2], [0, 2, 1, 3])


@dataclass(frozen=True)
class BipartiteModel:
    """Hamiltonian on d1 x d2 with its Schmidt split and evolution time.

    ``big_t`` is the dimensionless product t * ||generator||_inf; all the
    analytic bounds depend on the model only through it.
    """

    d1: int
    d2: int
    h: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h12: np.ndarray
    t: float
    gen: np.ndarray
    gen_norm: float

    @property
    def big_t(self) -> float:
        return self.t * self.gen_norm

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    @cached_property
    def gen_spectrum(self) -> linalg.Spectrum:
        """Eigendecomposition of the generator, shared by all step evolutions."""
        return linalg.eigh_spectrum(self.gen)


def make_model(h: np.ndarray, d1: int, d2: int, t: float | None = None) -> BipartiteModel:
    """Build a model from a traceless Hermitian H; t defaults to 1/||Ĥ||_inf.

    The default time normalizes big_t to exactly 1, matching the convention
    used for all reference experiments.
    """
    h = np.asarray(h, dtype=complex)
    h1, h2, h12 = schmidt_split(h, d1, d2)
    gen = generator_superop(h)
    eigs = np.linalg.eigvalsh(linalg.hermitize(h))
    gen_norm = float(eigs[-1] - eigs[0])
    if t is None:
        t = 1.0 / gen_norm if gen_norm > 1e-14 else 1.0
    return BipartiteModel(
        d1=d1, d2=d2, h=h, h1=h1, h2=h2, h12=h12, t=float(t), gen=gen, gen_norm=gen_norm
    )


def zeno_generator(model: BipartiteModel, tol: float = IDENTITY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Projected generator D̂ Ĥ D̂ together with its bath form (I_1 ⊗ Ĥ_2) D̂.

    The two expressions agree identically; a mismatch beyond tolerance
    signals a split or leg-ordering bug, so it raises rather than returns.
    """
    dproj = projector_d(model.d1, model.d2)
    sandwich = dproj @ model.gen @ dproj
    bath_gen = generator_superop(tensor(np.eye(model.d1), model.h2))
    bath_form = bath_gen @ dproj
    gap = linalg.schatten_norm(sandwich - bath_form, np.inf)
    if gap > tol * max(1.0, model.gen_norm):
        raise ValueError(f"projected-generator identity violated by {gap:.3e}")
    return sandwich, bath_form


# Two-qubit reference Hamiltonian (entries exact two-decimal literals).
REFERENCE_H = np.array(
    [
        [-0.10, -0.03 - 0.35j, -0.22 - 0.36j, 0.13 + 0.21j],
        [-0.03 + 0.35j, -0.29, 0.20 + 0.27j, -0.02 - 0.04j],
        [-0.22 + 0.36j, 0.20 - 0.27j, -0.33, 0.30 + 0.40j],
        [0.13 - 0.21j, -0.02 + 0.04j, 0.30 - 0.40j, 0.72],
    ],
    dtype=complex,
)


def reference_model() -> BipartiteModel:
    """The fixed two-qubit reference model with big_t = 1."""
    return make_model(REFERENCE_H, 2, 2)


def _format_entry(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    sign = "+" if im >= 0 else "-"
    return f"{re!r}{sign}{abs(im)!r}j"


def save_matrix_txt(path, m: np.ndarray) -> None:
    """Write a complex matrix as one row per line, ``re+imj`` entries."""
    m = np.asarray(m, dtype=complex)
    lines = [" ".join(_format_entry(z) for z in row) for row in m]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix_txt(path) -> np.ndarray:
    """Parse the plain-text matrix format written by :func:`save_matrix_txt`."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([complex(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"no matrix rows found in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in {path}")
    return np.array(rows, dtype=complex)
