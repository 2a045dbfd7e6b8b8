"""Trace-pairing duality between a matrix algebra and its dual.

A linear functional on M_n is stored as the matrix Y with
f(X) = tr(X Y^t) = Sum_ij X_ij Y_ij, so f(E_ij) = Y_ij and f is positive
exactly when Y is PSD.  The identification is a complete order
isomorphism, which lets every dual object live as an ordinary matrix:
functionals on M_n(M_m) are block elements of Y-blocks, maps carry their
adjoints back to matrix algebras ("flat adjoint"), and the dual-cone
relations between block-positive and separable elements become sign
predictions for the pairing below.

The pairing uses the transpose, not the adjoint; the flat adjoint
therefore differs from the conjugating adjoint usual in quantum
information, and both are exposed under separate names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import cones
from .matcore import (
    BlockElement,
    eig_hermitian,
    is_psd,
    kron,
    partial_transpose_flat,
    scale_of,
    swap_factors,
)

__all__ = [
    "ShapeMismatch",
    "FunctionalMatrix",
    "MatrixMap",
    "gamma",
    "gamma_inv",
    "pair",
    "choi",
    "map_from_choi",
    "flat_adjoint",
    "qi_adjoint",
    "dual_cone_check",
    "DualConeReport",
    "find_blockpositive_witness",
    "sample_qmin",
]


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FunctionalMatrix:
    """The functional f(X) = tr(X Y^t) carried by its matrix Y."""

    matrix: np.ndarray

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        if x.shape != self.matrix.shape:
            raise ShapeMismatch(f"argument shape {x.shape} != carrier shape {self.matrix.shape}")
        return complex(np.sum(x * self.matrix))

    def is_positive(self, tol: float = 1e-9) -> bool:
        return is_psd(self.matrix, tol)[0]


def gamma(y) -> FunctionalMatrix:
    """Matrix -> functional, E_ij -> (the functional picking entry (i,j))."""
    y = np.asarray(y, dtype=complex)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise ShapeMismatch("gamma expects a square matrix")
    return FunctionalMatrix(y.copy())


def gamma_inv(f: FunctionalMatrix) -> np.ndarray:
    return f.matrix.copy()


def pair(f: BlockElement, a: BlockElement) -> complex:
    """Evaluate a block of functionals on a block element: Sum_ij tr(A_ij Y_ij^t).

    Equals the entrywise bilinear sum of the two flat matrices (no
    conjugation), which is what makes the dual-cone sign predictions below
    hold with transposed carriers.
    """
    if (f.n, f.m) != (a.n, a.m):
        raise ShapeMismatch(f"functional block {(f.n, f.m)} vs element block {(a.n, a.m)}")
    return complex(np.sum(f.flat * a.flat))


# ---------------------------------------------------------------------------
# maps between matrix algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixMap:
    """A linear map M_k -> M_m in one of three presentations.

    kind "choi":   data is the Choi block element Sum E_ij (x) phi(E_ij)
    kind "kraus":  data is a list of k x m matrices A_l, phi(X) = Sum A_l* X A_l
    kind "holevo": data is a list of (S_l, P_l); S_l carries the positive
                   functional s_l(X) = tr(X S_l^t) and phi(X) = Sum s_l(X) P_l
    """

    k: int
    m: int
    kind: str
    data: object

    def __post_init__(self):
        if self.kind not in ("choi", "kraus", "holevo"):
            raise ValueError(f"unknown presentation kind {self.kind!r}")

    @classmethod
    def from_choi(cls, block: BlockElement) -> "MatrixMap":
        return cls(block.n, block.m, "choi", block)

    @classmethod
    def from_kraus(cls, k: int, m: int, ops) -> "MatrixMap":
        ops = tuple(np.asarray(o, dtype=complex) for o in ops)
        for o in ops:
            if o.shape != (k, m):
                raise ShapeMismatch(f"kraus factor shape {o.shape}, expected {(k, m)}")
        return cls(k, m, "kraus", ops)

    @classmethod
    def from_holevo(cls, k: int, m: int, terms) -> "MatrixMap":
        out = []
        for s, p in terms:
            s = np.asarray(s, dtype=complex)
            p = np.asarray(p, dtype=complex)
            if s.shape != (k, k) or p.shape != (m, m):
                raise ShapeMismatch("holevo term shapes do not match (k, m)")
            out.append((s, p))
        return cls(k, m, "holevo", tuple(out))

    @classmethod
    def from_action(cls, k: int, m: int, action) -> "MatrixMap":
        """Build the Choi presentation of an arbitrary python callable."""
        blocks = []
        for i in range(k):
            row = []
            for j in range(k):
                e = np.zeros((k, k), dtype=complex)
                e[i, j] = 1.0
                row.append(np.asarray(action(e), dtype=complex))
            blocks.append(row)
        return cls.from_choi(BlockElement.from_blocks(blocks))

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.k, self.k):
            raise ShapeMismatch(f"argument shape {x.shape}, expected {(self.k, self.k)}")
        if self.kind == "choi":
            return np.einsum("ij,iajb->ab", x, self.data.tensor)
        if self.kind == "kraus":
            out = np.zeros((self.m, self.m), dtype=complex)
            for a in self.data:
                out += a.conj().T @ x @ a
            return out
        out = np.zeros((self.m, self.m), dtype=complex)
        for s, p in self.data:
            out += np.sum(x * s) * p
        return out

    def on_basis(self) -> np.ndarray:
        """(k, k, m, m) array of phi(E_ij)."""
        out = np.zeros((self.k, self.k, self.m, self.m), dtype=complex)
        for i in range(self.k):
            for j in range(self.k):
                e = np.zeros((self.k, self.k), dtype=complex)
                e[i, j] = 1.0
                out[i, j] = self.apply(e)
        return out

    def basis_deviation(self, other: "MatrixMap") -> float:
        return float(np.max(np.abs(self.on_basis() - other.on_basis())))


def choi(phi: MatrixMap) -> BlockElement:
    """Choi block element Sum_ij E_ij (x) phi(E_ij) in M_k(M_m)."""
    if phi.kind == "choi":
        return phi.data
    t = phi.on_basis()
    return BlockElement.from_tensor(t)


def map_from_choi(block: BlockElement) -> MatrixMap:
    return MatrixMap.from_choi(block)


def flat_adjoint(phi: MatrixMap) -> MatrixMap:
    """The dual map pulled back through the trace pairing: M_m -> M_k.

    Entrywise, flat_adjoint(phi)(E_ij)[a, b] = phi(E_ab)[i, j]; on the Choi
    matrix this is exactly the factor swap, and the operation is involutive.
    For phi(X) = A X B it gives Y -> A^t Y B^t (transposes, no conjugation).
    """
    return MatrixMap.from_choi(swap_factors(choi(phi)))


def qi_adjoint(phi: MatrixMap) -> MatrixMap:
    """The conjugating Hilbert-Schmidt adjoint (NOT the flat adjoint).

    For phi(X) = A X B this is Y -> A* Y B* with * the conjugate transpose.
    Exposed under its own name to keep the two conventions from being mixed.
    """
    flat = swap_factors(choi(phi))
    return MatrixMap.from_choi(BlockElement(flat.n, flat.m, flat.flat.conj()))


# ---------------------------------------------------------------------------
# dual-cone sampling checks
# ---------------------------------------------------------------------------

def sample_qmin(n: int, m: int, seed: int, terms: int = 3) -> BlockElement:
    """A separable functional block: carrier Sum P_i (x) W_i with PSD factors."""
    rng = np.random.default_rng([seed, n, m, 13])
    flat = np.zeros((n * m, n * m), dtype=complex)
    for _ in range(terms):
        flat += kron(cones.wishart(n, rng), cones.wishart(m, rng))
    return BlockElement(n, m, flat)


@dataclass(frozen=True)
class DualConeReport:
    checked: int
    violations: tuple
    min_pairing: float

    @property
    def ok(self) -> bool:
        return not self.violations


def dual_cone_check(n: int, m: int, samples: int, seed: int, tol: float = 1e-9) -> DualConeReport:
    """Sample the dual-cone sign predictions.

    Separable functionals pair >= 0 against block-positive elements and
    against separable elements; block-positive functional carriers evaluate
    to PSD matrices (f_ij(v)) on PSD arguments v.  Any violation is reported
    with the offending pair.
    """
    if samples <= 0:
        return DualConeReport(0, (), float("inf"))
    violations = []
    min_pairing = float("inf")
    checked = 0
    for s in range(samples):
        f = sample_qmin(n, m, seed=seed * 1000 + s)
        elem, _ = cones.sample_dmax(n, m, terms=3, seed=seed * 2000 + s)
        bp = cones.sample_blockpositive(n, m, seed=seed * 3000 + s)
        for tag, a in (("separable", elem), ("block-positive", bp)):
            val = float(np.real(pair(f, a)))
            min_pairing = min(min_pairing, val)
            checked += 1
            if val < -tol * scale_of(f.flat) * scale_of(a.flat):
                violations.append((tag, s, val))
        # block-positive functional carrier evaluated on a PSD argument
        rng = np.random.default_rng([seed, s, 5])
        carrier = cones.sample_blockpositive(n, m, seed=seed * 4000 + s)
        v = cones.wishart(m, rng)
        fv = np.einsum("iajb,ab->ij", carrier.tensor, v)
        fv = 0.5 * (fv + fv.conj().T)
        checked += 1
        ok, lam = is_psd(fv, tol=1e-8)
        if not ok:
            violations.append(("qmax-evaluation", s, lam))
    return DualConeReport(checked, tuple(violations), min_pairing)


def find_blockpositive_witness(
    a: BlockElement, budget: Optional[cones.SearchBudget] = None
) -> Optional[tuple[BlockElement, float]]:
    """A block-positive functional carrier pairing strictly negatively with `a`.

    Tries the two eigenvalue-based constructions (a negative eigenvector of
    flat(A) gives a PSD carrier; a negative eigenvector of the partial
    transpose gives a PT-of-PSD carrier).  Both carriers are decomposable,
    hence block-positive, and the pairing re-verifies by one inner product.
    Returns None when neither construction applies; witnesses beyond the
    decomposable ones are out of reach of this search.
    """
    a = a.hermitized()
    n, m = a.n, a.m
    ok, lam = is_psd(a.flat)
    if not ok:
        spec = eig_hermitian(a.flat)
        w = spec.eigenvectors[:, 0]
        carrier = np.outer(w, w.conj()).conj()  # Y with tr(A Y^t) = <w, A w>
        y = BlockElement(n, m, carrier)
        return y, float(np.real(pair(y, a)))
    pt = partial_transpose_flat(a.flat, n, m)
    ok, lam = is_psd(pt)
    if not ok:
        spec = eig_hermitian(pt)
        u = spec.eigenvectors[:, 0]
        carrier = partial_transpose_flat(np.outer(u, u.conj()).conj(), n, m)
        y = BlockElement(n, m, carrier)
        return y, float(np.real(pair(y, a)))
    return None
