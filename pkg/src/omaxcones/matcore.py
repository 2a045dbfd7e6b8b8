"""Dense complex-matrix kernel.

Hermitian eigensolving (cyclic Jacobi on the real symmetric embedding),
positivity tests, Kronecker products, block reshaping, partial transpose
and the hermitian tensor decomposition of block matrices.

Conventions, fixed once for the whole package:

* An element of M_n(M_m) ("block element") is stored as its flat
  nm x nm matrix with outer-major indexing: flat[(i,a),(j,b)] is the
  (a,b) entry of block (i,j).  This matches ``kron(A, B)`` placing the
  whole of B inside each scalar entry of A.
* All tolerances are relative to the scale factor (1 + max-abs entry),
  so badly scaled inputs degrade gracefully.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_HERM = 1e-10      # hermiticity slack, times (1 + max |entry|)
EPS_EIG = 1e-11       # eigen residual target, times (1 + max |entry|)
DEFAULT_PSD_TOL = 1e-9

__all__ = [
    "NotHermitian",
    "NoConvergence",
    "Spectrum",
    "BlockElement",
    "eig_hermitian",
    "is_psd",
    "kron",
    "partial_transpose",
    "swap_factors",
    "hermitian_tensor_decompose",
    "psd_split",
    "clip_psd",
]


class NotHermitian(ValueError):
    """Raised when an operation requires a hermitian input and the input is not."""


class NoConvergence(RuntimeError):
    """Raised when the Jacobi sweep budget is exhausted; carries the residual."""

    def __init__(self, residual: float, sweeps: int):
        super().__init__(
            f"jacobi sweeps exhausted after {sweeps} sweeps, off-diagonal residual {residual:.3e}"
        )
        self.residual = residual
        self.sweeps = sweeps


def _as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


def scale_of(a: np.ndarray) -> float:
    """Relative-tolerance scale factor: 1 + max |entry| (1.0 for empty input)."""
    if a.size == 0:
        return 1.0
    return 1.0 + float(np.max(np.abs(a)))


def herm_defect(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    a = _as_complex(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"{what} must be square, got shape {a.shape}")
    if herm_defect(a) > EPS_HERM * scale_of(a):
        raise NotHermitian(f"{what} is not hermitian (defect {herm_defect(a):.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class Spectrum:
    """Full real spectrum of a hermitian matrix.

    eigenvalues are ascending; eigenvectors[:, i] is the (unit) eigenvector
    for eigenvalues[i], phase-normalized so the first non-negligible
    coordinate is real positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def _fix_phase(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > 1e-12 * (1.0 + float(np.max(np.abs(v))))
    idx = int(np.argmax(big)) if big.any() else 0
    piv = v[idx]
    if abs(piv) == 0.0:
        return v
    return v * (abs(piv) / piv)


def _offdiag_norm(m: np.ndarray) -> float:
    # computed entrywise; the difference ||M||_F^2 - ||diag||^2 cancels
    # catastrophically once the matrix is nearly diagonal
    strict = m.copy()
    np.fill_diagonal(strict, 0.0)
    return float(np.linalg.norm(strict))


def _round_robin(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: d-1 rounds of disjoint index pairs covering all pairs."""
    players = list(range(d)) + ([-1] if d % 2 else [])
    k = len(players)
    rounds = []
    order = players[:]
    for _ in range(k - 1):
        ps, qs = [], []
        for i in range(k // 2):
            a, b = order[i], order[k - 1 - i]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps), np.array(qs)))
        order = [order[0]] + [order[-1]] + order[1:-1]
    return rounds


def _jacobi_real_symmetric(m: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix, in place.

    Sweeps follow a round-robin ordering: each round rotates a set of
    index-disjoint pivots simultaneously (their rotations commute exactly,
    so the result equals applying them one after another).  Returns
    (eigenvalues unsorted, accumulated rotation matrix, sweeps used).
    """
    d = m.shape[0]
    v = np.eye(d)
    if d < 2:
        return np.diag(m).copy(), v, 0
    fro = np.linalg.norm(m)
    stop = max(1e-14 * fro, 1e-300)
    rounds = _round_robin(d)
    for sweep in range(max_sweeps):
        off = _offdiag_norm(m)
        if off <= stop:
            return np.diag(m).copy(), v, sweep
        # skip rotations that cannot move the off-norm meaningfully this sweep
        thresh = off / (d * d) * 1e-2
        for ps, qs in rounds:
            apq = m[ps, qs]
            act = np.abs(apq) > thresh
            if not act.any():
                continue
            p_arr = ps[act]
            q_arr = qs[act]
            apq = apq[act]
            tau = (m[q_arr, q_arr] - m[p_arr, p_arr]) / (2.0 * apq)
            sgn = np.where(tau >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cols_p = m[:, p_arr].copy()
            cols_q = m[:, q_arr].copy()
            m[:, p_arr] = c * cols_p - s * cols_q
            m[:, q_arr] = s * cols_p + c * cols_q
            rows_p = m[p_arr, :].copy()
            rows_q = m[q_arr, :].copy()
            m[p_arr, :] = c[:, None] * rows_p - s[:, None] * rows_q
            m[q_arr, :] = s[:, None] * rows_p + c[:, None] * rows_q
            m[p_arr, q_arr] = 0.0
            m[q_arr, p_arr] = 0.0
            vp = v[:, p_arr].copy()
            vq = v[:, q_arr].copy()
            v[:, p_arr] = c * vp - s * vq
            v[:, q_arr] = s * vp + c * vq
    off = _offdiag_norm(m)
    if off <= stop * 10:
        return np.diag(m).copy(), v, max_sweeps
    raise NoConvergence(off, max_sweeps)


def eig_hermitian(h, max_sweeps: int = 60) -> Spectrum:
    """Full spectrum of a hermitian matrix via cyclic Jacobi.

    The n x n hermitian input is embedded as the 2n x 2n real symmetric
    matrix [[Re H, -Im H], [Im H, Re H]]; each eigenvalue of H appears
    twice there, and the complex eigenbasis is recovered by a greedy
    orthonormal selection inside eigenvalue clusters.  Deterministic for
    a fixed input.
    """
    h = require_hermitian(h)
    n = h.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0), dtype=complex), 0)
    if n == 1:
        return Spectrum(np.array([h[0, 0].real]), np.ones((1, 1), dtype=complex), 0)

    a = h.real.copy()
    b = h.imag.copy()
    embed = np.block([[a, -b], [b, a]])
    vals, vecs, sweeps = _jacobi_real_symmetric(embed, max_sweeps)

    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    scale = scale_of(h)
    cluster_gap = 1e-8 * scale
    accepted_vals: list[float] = []
    accepted_vecs: list[np.ndarray] = []

    i = 0
    while i < 2 * n:
        j = i
        while j + 1 < 2 * n and vals[j + 1] - vals[j] <= cluster_gap:
            j += 1
        # real eigenvectors i..j form one eigenvalue cluster; their complex
        # images span a subspace of half the real dimension
        basis: list[np.ndarray] = []
        for k in range(i, j + 1):
            w = vecs[:, k]
            z = w[:n] + 1j * w[n:]
            for e in basis:
                z = z - e * (e.conj() @ z)
            for e in basis:
                z = z - e * (e.conj() @ z)
            nrm = np.linalg.norm(z)
            if nrm > 1e-6:
                basis.append(z / nrm)
        for z in basis:
            lam = float(np.real(z.conj() @ (h @ z)))
            accepted_vals.append(lam)
            accepted_vecs.append(_fix_phase(z))
        i = j + 1

    if len(accepted_vals) != n:
        raise NoConvergence(float("nan"), sweeps)

    order2 = np.argsort(accepted_vals, kind="stable")
    eigenvalues = np.array([accepted_vals[k] for k in order2])
    eigenvectors = np.column_stack([accepted_vecs[k] for k in order2])
    return Spectrum(eigenvalues, eigenvectors, sweeps)


def _eigvals3_hermitian(h: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues (ascending) of a 3 x 3 hermitian matrix, trigonometric form."""
    q = float(np.real(h[0, 0] + h[1, 1] + h[2, 2])) / 3.0
    b = h - q * np.eye(3)
    p2 = float(np.real(np.einsum("ij,ji->", b, b))) / 6.0
    p = np.sqrt(max(p2, 0.0))
    if p <= 0.0:
        return q, q, q
    det = float(
        np.real(
            b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
            - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
            + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
        )
    )
    r = min(max(det / (2.0 * p ** 3), -1.0), 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return lo, 3.0 * q - hi - lo, hi


def fast_extreme_eigpair(h: np.ndarray, largest: bool) -> tuple[np.ndarray, float]:
    """Extreme eigenpair of a small hermitian matrix; closed forms up to 3 x 3.

    Falls back to the Jacobi solver above 3 x 3 or when the extreme
    eigenvalue is (numerically) degenerate.  The deterministic phase
    convention matches eig_hermitian.
    """
    n = h.shape[0]
    if n == 1:
        return np.ones(1, dtype=complex), float(h[0, 0].real)
    if n == 2:
        a = float(h[0, 0].real)
        d = float(h[1, 1].real)
        b = complex(h[0, 1])
        t = 0.5 * (a + d)
        r = float(np.hypot(0.5 * (a - d), abs(b)))
        lam = t + r if largest else t - r
        if abs(b) <= 1e-300:
            idx = (0 if a >= d else 1) if largest else (0 if a <= d else 1)
            v = np.zeros(2, dtype=complex)
            v[idx] = 1.0
            return v, (a if idx == 0 else d)
        v = np.array([b, lam - a], dtype=complex)
        nr = np.linalg.norm(v)
        if nr <= 1e-14 * (1.0 + abs(lam)):
            v = np.array([lam - d, np.conj(b)], dtype=complex)
            nr = np.linalg.norm(v)
        return _fix_phase(v / nr), float(lam)
    if n == 3:
        lo, mid, hi = _eigvals3_hermitian(h)
        lam = hi if largest else lo
        gap = min(abs(lam - mid), abs(hi - lo))
        scale = scale_of(h)
        if gap > 1e-7 * scale:
            m = h - lam * np.eye(3)
            best = None
            best_norm = 0.0
            for r1, r2 in ((m[0], m[1]), (m[0], m[2]), (m[1], m[2])):
                cand = np.array(
                    [
                        r1[1] * r2[2] - r1[2] * r2[1],
                        r1[2] * r2[0] - r1[0] * r2[2],
                        r1[0] * r2[1] - r1[1] * r2[0],
                    ]
                )
                nr = float(np.linalg.norm(cand))
                if nr > best_norm:
                    best, best_norm = cand, nr
            if best_norm > 1e-10 * scale * scale:
                v = best / best_norm
                lam = float(np.real(v.conj() @ (h @ v)))
                return _fix_phase(v), lam
        # fall through to the robust path on degeneracy
    spec = eig_hermitian(h)
    idx = -1 if largest else 0
    return spec.eigenvectors[:, idx], float(spec.eigenvalues[idx])


def is_psd(h, tol: float = DEFAULT_PSD_TOL) -> tuple[bool, float]:
    """Positive-semidefiniteness test.

    Returns (verdict, min eigenvalue); the verdict is
    lambda_min >= -tol * (1 + max|entry|).  Empty matrices are vacuously PSD.
    """
    h = require_hermitian(h)
    if h.shape[0] == 0:
        return True, 0.0
    spec = eig_hermitian(h)
    lam_min = float(spec.eigenvalues[0])
    return lam_min >= -tol * scale_of(h), lam_min


def kron(a, b) -> np.ndarray:
    """Kronecker product, outer-factor major: block (i,j) of a (x) b is a[i,j] * b."""
    return np.kron(_as_complex(a), _as_complex(b))


@dataclass(frozen=True)
class BlockElement:
    """An element of M_n(M_m): n x n grid of m x m blocks, stored flat (nm x nm)."""

    n: int
    m: int
    flat: np.ndarray

    def __post_init__(self):
        f = _as_complex(self.flat)
        if f.shape != (self.n * self.m, self.n * self.m):
            raise ValueError(
                f"flat matrix has shape {f.shape}, expected {(self.n * self.m,) * 2}"
            )
        object.__setattr__(self, "flat", f)

    @classmethod
    def from_blocks(cls, blocks) -> "BlockElement":
        """Build from an n x n nested sequence of m x m matrices."""
        rows = [[_as_complex(blk) for blk in row] for row in blocks]
        n = len(rows)
        m = rows[0][0].shape[0] if n else 0
        flat = np.zeros((n * m, n * m), dtype=complex)
        for i in range(n):
            for j in range(n):
                if rows[i][j].shape != (m, m):
                    raise ValueError("all blocks must share one square shape")
                flat[i * m:(i + 1) * m, j * m:(j + 1) * m] = rows[i][j]
        return cls(n, m, flat)

    @classmethod
    def from_tensor(cls, t: np.ndarray) -> "BlockElement":
        n, m = t.shape[0], t.shape[1]
        return cls(n, m, t.reshape(n * m, n * m))

    @property
    def tensor(self) -> np.ndarray:
        """(n, m, n, m) view: tensor[i, a, j, b] = blocks[i][j][a, b]."""
        return self.flat.reshape(self.n, self.m, self.n, self.m)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.flat[i * self.m:(i + 1) * self.m, j * self.m:(j + 1) * self.m]

    def is_hermitian(self) -> bool:
        return herm_defect(self.flat) <= EPS_HERM * scale_of(self.flat)

    def hermitized(self) -> "BlockElement":
        return BlockElement(self.n, self.m, 0.5 * (self.flat + self.flat.conj().T))

    def adjoint(self) -> "BlockElement":
        return BlockElement(self.n, self.m, self.flat.conj().T)

    def __add__(self, other: "BlockElement") -> "BlockElement":
        return BlockElement(self.n, self.m, self.flat + other.flat)

    def __sub__(self, other: "BlockElement") -> "BlockElement":
        return BlockElement(self.n, self.m, self.flat - other.flat)

    def __rmul__(self, c) -> "BlockElement":
        return BlockElement(self.n, self.m, c * self.flat)


def partial_transpose(b: BlockElement) -> BlockElement:
    """Blockwise transpose: blocks[i][j] -> blocks[i][j]^T.  Involutive."""
    t = b.tensor.transpose(0, 3, 2, 1)
    return BlockElement.from_tensor(t)


def partial_transpose_flat(flat: np.ndarray, n: int, m: int) -> np.ndarray:
    return flat.reshape(n, m, n, m).transpose(0, 3, 2, 1).reshape(n * m, n * m)


def swap_factors(b: BlockElement) -> BlockElement:
    """Exchange the tensor factors: M_n(M_m) -> M_m(M_n), a unitary reshuffle."""
    t = b.tensor.transpose(1, 0, 3, 2)
    return BlockElement(b.m, b.n, t.reshape(b.n * b.m, b.n * b.m))


def psd_split(h) -> tuple[np.ndarray, np.ndarray]:
    """h = plus - minus with both parts PSD (eigenvalue clipping)."""
    h = require_hermitian(h)
    if h.shape[0] == 0:
        return h.copy(), h.copy()
    spec = eig_hermitian(h)
    v = spec.eigenvectors
    pos = np.clip(spec.eigenvalues, 0.0, None)
    neg = np.clip(-spec.eigenvalues, 0.0, None)
    plus = (v * pos) @ v.conj().T
    minus = (v * neg) @ v.conj().T
    return 0.5 * (plus + plus.conj().T), 0.5 * (minus + minus.conj().T)


def clip_psd(h) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped)."""
    return psd_split(h)[0]


def hermitian_tensor_decompose(b: BlockElement) -> list[tuple[np.ndarray, np.ndarray]]:
    """Write a hermitian block element as a sum of hermitian (x) hermitian terms.

    Diagonal blocks contribute E_ii (x) blocks[i][i]; each off-diagonal pair
    (i < j) is split through the PSD decomposition of the block into at most
    four terms (lam * E_ij + conj(lam) * E_ji) (x) w with w PSD.
    """
    if not b.is_hermitian():
        raise NotHermitian("block element is not hermitian")
    n, m = b.n, b.m
    terms: list[tuple[np.ndarray, np.ndarray]] = []
    for i in range(n):
        blk = b.block(i, i)
        if np.any(np.abs(blk) > 0):
            a = np.zeros((n, n), dtype=complex)
            a[i, i] = 1.0
            terms.append((a, 0.5 * (blk + blk.conj().T)))
    for i in range(n):
        for j in range(i + 1, n):
            blk = b.block(i, j)
            if not np.any(np.abs(blk) > 0):
                continue
            h = 0.5 * (blk + blk.conj().T)
            k = 0.5 * (blk - blk.conj().T) / 1j
            for lam, part in ((1.0, h), (1j, k)):
                plus, minus = psd_split(part)
                for coef, w in ((lam, plus), (-lam, minus)):
                    if not np.any(np.abs(w) > 1e-300):
                        continue
                    a = np.zeros((n, n), dtype=complex)
                    a[i, j] = coef
                    a[j, i] = np.conj(coef)
                    terms.append((a, w))
    return terms


def resum_tensor_terms(terms, n: int, m: int) -> BlockElement:
    flat = np.zeros((n * m, n * m), dtype=complex)
    for a, v in terms:
        flat += kron(a, v)
    return BlockElement(n, m, flat)
