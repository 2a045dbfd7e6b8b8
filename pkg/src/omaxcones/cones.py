"""Membership tests for the two distinguished cones in M_n(M_m).

* minimal cone = block-positive elements: <x (x) y, A (x (x) y)> >= 0 for all
  vectors x, y ("min_cone_test");
* maximal cone = separable elements: conic combinations of PSD (x) PSD
  ("max_cone_test", "decompose_separable").

Every verdict carries a certificate that re-verifies by direct evaluation
(an eigensolve, an inner product, or a re-summation) without re-running
the search.  Membership in either cone is undecidable-in-practice beyond
small sizes, so Undetermined is a first-class outcome.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matcore
from .matcore import (
    BlockElement,
    DEFAULT_PSD_TOL,
    NotHermitian,
    clip_psd,
    eig_hermitian,
    is_psd,
    kron,
    partial_transpose_flat,
    scale_of,
)

__all__ = [
    "SearchBudget",
    "MemberStatus",
    "ConeVerdict",
    "ProductWitness",
    "SeparableDecomposition",
    "PsdFlatCertificate",
    "DecomposableCertificate",
    "NegativeEigenvalueCertificate",
    "PptViolationCertificate",
    "PptSufficiencyCertificate",
    "BudgetReport",
    "NotPSD",
    "min_cone_test",
    "max_cone_test",
    "decompose_separable",
    "sample_dmax",
    "sample_blockpositive",
    "to_conjugation_form",
    "from_conjugation_form",
    "wishart",
    "random_hermitian",
]

# PPT is an exact separability criterion up to this flat dimension
# (2x2 and 2x3 systems); a standard fact imported from outside the
# cone constructions themselves, flagged as such in certificates.
PPT_EXACT_LIMIT = 6


class NotPSD(ValueError):
    """Input to the decomposition search is not positive semidefinite."""


@dataclass(frozen=True)
class SearchBudget:
    """Knobs for the heuristic searches; identical budgets give identical runs."""

    seed: int = 0
    restarts: int = 64
    iterations: int = 10_000
    tol: float = 1e-10  # squared Frobenius distance target for the decomposition search

    def with_seed(self, seed: int) -> "SearchBudget":
        return SearchBudget(seed, self.restarts, self.iterations, self.tol)


class MemberStatus(enum.Enum):
    MEMBER = "Member"
    NOT_MEMBER = "NotMember"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ProductWitness:
    """Unit vectors x, y with <x (x) y, A (x (x) y)> = value < 0."""

    kind = "product-witness"
    x: np.ndarray
    y: np.ndarray
    value: float

    def evaluate(self, a: BlockElement) -> float:
        xy = np.kron(self.x, self.y)
        return float(np.real(xy.conj() @ (a.flat @ xy)))


@dataclass(frozen=True)
class SeparableDecomposition:
    """Terms (a_l, v_l), both PSD, with sum of a_l (x) v_l equal to the element."""

    kind = "separable-decomposition"
    terms: tuple

    def resum(self, n: int, m: int) -> BlockElement:
        flat = np.zeros((n * m, n * m), dtype=complex)
        for a, v in self.terms:
            flat += kron(a, v)
        return BlockElement(n, m, flat)

    def residual(self, target: BlockElement) -> float:
        diff = self.resum(target.n, target.m).flat - target.flat
        return float(np.linalg.norm(diff))

    def factors_psd(self, tol: float = DEFAULT_PSD_TOL) -> bool:
        return all(is_psd(a, tol)[0] and is_psd(v, tol)[0] for a, v in self.terms)


@dataclass(frozen=True)
class PsdFlatCertificate:
    kind = "psd-flat"
    min_eigenvalue: float


@dataclass(frozen=True)
class DecomposableCertificate:
    """flat(A) = P + partial_transpose(Q) with P, Q PSD (certifies block-positivity)."""

    kind = "decomposable"
    p: np.ndarray
    q: np.ndarray
    residual: float


@dataclass(frozen=True)
class NegativeEigenvalueCertificate:
    """flat(A) itself has a negative eigenvalue; eigenvector sees it directly."""

    kind = "negative-eigenvalue"
    eigenvalue: float
    eigenvector: np.ndarray

    def evaluate(self, a: BlockElement) -> float:
        w = self.eigenvector
        return float(np.real(w.conj() @ (a.flat @ w)))


@dataclass(frozen=True)
class PptViolationCertificate:
    """partial_transpose(flat(A)) has a negative eigenvalue."""

    kind = "ppt-violation"
    eigenvalue: float
    eigenvector: np.ndarray

    def evaluate(self, a: BlockElement) -> float:
        w = self.eigenvector
        pt = partial_transpose_flat(a.flat, a.n, a.m)
        return float(np.real(w.conj() @ (pt @ w)))


@dataclass(frozen=True)
class PptSufficiencyCertificate:
    kind = "ppt-sufficiency"
    ppt_min_eigenvalue: float
    flat_min_eigenvalue: float
    note: str = (
        "PSD + PPT is exact for flat dimension <= 6; external standard fact, "
        "not part of the cone constructions"
    )


@dataclass(frozen=True)
class BudgetReport:
    kind = "budget-report"
    best_product_value: float
    restarts_used: int
    iterations_used: int
    residual: float


@dataclass(frozen=True)
class ConeVerdict:
    status: MemberStatus
    certificate: object
    margin: float


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

def wishart(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """PSD sample G G* with G a (dim x rank) complex gaussian matrix."""
    r = dim if rank is None else rank
    g = (rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))) / np.sqrt(2.0)
    w = g @ g.conj().T
    return 0.5 * (w + w.conj().T)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    return _unit(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def sample_dmax(n: int, m: int, terms: int, seed: int) -> tuple[BlockElement, SeparableDecomposition]:
    """Reproducible conic combination of Wishart PSD factor pairs."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    rng = np.random.default_rng([seed, n, m, terms])
    pairs = []
    for _ in range(terms):
        pairs.append((wishart(n, rng), wishart(m, rng)))
    dec = SeparableDecomposition(tuple(pairs))
    return dec.resum(n, m), dec


def sample_blockpositive(n: int, m: int, seed: int) -> BlockElement:
    """Block-positive sample P + partial_transpose(Q), P and Q PSD."""
    rng = np.random.default_rng([seed, n, m, 77])
    p = wishart(n * m, rng)
    q = wishart(n * m, rng)
    flat = p + partial_transpose_flat(q, n, m)
    return BlockElement(n, m, flat)


# ---------------------------------------------------------------------------
# see-saw over product vectors
# ---------------------------------------------------------------------------

def _extreme_vector(h: np.ndarray, largest: bool) -> tuple[np.ndarray, float]:
    return matcore.fast_extreme_eigpair(h, largest)


def _seesaw_once(tensor, x, y, largest: bool, iters: int = 25):
    """Alternating eigenvector updates for <x (x) y, A (x (x) y)>."""
    val = None
    for _ in range(iters):
        c = np.einsum("a,iajb,b->ij", y.conj(), tensor, y)
        c = 0.5 * (c + c.conj().T)
        x, _ = _extreme_vector(c, largest)
        b = np.einsum("i,iajb,j->ab", x.conj(), tensor, x)
        b = 0.5 * (b + b.conj().T)
        y, new_val = _extreme_vector(b, largest)
        if val is not None and abs(new_val - val) <= 1e-10 * (1.0 + abs(new_val)):
            val = new_val
            break
        val = new_val
    return x, y, float(val)


def _product_extremum(
    a: BlockElement,
    largest: bool,
    restarts: int,
    seed: int,
    warm: Optional[tuple[np.ndarray, np.ndarray]] = None,
    stop_when=None,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Best product value over unit x, y with deterministic restart merging.

    Restart k draws its start from rng([seed, k]); results merge by
    (value, restart index), so any execution order gives the same answer.
    """
    tensor = a.tensor
    n, m = a.n, a.m
    results = []
    used = 0
    starts: list[tuple[np.ndarray, np.ndarray]] = []
    if warm is not None:
        starts.append(warm)
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        starts.append((_random_unit(n, rng), _random_unit(m, rng)))
    for idx, (x0, y0) in enumerate(starts):
        x, y, val = _seesaw_once(tensor, x0, y0, largest)
        results.append((val, idx, x, y))
        used = idx + 1
        if stop_when is not None and stop_when(val):
            break
    if largest:
        best = max(results, key=lambda r: (r[0], -r[1]))
    else:
        best = min(results, key=lambda r: (r[0], r[1]))
    val, _, x, y = best
    # re-evaluate directly so the reported value is certificate-grade
    xy = np.kron(x, y)
    val = float(np.real(xy.conj() @ (a.flat @ xy)))
    return x, y, val, used


# ---------------------------------------------------------------------------
# decomposability search (P + partial_transpose(Q) feasibility)
# ---------------------------------------------------------------------------

def _decomposable_split(a: BlockElement, iterations: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Alternating projections onto {(P,Q): P + PT(Q) = flat} and PSD x PSD.

    Returns (P, Q, residual); residual is the Frobenius gap of the affine
    constraint after the final PSD projection.
    """
    f = a.flat
    n, m = a.n, a.m
    p = clip_psd(f)
    q = np.zeros_like(f)
    residual = np.inf
    for _ in range(iterations):
        r = f - p - partial_transpose_flat(q, n, m)
        residual = float(np.linalg.norm(r))
        if residual <= 1e-10 * scale_of(f):
            break
        p = clip_psd(p + 0.5 * r)
        q = clip_psd(q + 0.5 * partial_transpose_flat(r, n, m))
    r = f - p - partial_transpose_flat(q, n, m)
    return p, q, float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# minimal cone (block-positivity)
# ---------------------------------------------------------------------------

def min_cone_test(a: BlockElement, budget: SearchBudget = SearchBudget()) -> ConeVerdict:
    """Three-valued block-positivity test with certificates.

    NotMember comes with a product witness (single inner product re-check);
    Member holds under one of two exact sufficient conditions: flat(A) PSD,
    or flat(A) = P + PT(Q) with P, Q PSD.  Otherwise Undetermined with the
    best (most negative) product value found.
    """
    if not a.is_hermitian():
        raise NotHermitian("min_cone_test requires a hermitian block element")
    a = a.hermitized()
    scale = scale_of(a.flat)
    wit_tol = DEFAULT_PSD_TOL * scale

    ok, lam_min = is_psd(a.flat)
    if ok:
        return ConeVerdict(MemberStatus.MEMBER, PsdFlatCertificate(lam_min), lam_min)

    # quick witness probe before the heavier feasibility search
    x, y, val, used = _product_extremum(
        a, largest=False, restarts=min(6, budget.restarts), seed=budget.seed,
        stop_when=lambda v: v < -wit_tol,
    )
    if val < -wit_tol:
        return ConeVerdict(MemberStatus.NOT_MEMBER, ProductWitness(x, y, val), val)

    p, q, residual = _decomposable_split(a, min(budget.iterations, 2000))
    if residual <= 1e-8 * scale and is_psd(p)[0] and is_psd(q)[0]:
        return ConeVerdict(
            MemberStatus.MEMBER, DecomposableCertificate(p, q, residual), -residual
        )

    x, y, val, used2 = _product_extremum(
        a, largest=False, restarts=budget.restarts, seed=budget.seed,
        stop_when=lambda v: v < -wit_tol,
    )
    if val < -wit_tol:
        return ConeVerdict(MemberStatus.NOT_MEMBER, ProductWitness(x, y, val), val)

    report = BudgetReport(val, used + used2, 0, residual)
    return ConeVerdict(MemberStatus.UNDETERMINED, report, val)


# ---------------------------------------------------------------------------
# Gilbert-style separable decomposition
# ---------------------------------------------------------------------------

def _embed_real(h: np.ndarray) -> np.ndarray:
    # Frobenius-isometric real coordinates for hermitian matrices
    return np.concatenate([h.real.ravel(), h.imag.ravel()])


def _nnls(
    g: np.ndarray, b: np.ndarray, max_iter: int = 200, warm: Optional[np.ndarray] = None
) -> np.ndarray:
    """Lawson-Hanson style nonnegative least squares, small and deterministic.

    `warm` seeds the passive set (columns expected active), which makes the
    repeated refits of a slowly growing system nearly free.
    """
    n_cols = g.shape[1]
    passive = np.zeros(n_cols, dtype=bool)
    x = np.zeros(n_cols)
    if warm is not None and warm.size:
        passive[: warm.size] = warm > 0.0
        if passive.any():
            cols = np.where(passive)[0]
            sol, *_ = np.linalg.lstsq(g[:, cols], b, rcond=None)
            if np.all(sol > 0.0):
                x[cols] = sol
            else:
                passive[:] = False
                x[:] = 0.0
    for _ in range(max_iter):
        grad = g.T @ (b - g @ x)
        candidates = np.where(~passive)[0]
        if candidates.size == 0:
            break
        j = candidates[np.argmax(grad[candidates])]
        if grad[j] <= 1e-12 * (1.0 + np.linalg.norm(b)):
            break
        passive[j] = True
        while True:
            cols = np.where(passive)[0]
            sol, *_ = np.linalg.lstsq(g[:, cols], b, rcond=None)
            if np.all(sol > 0.0):
                x = np.zeros(n_cols)
                x[cols] = sol
                break
            # step toward sol until the first passive coordinate hits zero
            cur = x[cols]
            neg = sol <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, cur / (cur - sol), np.inf)
            alpha = float(np.min(ratios))
            x_new = np.zeros(n_cols)
            x_new[cols] = cur + alpha * (sol - cur)
            x = np.clip(x_new, 0.0, None)
            passive = x > 0.0
            if not passive.any():
                return np.zeros(n_cols)
    return x


@dataclass(frozen=True)
class DecompositionResult:
    decomposition: Optional[SeparableDecomposition]
    distance: float
    iterations: int
    converged: bool


def decompose_separable(
    a: BlockElement,
    iterations: int = 10_000,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 64,
) -> DecompositionResult:
    """Greedy conditional-gradient search for a PSD (x) PSD decomposition.

    At each step the product state x x* (x) y y* maximizing the overlap with
    the current residual is found by see-saw (restarts on the first step,
    warm starts after), added to the active set, and all conic coefficients
    are refit by nonnegative least squares.  Terminates when the squared
    Frobenius distance to the conic hull drops below tol.

    Raises NotPSD when flat(A) is not PSD: every separable element is PSD,
    so such inputs are outside the cone a fortiori and rejecting them avoids
    answering a different question.
    """
    if not a.is_hermitian():
        raise NotHermitian("decompose_separable requires a hermitian block element")
    a = a.hermitized()
    ok, lam_min = is_psd(a.flat)
    if not ok:
        raise NotPSD(f"flat part has negative eigenvalue {lam_min:.3e}")

    n, m = a.n, a.m
    target = _embed_real(a.flat)
    norm_a = float(np.linalg.norm(a.flat))
    if norm_a == 0.0:
        return DecompositionResult(SeparableDecomposition(()), 0.0, 0, True)

    factors: list[tuple[np.ndarray, np.ndarray]] = []
    columns: list[np.ndarray] = []
    coeffs = np.zeros(0)
    warm: Optional[tuple[np.ndarray, np.ndarray]] = None
    dist_sq = float(target @ target)

    for it in range(iterations):
        if dist_sq <= tol:
            break
        approx = np.zeros_like(target)
        for c, col in zip(coeffs, columns):
            approx += c * col
        resid_flat = a.flat - _unembed(approx, n, m)
        r_block = BlockElement(n, m, 0.5 * (resid_flat + resid_flat.conj().T))
        n_restarts = restarts if it == 0 else max(2, restarts // 32)
        x, y, val, _ = _product_extremum(
            r_block, largest=True, restarts=n_restarts, seed=seed + 101 * it, warm=warm
        )
        if val <= 1e-13 * (1.0 + norm_a):
            break
        warm = (x, y)
        factors.append((x, y))
        columns.append(_embed_real(kron(np.outer(x, x.conj()), np.outer(y, y.conj()))))
        g = np.column_stack(columns)
        coeffs = _nnls(g, target, warm=coeffs)
        keep = coeffs > 1e-14 * max(1.0, float(np.max(coeffs)))
        factors = [f for f, k in zip(factors, keep) if k]
        columns = [c for c, k in zip(columns, keep) if k]
        coeffs = coeffs[keep]
        gap = target - np.column_stack(columns) @ coeffs if columns else target
        dist_sq = float(gap @ gap)
    else:
        it = iterations

    converged = dist_sq <= tol
    if not converged:
        return DecompositionResult(None, float(np.sqrt(max(dist_sq, 0.0))), it + 1, False)
    terms = tuple(
        (c * np.outer(x, x.conj()), np.outer(y, y.conj()))
        for c, (x, y) in zip(coeffs, factors)
    )
    return DecompositionResult(
        SeparableDecomposition(terms), float(np.sqrt(max(dist_sq, 0.0))), it + 1, True
    )


def _unembed(vec: np.ndarray, n: int, m: int) -> np.ndarray:
    d = n * m
    return vec[: d * d].reshape(d, d) + 1j * vec[d * d:].reshape(d, d)


# ---------------------------------------------------------------------------
# maximal cone (separability)
# ---------------------------------------------------------------------------

def _diagonal_slots(a: BlockElement) -> Optional[list[np.ndarray]]:
    """If every block is diagonal, return the per-slot n x n matrices, else None."""
    t = a.tensor
    n, m = a.n, a.m
    off = t.copy()
    for s in range(m):
        off[:, s, :, s] = 0.0
    if np.max(np.abs(off)) > 1e-12 * scale_of(a.flat):
        return None
    return [np.ascontiguousarray(t[:, s, :, s]) for s in range(m)]


def max_cone_test(
    a: BlockElement,
    budget: SearchBudget = SearchBudget(),
    want_decomposition: bool = False,
) -> ConeVerdict:
    """Three-valued separability test with certificates.

    Pipeline: flat PSD check, PPT check, then (flat dimension <= 6) the
    exact PPT-sufficiency shortcut or (above that) the decomposition
    search.  `want_decomposition` forces the search even when the shortcut
    already decides membership, so callers needing an explicit
    decomposition certificate can ask for one.
    """
    if not a.is_hermitian():
        raise NotHermitian("max_cone_test requires a hermitian block element")
    a = a.hermitized()
    scale = scale_of(a.flat)
    n, m = a.n, a.m

    slots = _diagonal_slots(a)
    if slots is not None:
        return _max_cone_diagonal(a, slots)

    ok, lam_min = is_psd(a.flat)
    if not ok:
        spec = eig_hermitian(a.flat)
        cert = NegativeEigenvalueCertificate(lam_min, spec.eigenvectors[:, 0])
        return ConeVerdict(MemberStatus.NOT_MEMBER, cert, lam_min)

    pt = partial_transpose_flat(a.flat, n, m)
    ppt_ok, ppt_min = is_psd(pt)
    if not ppt_ok:
        spec = eig_hermitian(pt)
        cert = PptViolationCertificate(ppt_min, spec.eigenvectors[:, 0])
        return ConeVerdict(MemberStatus.NOT_MEMBER, cert, ppt_min)

    margin = min(lam_min, ppt_min)
    if n * m <= PPT_EXACT_LIMIT and not want_decomposition:
        cert = PptSufficiencyCertificate(ppt_min, lam_min)
        return ConeVerdict(MemberStatus.MEMBER, cert, margin)

    member_tol = 1e-9 * (1.0 + float(np.linalg.norm(a.flat)))
    result = decompose_separable(
        a,
        iterations=budget.iterations,
        tol=member_tol ** 2,
        seed=budget.seed,
        restarts=budget.restarts,
    )
    if result.converged:
        return ConeVerdict(MemberStatus.MEMBER, result.decomposition, margin)

    if n * m <= PPT_EXACT_LIMIT:
        cert = PptSufficiencyCertificate(ppt_min, lam_min)
        return ConeVerdict(MemberStatus.MEMBER, cert, margin)

    report = BudgetReport(float("nan"), budget.restarts, result.iterations, result.distance)
    return ConeVerdict(MemberStatus.UNDETERMINED, report, -result.distance)


def _max_cone_diagonal(a: BlockElement, slots: list[np.ndarray]) -> ConeVerdict:
    """Exact fast path when every block is diagonal (commutative inner algebra).

    The element is Sum_s A(s) (x) E_ss, so membership reduces to the slot
    matrices A(s) being PSD, and the decomposition is explicit.
    """
    n, m = a.n, a.m
    worst = (0.0, None)
    terms = []
    for s, slot in enumerate(slots):
        slot = 0.5 * (slot + slot.conj().T)
        ok, lam = is_psd(slot)
        if not ok:
            spec = eig_hermitian(slot)
            x = spec.eigenvectors[:, 0]
            w = np.zeros(n * m, dtype=complex)
            for i in range(n):
                w[i * m + s] = x[i]
            cert = NegativeEigenvalueCertificate(lam, w)
            return ConeVerdict(MemberStatus.NOT_MEMBER, cert, lam)
        if np.any(np.abs(slot) > 0):
            e = np.zeros((m, m), dtype=complex)
            e[s, s] = 1.0
            terms.append((clip_psd(slot), e))
        if worst[1] is None or lam < worst[0]:
            worst = (lam, s)
    dec = SeparableDecomposition(tuple(terms))
    return ConeVerdict(MemberStatus.MEMBER, dec, worst[0])


# ---------------------------------------------------------------------------
# conjugation-form rewriting of decompositions
# ---------------------------------------------------------------------------

def to_conjugation_form(dec: SeparableDecomposition) -> tuple[np.ndarray, list[np.ndarray]]:
    """Rewrite Sum a_l (x) v_l as alpha diag(v_1..v_q) alpha*.

    Each PSD a_l is split into rank-one pieces lam w w*; column sqrt(lam) w
    of alpha carries one diagonal slot v_l.
    """
    cols = []
    diag = []
    for a, v in dec.terms:
        spec = eig_hermitian(a)
        for lam, k in zip(spec.eigenvalues, range(a.shape[0])):
            if lam <= 1e-12 * scale_of(a):
                continue
            cols.append(np.sqrt(lam) * spec.eigenvectors[:, k])
            diag.append(np.array(v, dtype=complex))
    if not cols:
        return np.zeros((0, 0), dtype=complex), []
    return np.column_stack(cols), diag


def from_conjugation_form(alpha: np.ndarray, diag: list[np.ndarray]) -> SeparableDecomposition:
    """Inverse rewriting: column i of alpha gives the term (alpha_i alpha_i*, v_i)."""
    terms = []
    for i, v in enumerate(diag):
        col = alpha[:, i]
        terms.append((np.outer(col, col.conj()), np.array(v, dtype=complex)))
    return SeparableDecomposition(tuple(terms))
