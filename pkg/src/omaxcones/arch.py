"""Archimedeanization of finitely presented matrix-ordered spaces.

A cone over a real coordinate space (the hermitian part of the underlying
*-vector space in some fixed basis) is presented either by a generator
list or by a membership oracle, together with a distinguished order unit.
The pipeline samples the state space (unital positive functionals) by
cutting-plane linear programming, intersects the state kernels to get the
null space N, quotients by N, and closes each cone level by the r-scan
membership test r.e + A for a decreasing schedule of r.

The r-scan is a semi-decision at finite precision: the schedule bottoms
out at 2^-20 and a cone that fails only below that resolution will pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import lp
from .matcore import eig_hermitian, is_psd, scale_of

__all__ = [
    "EmptyStateSpace",
    "ConeOracle",
    "LexicographicPlane",
    "PsdCone",
    "GeneratedCone",
    "ArchClosureResult",
    "ArchResult",
    "builtin_oracle",
    "hermitian_basis",
    "mat_to_coords",
    "coords_to_mat",
    "psd_cone",
    "lexicographic_cone",
    "compute_states",
    "compute_N",
    "matrix_level",
    "arch_closure_test",
    "archimedeanize",
    "verify_level_kernel",
]

DEFAULT_R_SCHEDULE = tuple(2.0 ** (-k) for k in range(21))
STATE_TOL = 1e-9


class EmptyStateSpace(RuntimeError):
    """No state exists: the unit is not an order unit or the presentation is degenerate."""


# ---------------------------------------------------------------------------
# membership oracles
# ---------------------------------------------------------------------------

class ConeOracle:
    """Membership oracle; treated as exact by everything downstream.

    Subclasses may provide `sample_member` (pseudo-generator sampling) and
    `separating_member` (a cutting plane: given a functional s, return a
    member g with s . g < 0, or None).
    """

    dim: int

    def contains(self, v: np.ndarray) -> bool:
        raise NotImplementedError

    def sample_member(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def separating_member(self, s: np.ndarray) -> Optional[np.ndarray]:
        return None


class LexicographicPlane(ConeOracle):
    """The non-closed plane cone {(x, y): y > 0} union {(x, 0): x >= 0}."""

    dim = 2
    name = "lexicographic2"

    def contains(self, v) -> bool:
        x, y = float(v[0]), float(v[1])
        return y > 0.0 or (y == 0.0 and x >= 0.0)

    def sample_member(self, rng) -> np.ndarray:
        return np.array([rng.standard_normal(), abs(rng.standard_normal()) + 1e-6])

    def separating_member(self, s) -> Optional[np.ndarray]:
        s1, s2 = float(s[0]), float(s[1])
        if s2 < 0.0:
            return np.array([0.0, 1.0])
        if abs(s1) > 1e-300:
            m = min(max(2.0, 2.0 * max(s2, 1.0) / abs(s1)), 1e15)
            cand = np.array([-np.sign(s1) * m, 1.0])
            if s @ cand < -1e-12:
                return cand
        return None


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of the hermitian n x n matrices.

    Order: E_11..E_nn, then for i < j the real pair (E_ij + E_ji)/sqrt(2)
    and the imaginary pair (i E_ij - i E_ji)/sqrt(2).
    """
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = inv
            e[j, i] = inv
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1j * inv
            e[j, i] = -1j * inv
            basis.append(e)
    return basis


def mat_to_coords(m: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    return np.array([float(np.real(np.sum(b.conj() * m))) for b in basis])


def coords_to_mat(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(basis[0])
    for c, b in zip(v, basis):
        out = out + c * b
    return out


class PsdCone(ConeOracle):
    """PSD cone of M_n in hermitian coordinates."""

    def __init__(self, n: int):
        self.n = n
        self.dim = n * n
        self.basis = hermitian_basis(n)
        self.name = f"psd{n}"

    def contains(self, v) -> bool:
        return is_psd(coords_to_mat(np.asarray(v, dtype=float), self.basis))[0]

    def sample_member(self, rng) -> np.ndarray:
        g = (rng.standard_normal((self.n, self.n)) + 1j * rng.standard_normal((self.n, self.n)))
        w = g @ g.conj().T
        return mat_to_coords(0.5 * (w + w.conj().T), self.basis)

    def separating_member(self, s) -> Optional[np.ndarray]:
        rho = coords_to_mat(np.asarray(s, dtype=float), self.basis)
        spec = eig_hermitian(0.5 * (rho + rho.conj().T))
        if spec.eigenvalues[0] < -1e-11 * scale_of(rho):
            w = spec.eigenvectors[:, 0]
            return mat_to_coords(np.outer(w, w.conj()), self.basis)
        return None


_BUILTINS: dict[str, Callable[[], ConeOracle]] = {
    "lexicographic2": LexicographicPlane,
    "psd2": lambda: PsdCone(2),
    "psd3": lambda: PsdCone(3),
}


def builtin_oracle(name: str) -> ConeOracle:
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin oracle {name!r}; have {sorted(_BUILTINS)}")
    return _BUILTINS[name]()


# ---------------------------------------------------------------------------
# the presented cone
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratedCone:
    """Finite-dimensional ordered space presented by generators or an oracle."""

    ambient_dim: int
    unit: np.ndarray
    generators: Optional[np.ndarray] = None  # (count, dim) rows
    oracle: Optional[ConeOracle] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "unit", np.asarray(self.unit, dtype=float))
        if self.generators is not None:
            g = np.atleast_2d(np.asarray(self.generators, dtype=float))
            object.__setattr__(self, "generators", g)
        if self.generators is None and self.oracle is None:
            raise ValueError("a cone needs generators or an oracle")

    def contains(self, v, tol: float = 1e-9) -> bool:
        """Membership; conic-hull LP for generator presentations, else the oracle."""
        v = np.asarray(v, dtype=float)
        if self.oracle is not None:
            return self.oracle.contains(v)
        lam = lp.conic_combination(self.generators.T, v, tol=tol)
        return lam is not None

    def member_pool(self, count: int, seed: int) -> np.ndarray:
        """Members used as LP constraints: generators, or oracle samples."""
        if self.generators is not None:
            return self.generators
        rng = np.random.default_rng([seed, 811, self.ambient_dim])
        rows = [self.oracle.sample_member(rng) for _ in range(count)]
        return np.vstack(rows)

    def find_violated_member(self, s: np.ndarray, pool: np.ndarray) -> Optional[np.ndarray]:
        vals = pool @ s
        idx = int(np.argmin(vals))
        norms = np.linalg.norm(pool, axis=1)
        if vals[idx] < -STATE_TOL * (1.0 + norms[idx]):
            return pool[idx]
        if self.oracle is not None:
            return self.oracle.separating_member(s)
        return None


# ---------------------------------------------------------------------------
# state sampling by cutting-plane LP
# ---------------------------------------------------------------------------

def _objectives(dim: int, count: int, seed: int) -> list[np.ndarray]:
    objs = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        objs.append(e.copy())
        objs.append(-e)
    k = 0
    while len(objs) < count:
        rng = np.random.default_rng([seed, 91, k])
        v = rng.standard_normal(dim)
        objs.append(v / np.linalg.norm(v))
        k += 1
    return objs[:count]


def compute_states(
    cone: GeneratedCone, samples: int = 0, seed: int = 0
) -> list[np.ndarray]:
    """Extreme points of the state space {s : s(unit) = 1, s >= 0 on the cone}.

    Each random linear objective is maximized by LP over a working set of
    member constraints; violated members (from the pool or the oracle's
    separating cut) are added until the optimizer is feasible for the whole
    cone.  Raises EmptyStateSpace when no state exists or the section is
    genuinely unbounded (the unit is not an order unit).
    """
    d = cone.ambient_dim
    n_obj = samples if samples > 0 else 64 * d
    pool = cone.member_pool(count=32 * d, seed=seed)
    working: list[np.ndarray] = [row for row in pool[: min(2 * d, len(pool))]]
    states: list[np.ndarray] = []
    for c in _objectives(d, n_obj, seed):
        found = None
        for _ in range(80):
            res = lp.maximize_over_section(np.vstack(working), cone.unit, c)
            if res.status is lp.LPStatus.INFEASIBLE:
                raise EmptyStateSpace(cone.name or "cone")
            if res.status is lp.LPStatus.UNBOUNDED:
                cut = cone.find_violated_member(res.ray, pool)
                if cut is None:
                    raise EmptyStateSpace(
                        f"{cone.name or 'cone'}: state section unbounded along {res.ray}"
                    )
                working.append(np.asarray(cut, dtype=float))
                continue
            cut = cone.find_violated_member(res.x, pool)
            if cut is not None:
                working.append(np.asarray(cut, dtype=float))
                continue
            found = res.x
            break
        if found is not None:
            states.append(found)
    # dedupe deterministically, preserving first-seen order
    unique: list[np.ndarray] = []
    for s in states:
        if not any(np.max(np.abs(s - u)) <= 1e-7 * (1.0 + np.max(np.abs(u))) for u in unique):
            unique.append(s)
    if not unique:
        raise EmptyStateSpace(cone.name or "cone")
    return unique


def compute_N(
    cone: GeneratedCone,
    samples: int = 0,
    seed: int = 0,
    states: Optional[list[np.ndarray]] = None,
) -> np.ndarray:
    """Basis (rows) of the joint kernel of the sampled states."""
    if states is None:
        states = compute_states(cone, samples=samples, seed=seed)
    stack = np.vstack(states)
    u, sv, vt = np.linalg.svd(stack, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > max(1e-7 * smax, 1e-10)))
    return vt[rank:]


# ---------------------------------------------------------------------------
# matrix levels
# ---------------------------------------------------------------------------

def _psd_frame(n: int) -> list[np.ndarray]:
    """Unit vectors whose rank-one projectors span the hermitian n x n matrices."""
    vecs = []
    eye = np.eye(n, dtype=complex)
    for i in range(n):
        vecs.append(eye[:, i])
    inv = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            vecs.append(inv * (eye[:, i] + eye[:, j]))
            vecs.append(inv * (eye[:, i] + 1j * eye[:, j]))
    return vecs


class _LevelOracle(ConeOracle):
    """Cut machinery for the level-n cone built from element-wise PSD tensor terms.

    A level functional s is admissible when the matrix W(v) with entries
    tr(a W(v)) = s(a (x) v) is PSD for every member v of the base cone; the
    cuts either see a negative eigenvalue of W(v) at a probe member
    directly, or push a compressed functional u* W(.) u down to the base
    cone's own separating cut.
    """

    def __init__(self, base: GeneratedCone, n: int, seed: int = 0):
        self.base = base
        self.n = n
        self.dim = n * n * base.ambient_dim
        self.basis = hermitian_basis(n)
        self.frame = _psd_frame(n)
        self.pool = base.member_pool(count=16 * base.ambient_dim, seed=seed)
        self.name = f"level{n}({base.name})"

    def _coords(self, a: np.ndarray, g: np.ndarray) -> np.ndarray:
        c = np.array([float(np.real(np.sum(b.conj() * a))) for b in self.basis])
        return np.outer(c, g).ravel()

    def sample_member(self, rng) -> np.ndarray:
        v = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
        v /= np.linalg.norm(v)
        if self.base.generators is not None:
            g = self.base.generators[rng.integers(len(self.base.generators))]
        else:
            g = self.base.oracle.sample_member(rng)
        return self._coords(np.outer(v, v.conj()), g)

    def _w_of(self, s_blocks: np.ndarray, g: np.ndarray) -> np.ndarray:
        w = np.zeros((self.n, self.n), dtype=complex)
        for r, b in enumerate(self.basis):
            w = w + float(s_blocks[r] @ g) * b
        return w

    def separating_member(self, s) -> Optional[np.ndarray]:
        d = self.base.ambient_dim
        s_blocks = np.asarray(s, dtype=float).reshape(self.n * self.n, d)
        probes = list(self.pool) + [self.base.unit]
        collected_vecs = list(self.frame)
        for g in probes:
            w = self._w_of(s_blocks, g)
            spec = eig_hermitian(0.5 * (w + w.conj().T))
            if spec.eigenvalues[0] < -1e-10 * (1.0 + scale_of(w)):
                u = spec.eigenvectors[:, 0]
                return self._coords(np.outer(u, u.conj()), g)
            collected_vecs.append(spec.eigenvectors[:, 0])
        for u in collected_vecs:
            uhu = np.array([float(np.real(u.conj() @ (b @ u))) for b in self.basis])
            s_u = uhu @ s_blocks
            g = self.base.find_violated_member(s_u, self.pool)
            if g is not None:
                w = self._w_of(s_blocks, np.asarray(g, dtype=float))
                val = float(np.real(u.conj() @ (w @ u)))
                if val < -1e-12:
                    return self._coords(np.outer(u, u.conj()), np.asarray(g, dtype=float))
        return None


def matrix_level(cone: GeneratedCone, n: int, seed: int = 0) -> GeneratedCone:
    """The level-n matrix cone over a presented base cone.

    Coordinates are r-major blocks: the element Sum_r H_r (x) v_r (H_r the
    orthonormal hermitian basis of M_n) has coordinates concat(v_1..v_{n^2}).
    Generators, when the base has them, are frame-projector tensor base
    generators; the unit is I_n (x) unit.
    """
    oracle = _LevelOracle(cone, n, seed=seed)
    d = cone.ambient_dim
    unit = np.zeros(n * n * d)
    for i in range(n):
        unit[i * d:(i + 1) * d] = cone.unit  # diagonal basis slots carry the unit
    gens = None
    if cone.generators is not None:
        rows = []
        for u in _psd_frame(n):
            for g in cone.generators:
                rows.append(oracle._coords(np.outer(u, u.conj()), g))
        gens = np.vstack(rows)
    return GeneratedCone(n * n * d, unit, generators=gens, oracle=oracle, name=oracle.name)


def verify_level_kernel(
    cone: GeneratedCone, n: int, samples: int = 0, seed: int = 0
) -> tuple[int, int, bool]:
    """Dimension count dim N_level = n^2 dim N, by sampling level states."""
    n1 = compute_N(cone, samples=samples, seed=seed)
    level = matrix_level(cone, n, seed=seed)
    nn = compute_N(level, samples=samples if samples else 24 * level.ambient_dim, seed=seed)
    return len(n1), len(nn), len(nn) == n * n * len(n1)


# ---------------------------------------------------------------------------
# archimedean closure and the full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArchClosureResult:
    passed: bool
    first_failure: Optional[float] = None


def arch_closure_test(
    a: np.ndarray, cone: GeneratedCone, r_schedule: tuple = DEFAULT_R_SCHEDULE
) -> ArchClosureResult:
    """Membership of r.unit + a for every r in the decreasing schedule.

    True means a lies in the archimedean closure as far as the schedule can
    see (a semi-decision: failures below the last r are invisible).
    """
    a = np.asarray(a, dtype=float)
    for r in r_schedule:
        if not cone.contains(r * cone.unit + a):
            return ArchClosureResult(False, float(r))
    return ArchClosureResult(True, None)


class _QuotientOracle(ConeOracle):
    """Membership in the quotient cone: archimedean closure of any lift."""

    def __init__(self, base: GeneratedCone, q_rows: np.ndarray, name: str = ""):
        self.base = base
        self.q = q_rows  # (quotient_dim, d), orthonormal rows
        self.dim = q_rows.shape[0]
        self.name = name or f"arch({base.name})"

    def contains(self, u) -> bool:
        lift = self.q.T @ np.asarray(u, dtype=float)
        return arch_closure_test(lift, self.base).passed

    def sample_member(self, rng) -> np.ndarray:
        if self.base.generators is not None:
            g = self.base.generators[rng.integers(len(self.base.generators))]
        else:
            g = self.base.oracle.sample_member(rng)
        return self.q @ np.asarray(g, dtype=float)

    def separating_member(self, s) -> Optional[np.ndarray]:
        pool = self.base.member_pool(count=16 * self.base.ambient_dim, seed=0)
        g = self.base.find_violated_member(np.asarray(s, dtype=float) @ self.q, pool)
        if g is None:
            return None
        return self.q @ np.asarray(g, dtype=float)


@dataclass(frozen=True)
class ArchResult:
    N_basis: np.ndarray
    quotient_dim: int
    quotient_cone: GeneratedCone
    quotient_unit: np.ndarray
    states: tuple = ()


def archimedeanize(cone: GeneratedCone, samples: int = 0, seed: int = 0) -> ArchResult:
    """Quotient by the joint state kernel, then close with the r-scan.

    The quotient cone tests membership of any lift through arch_closure_test
    against the base presentation; projected generators are attached when the
    base has them.  Sampled states annihilate N by construction, which is the
    operational form of the factorization property of the quotient.
    """
    states = compute_states(cone, samples=samples, seed=seed)
    n_basis = compute_N(cone, states=states)
    d = cone.ambient_dim
    if len(n_basis) == 0:
        q = np.eye(d)
    else:
        _, sv, vt = np.linalg.svd(np.vstack(n_basis), full_matrices=True)
        rank = int(np.sum(sv > 1e-10))
        q = vt[rank:]
    q_unit = q @ cone.unit
    gens = None
    if cone.generators is not None:
        rows = [q @ g for g in cone.generators]
        rows = [r for r in rows if np.max(np.abs(r)) > 1e-12]
        gens = np.vstack(rows) if rows else None
    quotient = GeneratedCone(
        q.shape[0],
        q_unit,
        generators=gens,
        oracle=_QuotientOracle(cone, q),
        name=f"arch({cone.name})" if cone.name else "arch",
    )
    return ArchResult(n_basis, q.shape[0], quotient, q_unit, tuple(states))


# convenience constructors -------------------------------------------------

def lexicographic_cone() -> GeneratedCone:
    o = LexicographicPlane()
    return GeneratedCone(2, np.array([0.0, 1.0]), oracle=o, name="lexicographic2")


def psd_cone(n: int) -> GeneratedCone:
    o = PsdCone(n)
    unit = mat_to_coords(np.eye(n, dtype=complex), o.basis)
    return GeneratedCone(o.dim, unit, oracle=o, name=o.name)
