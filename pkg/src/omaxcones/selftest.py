"""Bundled self-check suite, a scaled-down mirror of the acceptance tests.

Deterministic for a fixed seed; `full=True` restores the full sample counts
(the pytest acceptance module always runs those).  Returns a plain dict so
the CLI can emit byte-identical JSON for identical configurations.
"""

from __future__ import annotations

import numpy as np

from . import cones, duality, ebclass, norms, serialize
from .arch import archimedeanize, lexicographic_cone, psd_cone, verify_level_kernel
from .cones import MemberStatus, SearchBudget
from .duality import MatrixMap, choi, flat_adjoint, pair
from .ebclass import EBStatus, classify
from .matcore import BlockElement, eig_hermitian, is_psd, kron, partial_transpose


def _e(i, j, n):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def _maximally_entangled(n):
    flat = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            flat += kron(_e(i, j, n), _e(i, j, n))
    return BlockElement(n, n, flat)


def _swap(n):
    flat = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            flat += kron(_e(i, j, n), _e(j, i, n))
    return BlockElement(n, n, flat)


def _singlet():
    psi = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    return BlockElement(2, 2, np.outer(psi, psi.conj()))


def identity_map(n):
    return MatrixMap.from_action(n, n, lambda x: x)


def depolarizing_map(n):
    eye = np.eye(n, dtype=complex)
    return MatrixMap.from_action(n, n, lambda x: np.trace(x) * eye / n)


def dephasing_map(n):
    return MatrixMap.from_action(n, n, lambda x: np.diag(np.diag(x)))


def _crit_eb_ground_truth(seed, scale):
    budget = SearchBudget(seed=seed)
    v_id = classify(identity_map(2), budget)
    ok = v_id.status is EBStatus.CP_NOT_EB
    ppt = v_id.certificate("ppt-violation")
    ok = ok and ppt is not None and abs(ppt.eigenvalue + 1.0) <= 1e-9
    detail = [f"identity: {v_id.status.value}, ppt eigenvalue {ppt.eigenvalue if ppt else None}"]
    for name, phi in (("depolarizing", depolarizing_map(2)), ("dephasing", dephasing_map(2))):
        v = classify(phi, budget)
        forms = all(v.certificate(k) is not None for k in ("separable-choi", "holevo", "rank-one-kraus"))
        devs = max((d for _, d in v.cross_checks), default=float("inf"))
        ok = ok and v.status is EBStatus.EB and forms and devs <= 1e-8
        detail.append(f"{name}: {v.status.value}, max form deviation {devs:.2e}")
    return ok, "; ".join(detail)


def _crit_flat_adjoint(seed, scale):
    rng = np.random.default_rng([seed, 2])
    count = max(10, int(100 * scale))
    worst = 0.0
    for _ in range(count):
        k, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        a = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
        b = rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))
        phi = MatrixMap.from_action(k, m, lambda x: a @ x @ b)
        flat = flat_adjoint(phi)
        expected = MatrixMap.from_action(m, k, lambda y: a.T @ y @ b.T)
        worst = max(worst, flat.basis_deviation(expected))
        worst = max(worst, flat_adjoint(flat).basis_deviation(phi))
    return worst <= 1e-12, f"{count} random bilateral maps, worst deviation {worst:.2e}"


def _crit_duality(seed, scale):
    count = max(30, int(500 * scale))
    worst = np.inf
    bad = 0
    for s in range(count):
        f = duality.sample_qmin(2, 2, seed=seed * 37 + s)
        a = cones.sample_blockpositive(2, 2, seed=seed * 53 + s)
        val = float(np.real(pair(f, a)))
        worst = min(worst, val)
        if val < -1e-9:
            bad += 1
    swap_fun = _swap(2)
    singlet = _singlet()
    witness_val = float(np.real(pair(swap_fun, singlet)))
    ok = bad == 0 and witness_val < -0.5
    return ok, f"{count} pairs, min pairing {worst:.2e}; entangled-vs-swap pairing {witness_val:.3f}"


def _crit_diagonal_collapse(seed, scale):
    rng = np.random.default_rng([seed, 4])
    count = max(20, int(200 * scale))
    budget = SearchBudget(seed=seed)
    agree = 0
    for _ in range(count):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2, 5))
        slots = [cones.random_hermitian(n, rng) for _ in range(m)]
        if rng.random() < 0.5:  # half the instances genuinely positive
            slots = [s @ s.conj().T for s in slots]
        blocks = [
            [np.diag([slots[t][i, j] for t in range(m)]) for j in range(n)]
            for i in range(n)
        ]
        elem = BlockElement.from_blocks(blocks).hermitized()
        pointwise = all(is_psd(0.5 * (s + s.conj().T))[0] for s in slots)
        vmin = cones.min_cone_test(elem, budget)
        vmax = cones.max_cone_test(elem, budget)
        want = MemberStatus.MEMBER if pointwise else MemberStatus.NOT_MEMBER
        if vmin.status is want and vmax.status is want:
            agree += 1
    return agree == count, f"{agree}/{count} diagonal instances agree with the pointwise test"


def _crit_norm_chain(seed, scale):
    rng = np.random.default_rng([seed, 5])
    count = max(20, int(300 * scale))
    ok = True
    details = []
    for _ in range(count):
        n = int(rng.integers(2, 4))
        v = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        mn = norms.min_norm(v)
        dn = norms.dec_norm(v)
        if not (mn.value <= dn.bracket[1] + 1e-6 and dn.bracket[0] <= 2 * mn.bracket[1] + 1e-6):
            ok = False
            details.append(f"chain violated: m={mn.value}, dec bracket={dn.bracket}")
            break
    h = cones.random_hermitian(3, np.random.default_rng([seed, 55]))
    on = norms.order_norm(h)
    mn = norms.min_norm(h)
    dn = norms.dec_norm(h, tol=1e-9)
    herm_ok = abs(mn.value - on.value) <= 1e-8 and abs(dn.value - on.value) <= 1e-8
    e12 = norms.min_norm(_e(0, 1, 2))
    e12_ok = abs(e12.value - 0.5) <= 1e-6
    ok = ok and herm_ok and e12_ok
    details.append(f"{count} chain checks; hermitian agreement {herm_ok}; corner-unit radius {e12.value:.7f}")
    return ok, "; ".join(details)


def _crit_separable_soundness(seed, scale):
    budget = SearchBudget(seed=seed)
    count = max(3, int(12 * scale))
    ok = True
    details = []
    for s in range(count):
        n = 2 + (s % 2)
        elem, _ = cones.sample_dmax(n, n, terms=min(8, 2 + s % 7), seed=seed * 91 + s)
        v = cones.max_cone_test(elem, budget, want_decomposition=True)
        good = (
            v.status is MemberStatus.MEMBER
            and isinstance(v.certificate, cones.SeparableDecomposition)
            and v.certificate.residual(elem) <= 1e-8 * (1 + np.linalg.norm(elem.flat))
        )
        ok = ok and good
    details.append(f"{count} sampled separable elements re-certified")
    me = _maximally_entangled(2)
    v = cones.max_cone_test(me, budget)
    ok = ok and v.status is MemberStatus.NOT_MEMBER
    details.append(f"entangled projector: {v.status.value}")
    confirmed = 0
    trials = max(4, int(20 * scale))
    for s in range(trials):
        m = 2 if s % 2 == 0 else 3
        rng = np.random.default_rng([seed, 6, s])
        while True:
            rho = cones.wishart(2 * m, rng)
            elem = BlockElement(2, m, rho)
            pt = cones.partial_transpose_flat(rho, 2, m)
            if is_psd(pt)[0]:
                break
        v = cones.max_cone_test(elem, budget)
        if v.status is not MemberStatus.MEMBER:
            ok = False
        res = cones.decompose_separable(
            elem, iterations=2000, tol=(1e-8 * (1 + np.linalg.norm(rho))) ** 2, seed=seed
        )
        if res.converged:
            confirmed += 1
    frac = confirmed / trials
    ok = ok and frac >= 0.95
    details.append(f"search confirmed {confirmed}/{trials} PPT-positive instances")
    return ok, "; ".join(details)


def _crit_archimedeanization(seed, scale):
    lex = lexicographic_cone()
    res = archimedeanize(lex, samples=24, seed=seed)
    n_ok = len(res.N_basis) == 1 and abs(abs(res.N_basis[0][0]) - 1.0) <= 1e-6 and abs(res.N_basis[0][1]) <= 1e-6
    q_ok = res.quotient_dim == 1
    sign = np.sign(res.quotient_unit[0])
    cone_ok = res.quotient_cone.contains(np.array([0.5 * sign])) and not res.quotient_cone.contains(
        np.array([-0.5 * sign])
    )
    d1, d2, count_ok = verify_level_kernel(lex, 2, samples=32, seed=seed)
    psd = psd_cone(2)
    resp = archimedeanize(psd, samples=24, seed=seed)
    rng = np.random.default_rng([seed, 7])
    fixed = len(resp.N_basis) == 0 and resp.quotient_dim == 4
    for _ in range(max(4, int(12 * scale))):
        v = psd.oracle.sample_member(rng) - 0.3 * psd.unit
        fixed = fixed and (resp.quotient_cone.contains(v) == psd.contains(v))
    ok = n_ok and q_ok and cone_ok and count_ok and fixed
    return ok, (
        f"plane cone: kernel dim {len(res.N_basis)}, quotient dim {res.quotient_dim}; "
        f"level-2 kernel {d2} = 4 x {d1}: {count_ok}; psd cone fixed point: {fixed}"
    )


def _crit_determinism(seed, scale):
    def run_once():
        budget = SearchBudget(seed=seed)
        elem, dec = cones.sample_dmax(2, 2, terms=3, seed=seed)
        v = cones.max_cone_test(elem, budget, want_decomposition=True)
        verdict = classify(depolarizing_map(2), budget)
        bundle = {
            "cone": serialize.encode_cone_verdict(v),
            "classify": serialize.encode_eb_verdict(verdict),
        }
        return serialize.dumps(bundle)
    a, b = run_once(), run_once()
    return a == b, f"two identical runs produced {'identical' if a == b else 'DIFFERENT'} JSON ({len(a)} bytes)"


CRITERIA = (
    ("eb-ground-truth", _crit_eb_ground_truth),
    ("flat-adjoint", _crit_flat_adjoint),
    ("duality-sampling", _crit_duality),
    ("diagonal-collapse", _crit_diagonal_collapse),
    ("norm-chain", _crit_norm_chain),
    ("separable-soundness", _crit_separable_soundness),
    ("archimedeanization", _crit_archimedeanization),
    ("determinism", _crit_determinism),
)


def run_selftest(seed: int = 0, full: bool = False, log=None) -> dict:
    scale = 1.0 if full else 0.1
    criteria = []
    all_passed = True
    for name, fn in CRITERIA:
        passed, detail = fn(seed, scale)
        criteria.append({"name": name, "passed": bool(passed), "detail": detail})
        all_passed = all_passed and passed
        if log is not None:
            log(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return {"seed": seed, "full": full, "criteria": criteria, "all_passed": bool(all_passed)}
