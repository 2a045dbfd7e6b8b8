"""Command-line front end.

JSON in, JSON out (or a text rendering of the same object), deterministic
for identical configuration and input.  Exit codes: 0 definitive verdict,
2 undetermined, 1 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import arch, cones, duality, ebclass, norms, selftest, serialize
from .cones import MemberStatus, SearchBudget
from .ebclass import EBStatus
from .matcore import is_psd, partial_transpose_flat, scale_of


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-8
    restarts: int = 64
    iterations: int = 10_000
    output: str = "-"
    format: str = "json"

    @property
    def budget(self) -> SearchBudget:
        return SearchBudget(seed=self.seed, restarts=self.restarts, iterations=self.iterations)


def _add_common(p: argparse.ArgumentParser, needs_input: bool = True):
    if needs_input:
        p.add_argument("input", nargs="?", default=None, help="input JSON path, or - for stdin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--output", default="-", help="output path, default stdout")
    p.add_argument("--emit-certificates", default=None, metavar="PATH",
                   help="also write a verifiable bundle (input + result) to PATH")
    p.add_argument("--verify", default=None, metavar="PATH",
                   help="re-verify a previously emitted bundle by direct evaluation only")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omaxcones")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("cone-min-test", "cone-max-test"):
        sp = sub.add_parser(name, help=f"{name} on a block element JSON")
        _add_common(sp)
    sp = sub.add_parser("classify", help="entanglement-breaking classification of a map JSON")
    _add_common(sp)
    sp = sub.add_parser("norm", help="order/min/dec norm of a matrix JSON")
    _add_common(sp)
    sp.add_argument("--kind", choices=("order", "min", "dec"), required=True)
    sp = sub.add_parser("flat", help="flat adjoint of a map JSON")
    _add_common(sp)
    sp.add_argument("--qi-adjoint", action="store_true",
                    help="emit the conjugating adjoint instead (labeled; not the flat adjoint)")
    sp = sub.add_parser("dual-verify", help="sampled dual-cone sign checks")
    _add_common(sp, needs_input=False)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--samples", type=int, default=100)
    sp = sub.add_parser("arch", help="archimedeanize a presented cone JSON")
    _add_common(sp)
    sp.add_argument("--samples", type=int, default=0)
    sp = sub.add_parser("selftest", help="run the bundled acceptance mirror")
    _add_common(sp, needs_input=False)
    sp.add_argument("--full", action="store_true", help="full sample counts")
    sp = sub.add_parser("batch", help="run a JSON manifest of jobs")
    _add_common(sp)
    return p


def _read_input(path):
    if path is None:
        raise SystemExit2("missing input (pass a path or '-')")
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as e:
        raise SystemExit2(str(e))
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SystemExit2(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")


class SystemExit2(Exception):
    """Usage/input error carrying a message (mapped to exit code 1)."""


def _render_text(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(_render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            lines.append(pad + "[" + ", ".join(str(v) for v in obj) + "]")
        else:
            for v in obj:
                lines.append(_render_text(v, indent + 1))
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def _emit(result: dict, cfg: RunConfig):
    text = serialize.dumps(result) if cfg.format == "json" else _render_text(result) + "\n"
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w") as f:
            f.write(text)


def _emit_bundle(path: str, command: str, input_obj, result: dict):
    with open(path, "w") as f:
        f.write(serialize.dumps({"command": command, "input": input_obj, "result": result}))


# ---------------------------------------------------------------------------
# certificate re-verification (direct evaluations only, no searches)
# ---------------------------------------------------------------------------

def _verify_cone_bundle(bundle) -> list[str]:
    elem = serialize.decode_block(bundle["input"])
    res = bundle["result"]
    cert = serialize.decode_certificate(res["certificate"])
    problems = []
    scale = scale_of(elem.flat)
    if isinstance(cert, cones.ProductWitness):
        val = cert.evaluate(elem)
        if abs(val - cert.value) > 1e-10 * scale:
            problems.append(f"witness value drifted: {val} vs {cert.value}")
        if val >= 0:
            problems.append("witness value is not negative")
    elif isinstance(cert, cones.NegativeEigenvalueCertificate):
        val = cert.evaluate(elem)
        if abs(val - cert.eigenvalue) > 1e-8 * scale or val >= 0:
            problems.append(f"negative-eigenvalue check failed: {val} vs {cert.eigenvalue}")
    elif isinstance(cert, cones.PptViolationCertificate):
        val = cert.evaluate(elem)
        if abs(val - cert.eigenvalue) > 1e-8 * scale or val >= 0:
            problems.append(f"ppt-violation check failed: {val} vs {cert.eigenvalue}")
    elif isinstance(cert, cones.SeparableDecomposition):
        if not cert.factors_psd():
            problems.append("a decomposition factor is not PSD")
        resid = cert.residual(elem)
        if resid > 1e-8 * (1 + np.linalg.norm(elem.flat)):
            problems.append(f"decomposition re-sum residual {resid:.3e}")
    elif isinstance(cert, cones.DecomposableCertificate):
        if not (is_psd(cert.p)[0] and is_psd(cert.q)[0]):
            problems.append("decomposable certificate parts are not PSD")
        gap = np.linalg.norm(elem.flat - cert.p - partial_transpose_flat(cert.q, elem.n, elem.m))
        if gap > 1e-7 * scale:
            problems.append(f"decomposable certificate gap {gap:.3e}")
    elif isinstance(cert, cones.PsdFlatCertificate):
        ok, lam = is_psd(elem.flat)
        if not ok or abs(lam - cert.min_eigenvalue) > 1e-8 * scale:
            problems.append("psd-flat certificate does not re-verify")
    elif isinstance(cert, cones.PptSufficiencyCertificate):
        if elem.n * elem.m > cones.PPT_EXACT_LIMIT:
            problems.append("ppt-sufficiency used above its dimension limit")
        ok1, _ = is_psd(elem.flat)
        ok2, _ = is_psd(partial_transpose_flat(elem.flat, elem.n, elem.m))
        if not (ok1 and ok2):
            problems.append("ppt-sufficiency preconditions fail")
    return problems


def _verify_classify_bundle(bundle) -> list[str]:
    phi = serialize.decode_map(bundle["input"])
    res = bundle["result"]
    problems = []
    c = duality.choi(phi)
    certs = res["certificates"]
    for kind, obj in certs.items():
        if kind == "choi-psd":
            ok, lam = is_psd(0.5 * (c.flat + c.flat.conj().T))
            if not ok:
                problems.append("choi-psd recorded but the Choi matrix is not PSD")
        elif kind in ("negative-eigenvalue", "ppt-violation"):
            cert = serialize.decode_certificate(obj)
            val = cert.evaluate(c)
            if val >= 0 or abs(val - cert.eigenvalue) > 1e-8 * scale_of(c.flat):
                problems.append(f"{kind} does not re-verify ({val} vs {cert.eigenvalue})")
        elif kind == "separable-choi":
            dec = serialize.decode_certificate(obj)
            if not dec.factors_psd():
                problems.append("separable-choi factor not PSD")
            resid = dec.residual(c)
            if resid > 1e-7 * (1 + np.linalg.norm(c.flat)):
                problems.append(f"separable-choi residual {resid:.3e}")
        elif kind in ("holevo", "rank-one-kraus"):
            form = serialize.decode_map(obj)
            dev = form.basis_deviation(phi)
            if dev > 1e-8 * scale_of(c.flat):
                problems.append(f"{kind} deviates from the map by {dev:.3e}")
    return problems


def verify_bundle(bundle) -> list[str]:
    cmd = bundle.get("command")
    if cmd in ("cone-min-test", "cone-max-test"):
        return _verify_cone_bundle(bundle)
    if cmd == "classify":
        return _verify_classify_bundle(bundle)
    if cmd == "norm":
        res = bundle["result"]
        lo, hi = res["bracket"]
        return [] if lo - 1e-12 <= res["value"] <= hi + 1e-12 else ["value outside bracket"]
    return [f"bundle command {cmd!r} has no verifier"]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _run_cone(command: str, input_obj, cfg: RunConfig):
    elem = serialize.decode_block(input_obj)
    if command == "cone-min-test":
        verdict = cones.min_cone_test(elem, cfg.budget)
    else:
        verdict = cones.max_cone_test(elem, cfg.budget, want_decomposition=True)
    code = 2 if verdict.status is MemberStatus.UNDETERMINED else 0
    return serialize.encode_cone_verdict(verdict), code


def _run_classify(input_obj, cfg: RunConfig):
    phi = serialize.decode_map(input_obj)
    verdict = ebclass.classify(phi, cfg.budget)
    code = 2 if verdict.status is EBStatus.UNDETERMINED else 0
    return serialize.encode_eb_verdict(verdict), code


def _run_norm(input_obj, kind: str, cfg: RunConfig):
    v = serialize.decode_matrix(input_obj)
    if kind == "order":
        rep = norms.order_norm(v)
    elif kind == "min":
        rep = norms.min_norm(v, tol=cfg.tol)
    else:
        rep = norms.dec_norm(v, tol=cfg.tol, budget=cfg.budget)
    return serialize.encode_norm_report(rep), 0


def _run_flat(input_obj, qi: bool, cfg: RunConfig):
    phi = serialize.decode_map(input_obj)
    out = duality.qi_adjoint(phi) if qi else duality.flat_adjoint(phi)
    result = serialize.encode_map(out)
    result["convention"] = "conjugating-adjoint" if qi else "flat-adjoint"
    return result, 0


def _run_dual_verify(n: int, m: int, samples: int, cfg: RunConfig):
    rep = duality.dual_cone_check(n, m, samples, seed=cfg.seed)
    result = {
        "checked": rep.checked,
        "violations": [list(v) for v in rep.violations],
        "min_pairing": rep.min_pairing,
        "ok": rep.ok,
    }
    return result, 0


def _run_arch(input_obj, samples: int, cfg: RunConfig):
    cone = serialize.decode_cone(input_obj)
    res = arch.archimedeanize(cone, samples=samples, seed=cfg.seed)
    return serialize.encode_arch_result(res), 0


def run_job(command: str, input_obj, cfg: RunConfig, extra: dict):
    if command in ("cone-min-test", "cone-max-test"):
        return _run_cone(command, input_obj, cfg)
    if command == "classify":
        return _run_classify(input_obj, cfg)
    if command == "norm":
        return _run_norm(input_obj, extra.get("kind", "order"), cfg)
    if command == "flat":
        return _run_flat(input_obj, bool(extra.get("qi_adjoint")), cfg)
    if command == "dual-verify":
        return _run_dual_verify(
            int(extra.get("n", 2)), int(extra.get("m", 2)), int(extra.get("samples", 100)), cfg
        )
    if command == "arch":
        return _run_arch(input_obj, int(extra.get("samples", 0)), cfg)
    raise SystemExit2(f"unknown command {command!r}")


def _run_batch(input_obj, cfg: RunConfig):
    if not isinstance(input_obj, list):
        raise SystemExit2("batch manifest must be a JSON array of jobs")
    workers = int(os.environ.get("OMAXCONES_THREADS", "0")) or min(4, os.cpu_count() or 1)

    def one(job):
        try:
            if "seed" not in job:
                raise SystemExit2("batch jobs must carry an explicit seed")
            jcfg = RunConfig(
                seed=int(job["seed"]),
                tol=float(job.get("tol", cfg.tol)),
                restarts=int(job.get("restarts", cfg.restarts)),
                iterations=int(job.get("iterations", cfg.iterations)),
            )
            result, code = run_job(job["command"], job.get("input"), jcfg, job)
            return {"ok": True, "undetermined": code == 2, "result": result}
        except (SystemExit2, ValueError, KeyError, TypeError) as e:
            return {"ok": False, "error": str(e)}

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, input_obj))
    counts = {
        "ok": sum(1 for r in results if r["ok"]),
        "error": sum(1 for r in results if not r["ok"]),
        "undetermined": sum(1 for r in results if r.get("undetermined")),
    }
    return {"jobs": results, "counts": counts}, 0


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    cfg = RunConfig(
        seed=getattr(args, "seed", 0),
        tol=getattr(args, "tol", 1e-8),
        restarts=getattr(args, "restarts", 64),
        iterations=getattr(args, "iterations", 10_000),
        output=getattr(args, "output", "-"),
        format=getattr(args, "format", "json"),
    )
    try:
        if getattr(args, "verify", None):
            bundle = _read_input(args.verify)
            problems = verify_bundle(bundle)
            _emit({"verified": not problems, "problems": problems}, cfg)
            return 0 if not problems else 1

        if args.command == "selftest":
            report = selftest.run_selftest(
                seed=cfg.seed, full=bool(getattr(args, "full", False)),
                log=lambda line: print(line, file=sys.stderr),
            )
            _emit(report, cfg)
            return 0 if report["all_passed"] else 1

        if args.command == "batch":
            manifest = _read_input(args.input)
            result, code = _run_batch(manifest, cfg)
            _emit(result, cfg)
            return code

        input_obj = None
        if args.command not in ("dual-verify",):
            input_obj = _read_input(args.input)
        extra = {
            "kind": getattr(args, "kind", None),
            "qi_adjoint": getattr(args, "qi_adjoint", False),
            "n": getattr(args, "n", 2),
            "m": getattr(args, "m", 2),
            "samples": getattr(args, "samples", 0),
        }
        result, code = run_job(args.command, input_obj, cfg, extra)
        if getattr(args, "emit_certificates", None):
            _emit_bundle(args.emit_certificates, args.command, input_obj, result)
        _emit(result, cfg)
        return code
    except SystemExit2 as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
