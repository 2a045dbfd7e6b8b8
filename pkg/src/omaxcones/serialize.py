"""JSON wire formats.

One JSON object per domain type, certificates discriminated by a "kind"
field.  Encoding is deterministic for a fixed object (fixed key order,
floats through repr), which is what makes byte-identical reruns possible.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import arch, cones, duality, ebclass, norms
from .matcore import BlockElement


def _f(x) -> float:
    return float(np.real(x))


def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [[_f(v) for v in row] for row in m.real],
        "im": [[_f(v) for v in row] for row in m.imag],
    }


def decode_matrix(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float).reshape(rows, cols) if rows * cols else np.zeros((rows, cols))
    im = np.asarray(obj["im"], dtype=float).reshape(rows, cols) if rows * cols else np.zeros((rows, cols))
    return re + 1j * im


def encode_vector(v: np.ndarray) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": [_f(x) for x in v.real], "im": [_f(x) for x in v.imag]}


def decode_vector(obj: dict) -> np.ndarray:
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def encode_block(b: BlockElement) -> dict:
    return {"n": b.n, "m": b.m, "flat": encode_matrix(b.flat)}


def decode_block(obj: dict) -> BlockElement:
    return BlockElement(int(obj["n"]), int(obj["m"]), decode_matrix(obj["flat"]))


def encode_map(phi: duality.MatrixMap) -> dict:
    if phi.kind == "choi":
        data: Any = encode_block(phi.data)
    elif phi.kind == "kraus":
        data = [encode_matrix(a) for a in phi.data]
    else:
        data = [{"s": encode_matrix(s), "P": encode_matrix(p)} for s, p in phi.data]
    return {"k": phi.k, "m": phi.m, "kind": phi.kind, "data": data}


def decode_map(obj: dict) -> duality.MatrixMap:
    k, m, kind = int(obj["k"]), int(obj["m"]), obj["kind"]
    if kind == "choi":
        return duality.MatrixMap.from_choi(decode_block(obj["data"]))
    if kind == "kraus":
        return duality.MatrixMap.from_kraus(k, m, [decode_matrix(a) for a in obj["data"]])
    if kind == "holevo":
        terms = [(decode_matrix(t["s"]), decode_matrix(t["P"])) for t in obj["data"]]
        return duality.MatrixMap.from_holevo(k, m, terms)
    raise ValueError(f"unknown map kind {kind!r}")


def encode_cone(c: arch.GeneratedCone) -> dict:
    out: dict = {"dim": c.ambient_dim, "unit": [_f(x) for x in c.unit]}
    if c.oracle is not None and getattr(c.oracle, "name", None) in arch._BUILTINS:
        out["oracle"] = f"builtin:{c.oracle.name}"
    if c.generators is not None:
        out["generators"] = [[_f(x) for x in g] for g in c.generators]
    return out


def decode_cone(obj: dict) -> arch.GeneratedCone:
    dim = int(obj["dim"])
    unit = np.asarray(obj["unit"], dtype=float)
    oracle = None
    if "oracle" in obj:
        name = obj["oracle"]
        if not name.startswith("builtin:"):
            raise ValueError(f"only builtin oracles can be decoded, got {name!r}")
        oracle = arch.builtin_oracle(name.split(":", 1)[1])
    gens = np.asarray(obj["generators"], dtype=float) if "generators" in obj else None
    name = obj.get("oracle", "").split(":", 1)[-1] if "oracle" in obj else ""
    return arch.GeneratedCone(dim, unit, generators=gens, oracle=oracle, name=name)


# -- certificates ------------------------------------------------------------

def encode_certificate(cert) -> dict:
    if isinstance(cert, cones.SeparableDecomposition):
        return {
            "kind": cert.kind,
            "terms": [{"a": encode_matrix(a), "v": encode_matrix(v)} for a, v in cert.terms],
        }
    if isinstance(cert, cones.ProductWitness):
        return {
            "kind": cert.kind,
            "x": encode_vector(cert.x),
            "y": encode_vector(cert.y),
            "value": _f(cert.value),
        }
    if isinstance(cert, cones.PsdFlatCertificate):
        return {"kind": cert.kind, "min_eigenvalue": _f(cert.min_eigenvalue)}
    if isinstance(cert, cones.DecomposableCertificate):
        return {
            "kind": cert.kind,
            "P": encode_matrix(cert.p),
            "Q": encode_matrix(cert.q),
            "residual": _f(cert.residual),
        }
    if isinstance(cert, cones.NegativeEigenvalueCertificate):
        return {
            "kind": cert.kind,
            "eigenvalue": _f(cert.eigenvalue),
            "eigenvector": encode_vector(cert.eigenvector),
        }
    if isinstance(cert, cones.PptViolationCertificate):
        return {
            "kind": cert.kind,
            "eigenvalue": _f(cert.eigenvalue),
            "eigenvector": encode_vector(cert.eigenvector),
        }
    if isinstance(cert, cones.PptSufficiencyCertificate):
        return {
            "kind": cert.kind,
            "ppt_min_eigenvalue": _f(cert.ppt_min_eigenvalue),
            "flat_min_eigenvalue": _f(cert.flat_min_eigenvalue),
            "note": cert.note,
        }
    if isinstance(cert, cones.BudgetReport):
        return {
            "kind": cert.kind,
            "best_product_value": _f(cert.best_product_value),
            "restarts_used": cert.restarts_used,
            "iterations_used": cert.iterations_used,
            "residual": _f(cert.residual),
        }
    raise TypeError(f"cannot encode certificate of type {type(cert).__name__}")


def decode_certificate(obj: dict):
    kind = obj["kind"]
    if kind == "separable-decomposition":
        terms = tuple((decode_matrix(t["a"]), decode_matrix(t["v"])) for t in obj["terms"])
        return cones.SeparableDecomposition(terms)
    if kind == "product-witness":
        return cones.ProductWitness(decode_vector(obj["x"]), decode_vector(obj["y"]), obj["value"])
    if kind == "psd-flat":
        return cones.PsdFlatCertificate(obj["min_eigenvalue"])
    if kind == "decomposable":
        return cones.DecomposableCertificate(
            decode_matrix(obj["P"]), decode_matrix(obj["Q"]), obj["residual"]
        )
    if kind == "negative-eigenvalue":
        return cones.NegativeEigenvalueCertificate(obj["eigenvalue"], decode_vector(obj["eigenvector"]))
    if kind == "ppt-violation":
        return cones.PptViolationCertificate(obj["eigenvalue"], decode_vector(obj["eigenvector"]))
    if kind == "ppt-sufficiency":
        return cones.PptSufficiencyCertificate(
            obj["ppt_min_eigenvalue"], obj["flat_min_eigenvalue"], obj.get("note", "")
        )
    if kind == "budget-report":
        return cones.BudgetReport(
            obj["best_product_value"], obj["restarts_used"], obj["iterations_used"], obj["residual"]
        )
    raise ValueError(f"unknown certificate kind {kind!r}")


def encode_cone_verdict(v: cones.ConeVerdict) -> dict:
    return {
        "status": v.status.value,
        "certificate": encode_certificate(v.certificate),
        "margin": _f(v.margin),
    }


def encode_eb_verdict(v: ebclass.EBVerdict) -> dict:
    certs = {}
    for kind, cert in v.certificates.items():
        if kind == "choi-psd":
            certs[kind] = {"kind": "choi-psd", "min_eigenvalue": _f(cert)}
        elif kind in ("holevo", "rank-one-kraus"):
            certs[kind] = encode_map(cert)
        else:
            certs[kind] = encode_certificate(cert)
    return {
        "status": v.status.value,
        "certificates": certs,
        "cross_checks": [[name, _f(dev)] for name, dev in v.cross_checks],
    }


def encode_norm_report(r: norms.NormReport) -> dict:
    return {
        "value": _f(r.value),
        "method": r.method,
        "iterations": r.iterations,
        "bracket": [_f(r.bracket[0]), _f(r.bracket[1])],
    }


def encode_arch_result(r: arch.ArchResult) -> dict:
    out = {
        "N_basis": [[_f(x) for x in row] for row in np.atleast_2d(r.N_basis)] if len(r.N_basis) else [],
        "quotient_dim": r.quotient_dim,
        "quotient_unit": [_f(x) for x in r.quotient_unit],
        "states": [[_f(x) for x in s] for s in r.states],
    }
    if r.quotient_cone.generators is not None:
        out["quotient_generators"] = [[_f(x) for x in g] for g in r.quotient_cone.generators]
    return out


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"
