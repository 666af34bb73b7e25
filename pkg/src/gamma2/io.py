"""Structure files (JSON in) and reports (JSON / CSV out).

A structure file is ``{"n": int, "format": ..., "payload": ...}`` with
format one of

``components``
    list of ``{"i", "j", "k", "l", "value"}`` (0-based).  Each entry is
    expanded to all eight images under block antisymmetry and pair symmetry,
    so any one representative per orbit is enough.
``kn_sum``
    list of ``{"weight", "a", "b"}`` with symmetric matrices ``a``, ``b``;
    the structure is the weighted sum of Kulkarni-Nomizu products.
``model``
    ``{"kind": "sphere", "p", "r"}``, ``{"kind": "space_form", "p", "kappa"}``,
    ``{"kind": "flat", "p"}``, ``{"kind": "product", "factors": [...]}`` or
    ``{"kind": "canonical_variation", "fiber": F, "base": F, "t"}`` with
    ``F = {"dim", "kind", "value"}``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .double_forms import CurvatureStructure, bianchi_project, kulkarni_nomizu, subsets
from .model_spaces import Factor, ProductSpec, canonical_variation, flat, product, space_form, sphere

LOAD_TOL = 1e-9


class StructureParseError(ValueError):
    """Malformed structure file (CLI exit code 2)."""


class SymmetryError(ValueError):
    """Structure violates the curvature symmetries (CLI exit code 3)."""


def _orbit(i, j, k, l):
    yield (i, j, k, l), 1.0
    yield (j, i, k, l), -1.0
    yield (i, j, l, k), -1.0
    yield (j, i, l, k), 1.0
    yield (k, l, i, j), 1.0
    yield (l, k, i, j), -1.0
    yield (k, l, j, i), -1.0
    yield (l, k, j, i), 1.0


def _from_components(n, entries) -> CurvatureStructure:
    t = np.zeros((n, n, n, n))
    seen = np.zeros((n, n, n, n), dtype=bool)
    for e in entries:
        try:
            idx = tuple(int(e[key]) for key in "ijkl")
            v = float(e["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureParseError(f"bad component entry {e!r}") from exc
        if not all(0 <= x < n for x in idx):
            raise StructureParseError(f"index out of range in {e!r}")
        for slot, sgn in _orbit(*idx):
            if seen[slot] and abs(t[slot] - sgn * v) > LOAD_TOL * max(1.0, abs(v)):
                raise SymmetryError(
                    f"component {slot} given inconsistently: {t[slot]} vs {sgn * v}")
            if slot[0] == slot[1] or slot[2] == slot[3]:
                if v != 0:
                    raise SymmetryError(f"component {idx} violates antisymmetry")
                continue
            t[slot] = sgn * v
            seen[slot] = True
    R = bianchi_project(t)
    resid = float(np.abs(R.tensor() - t).max())
    if resid > LOAD_TOL * max(1.0, float(np.abs(t).max())):
        raise SymmetryError(f"first Bianchi identity violated: projection residual {resid:.3e}")
    return R


def _from_kn_sum(n, terms) -> CurvatureStructure:
    total = CurvatureStructure(n, np.zeros((len(subsets(n, 2)),) * 2))
    for term in terms:
        try:
            w = float(term.get("weight", 1.0))
            a = np.array(term["a"], dtype=float)
            b = np.array(term["b"], dtype=float)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise StructureParseError(f"bad kn_sum term {term!r}") from exc
        for m in (a, b):
            if m.shape != (n, n):
                raise StructureParseError(f"matrix shape {m.shape} != ({n}, {n})")
            if np.abs(m - m.T).max() > LOAD_TOL * max(1.0, np.abs(m).max()):
                raise SymmetryError("kn_sum matrices must be symmetric")
        total = total + kulkarni_nomizu(a, b) * w
    return total


def _factor(d) -> Factor:
    try:
        return Factor(int(d["dim"]), d.get("kind", "sphere"), float(d.get("value", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureParseError(f"bad factor {d!r}: {exc}") from exc


def model_structure(m) -> CurvatureStructure | int:
    try:
        kind = m["kind"]
        if kind == "sphere":
            return sphere(int(m["p"]), float(m.get("r", 1.0)))
        if kind == "space_form":
            return space_form(int(m["p"]), float(m["kappa"]))
        if kind == "flat":
            p = int(m["p"])
            return p if p == 1 else flat(p)
        if kind == "product":
            return product(*[model_structure(f) for f in m["factors"]])
        if kind == "canonical_variation":
            spec = ProductSpec(_factor(m["fiber"]), _factor(m["base"]), float(m.get("t", 1.0)))
            return canonical_variation(spec)
    except StructureParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureParseError(f"bad model {m!r}: {exc}") from exc
    raise StructureParseError(f"unknown model kind {m.get('kind')!r}")


def structure_from_dict(doc: dict) -> CurvatureStructure:
    if not isinstance(doc, dict):
        raise StructureParseError("structure file must hold a JSON object")
    try:
        n = int(doc["n"])
        fmt = doc["format"]
        payload = doc["payload"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureParseError("structure file needs 'n', 'format' and 'payload'") from exc
    if not 3 <= n <= 12:
        raise StructureParseError(f"n={n} outside 3..12")
    if fmt == "components":
        R = _from_components(n, payload)
    elif fmt == "kn_sum":
        R = _from_kn_sum(n, payload)
    elif fmt == "model":
        R = model_structure(payload)
        if isinstance(R, int):
            raise StructureParseError("a model must have dimension >= 2")
    else:
        raise StructureParseError(f"unknown format {fmt!r}")
    if R.n != n:
        raise StructureParseError(f"declared n={n} but structure has dimension {R.n}")
    return R


def load_structure(path) -> tuple[CurvatureStructure, str]:
    """Load a structure file; returns the structure and the SHA-256 of the
    raw file bytes."""
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise StructureParseError(f"{path}: not valid JSON ({exc})") from exc
    return structure_from_dict(doc), hashlib.sha256(raw).hexdigest()


def structure_to_dict(R: CurvatureStructure) -> dict:
    """Components format, one representative per symmetry orbit."""
    pairs = subsets(R.n, 2)
    entries = []
    for a, (i, j) in enumerate(pairs):
        for b in range(a, len(pairs)):
            v = float(R.coeffs[a, b])
            if v != 0.0:
                k, l = pairs[b]
                entries.append({"i": i, "j": j, "k": k, "l": l, "value": v})
    return {"n": R.n, "format": "components", "payload": entries}


# ---------------------------------------------------------------------------
# output

def provenance(input_hash: str | None = None, **extra) -> dict:
    out = {"tool": "gamma2", "version": __version__}
    if input_hash is not None:
        out["input_sha256"] = input_hash
    out.update(extra)
    return out


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def dumps_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def write_output(text: str, out: str | None):
    if out is None or out == "-":
        print(text, end="")
    else:
        Path(out).write_text(text)
