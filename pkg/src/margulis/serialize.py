"""File formats: group files (JSON), spectra (TSV) and certificates."""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .affine import AffineIso
from .config import DEFAULT, Tolerances
from .errors import MalformedGroupFile, MargulisError
from .groups import Presentation
from .isospectral import ConjugacyCertificate
from .lorentz import LorentzMap
from .spectrum import Spectrum
from .words import Word

SCHEMA_VERSION = 1
SPECTRUM_HEADER = "word\talpha\tskipped"


def fmt(x: float) -> str:
    """17 significant digits; exact round-trip for doubles."""
    return "%.17g" % x


def group_to_dict(p: Presentation, seed=None, description: str = "") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "generators": [
            {"linear": [float(x) for x in g.linear.m.ravel()],
             "trans": [float(x) for x in g.trans]}
            for g in p.gens
        ],
        "orders": list(p.orders),
        "metadata": {"seed": seed, "description": description},
    }


def dumps_group(p: Presentation, seed=None, description: str = "") -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(group_to_dict(p, seed, description), indent=2) + "\n"


def write_group(path, p: Presentation, seed=None, description: str = "") -> None:
    Path(path).write_text(dumps_group(p, seed, description))


def _reals(xs, n: int, what: str) -> list[float]:
    if not isinstance(xs, list) or len(xs) != n:
        raise MalformedGroupFile(f"{what}: expected a list of {n} numbers")
    out = []
    for x in xs:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise MalformedGroupFile(f"{what}: non-finite or non-numeric entry {x!r}")
        out.append(float(x))
    return out


def group_from_dict(d: dict, tol: Tolerances = DEFAULT) -> tuple[Presentation, dict]:
    if not isinstance(d, dict):
        raise MalformedGroupFile("top level must be an object")
    if d.get("schema_version") != SCHEMA_VERSION:
        raise MalformedGroupFile(f"unsupported schema_version {d.get('schema_version')!r}")
    raw = d.get("generators")
    if not isinstance(raw, list) or not raw:
        raise MalformedGroupFile("generators must be a nonempty list")
    orders = d.get("orders", [None] * len(raw))
    if not isinstance(orders, list) or len(orders) != len(raw):
        raise MalformedGroupFile("orders must list one entry per generator")
    gens = []
    for k, g in enumerate(raw):
        if not isinstance(g, dict):
            raise MalformedGroupFile(f"generator {k + 1} must be an object")
        lin = np.array(_reals(g.get("linear"), 9, f"generator {k + 1} linear")).reshape(3, 3)
        trans = np.array(_reals(g.get("trans"), 3, f"generator {k + 1} trans"))
        try:
            gens.append(AffineIso(LorentzMap.checked(lin, tol), trans))
        except MargulisError as exc:
            raise MalformedGroupFile(f"generator {k + 1}: {exc}") from exc
    for o in orders:
        if o is not None and (isinstance(o, bool) or not isinstance(o, int)):
            raise MalformedGroupFile(f"order {o!r} is not an integer or null")
    try:
        p = Presentation(tuple(gens), tuple(orders))
    except (ValueError, MargulisError) as exc:
        raise MalformedGroupFile(str(exc)) from exc
    meta = d.get("metadata") or {}
    return p, meta if isinstance(meta, dict) else {}


def loads_group(text: str, tol: Tolerances = DEFAULT) -> tuple[Presentation, dict]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGroupFile(f"invalid JSON: {exc}") from exc
    return group_from_dict(d, tol)


def read_group(path, tol: Tolerances = DEFAULT) -> tuple[Presentation, dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedGroupFile(f"cannot read {path}: {exc}") from exc
    return loads_group(text, tol)


# --------------------------------------------------------------------------
# spectra


def dumps_spectrum(s: Spectrum) -> str:
    buf = io.StringIO()
    buf.write(SPECTRUM_HEADER + "\n")
    for e in s:
        buf.write(f"{e.word}\t{'nan' if e.skipped else fmt(e.alpha)}\t{int(e.skipped)}\n")
    return buf.getvalue()


def loads_spectrum(text: str) -> list[tuple[Word, float, bool]]:
    lines = text.splitlines()
    if not lines or lines[0] != SPECTRUM_HEADER:
        raise ValueError("missing spectrum header")
    out = []
    for line in lines[1:]:
        w, a, sk = line.split("\t")
        out.append((Word.parse(w), float(a), sk == "1"))
    return out


# --------------------------------------------------------------------------
# certificates


def certificate_to_dict(c: ConjugacyCertificate) -> dict:
    return {
        "verdict": c.verdict.value,
        "f": [float(x) for x in c.f.m.ravel()],
        "tau": [float(x) for x in c.tau],
        "residual": float(c.residual) if math.isfinite(c.residual) else None,
        "words_checked": int(c.words_checked),
        "witness": None if c.witness is None else str(c.witness),
        "delta_alpha": c.delta_alpha,
        "note": c.note,
    }


def dumps_certificate(c: ConjugacyCertificate, style: str = "table") -> str:
    d = certificate_to_dict(c)
    if style == "json":
        return json.dumps(d, indent=2) + "\n"
    rows = [
        ("verdict", d["verdict"]),
        ("f", " ".join(fmt(x) for x in d["f"])),
        ("tau", " ".join(fmt(x) for x in d["tau"])),
        ("residual", "-" if d["residual"] is None else fmt(d["residual"])),
        ("words_checked", str(d["words_checked"])),
        ("witness", d["witness"] or "-"),
        ("delta_alpha", "-" if d["delta_alpha"] is None else fmt(d["delta_alpha"])),
    ]
    if d["note"]:
        rows.append(("note", d["note"]))
    return "".join(f"{k}: {v}\n" for k, v in rows)
