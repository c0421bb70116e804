"""JSON file formats for structures, models, joint distributions and morphisms.

Structure file::

    {"variables": ["A", "B", "C"], "arrows": [["A", "C"], ["B", "C"]]}

Model file (``structure`` is inline or a path relative to the model file)::

    {"structure": {...},
     "outcomes": {"A": ["a", "~a"], ...},
     "mechanisms": {"C": [[1.0, 0.0], [0.5, 0.5], ...], ...}}

Each mechanism is a list of probability rows, one per joint parent outcome,
row-major over the parents in canonical order (last parent fastest).

Joint file::

    {"factors": [{"name": "A", "outcomes": ["a", "~a"]}, ...], "values": [...]}

Morphism file (``source``/``target`` are model paths or inline models)::

    {"source": "fair.json", "target": "fair.json",
     "maps": {"X": {"h": "t", "t": "h"}, ...}}
"""

from __future__ import annotations

import json
import re
from contextlib import contextmanager
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import diagram as dg
from .errors import (
    ExpressionError,
    FileFormatError,
    InvalidFile,
    NameLookupError,
    NotStochastic,
)
from .model import ModelMorphism, StochCausalModel
from .stoch import TOL, FinSpace, JointDistribution, StochMatrix, product_labels
from .structure import CausalStructure


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise FileFormatError(f"cannot read {path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: invalid JSON ({e})") from None


def _require(d: Any, key: str, kind: type, where: str):
    if not isinstance(d, dict) or key not in d:
        raise FileFormatError(f"{where}: missing field {key!r}")
    if not isinstance(d[key], kind):
        raise FileFormatError(f"{where}: field {key!r} has the wrong type")
    return d[key]


@contextmanager
def _loading(where: str):
    """Turn lookups that fail while reading a file into invalid-file errors."""
    try:
        yield
    except NameLookupError as e:
        raise InvalidFile(f"{where}: {e}") from e


# -- structures ---------------------------------------------------------------------


def structure_from_dict(d: dict, where: str = "structure") -> CausalStructure:
    names = _require(d, "variables", list, where)
    arrows = d.get("arrows", [])
    if not all(isinstance(n, str) for n in names):
        raise FileFormatError(f"{where}: variable names must be strings")
    if not isinstance(arrows, list) or not all(
        isinstance(a, list) and len(a) == 2 and all(isinstance(x, str) for x in a) for a in arrows
    ):
        raise FileFormatError(f"{where}: arrows must be [source, target] name pairs")
    with _loading(where):
        return CausalStructure.build(names, [tuple(a) for a in arrows])


def structure_to_dict(G: CausalStructure) -> dict:
    return {
        "variables": list(G.names),
        "arrows": [[G.names[s], G.names[t]] for s, t in G.sorted_arrows()],
    }


def load_structure(path: str | Path) -> CausalStructure:
    d = read_json(path)
    if isinstance(d, dict) and "variables" not in d and "structure" in d:
        return load_model(path).structure
    return structure_from_dict(d, str(path))


# -- models ------------------------------------------------------------------------


def model_from_dict(d: dict, base: Path | None = None, where: str = "model") -> StochCausalModel:
    sref = _require(d, "structure", (dict, str), where)
    if isinstance(sref, str):
        spath = (base or Path(".")) / sref
        G = structure_from_dict(read_json(spath), str(spath))
    else:
        G = structure_from_dict(sref, where + ".structure")
    outcomes = _require(d, "outcomes", dict, where)
    tables = _require(d, "mechanisms", dict, where)
    with _loading(where):
        spaces = []
        for name in G.names:
            if name not in outcomes:
                raise InvalidFile(f"{where}: no outcomes for variable {name!r}")
            labels = outcomes[name]
            if not isinstance(labels, list) or not labels:
                raise FileFormatError(f"{where}: outcomes of {name!r} must be a non-empty list")
            spaces.append(FinSpace(name, tuple(str(x) for x in labels)))
        mechs = []
        for v, name in enumerate(G.names):
            if name not in tables:
                raise InvalidFile(f"{where}: no mechanism for variable {name!r}")
            parents = [spaces[p] for p in G.parents(v)]
            configs = product_labels(parents)
            try:
                rows = np.array(tables[name], dtype=float)
            except (TypeError, ValueError):
                raise FileFormatError(f"{where}: mechanism {name!r} is not a numeric table") from None
            if rows.ndim != 2 or rows.shape != (len(configs), spaces[v].size):
                raise InvalidFile(
                    f"{where}: mechanism {name!r} needs {len(configs)} rows of {spaces[v].size} probabilities"
                )
            for cfg, row in zip(configs, rows):
                if np.any(row < -TOL) or abs(row.sum() - 1.0) > TOL:
                    given = f" given {','.join(s.name for s in parents)}=({cfg})" if parents else ""
                    raise NotStochastic(f"{where}: mechanism {name!r} row{given} sums to {row.sum():.12g}")
            mechs.append(StochMatrix(rows.T, tuple(parents), spaces[v]))
        return StochCausalModel(G, tuple(spaces), tuple(mechs))


def model_to_dict(m: StochCausalModel) -> dict:
    G = m.structure
    return {
        "structure": structure_to_dict(G),
        "outcomes": {n: list(s.outcomes) for n, s in zip(G.names, m.spaces)},
        "mechanisms": {n: m.mechanisms[v].data.T.tolist() for v, n in enumerate(G.names)},
    }


def load_model(path: str | Path) -> StochCausalModel:
    path = Path(path)
    return model_from_dict(read_json(path), path.parent, str(path))


def dump_model(m: StochCausalModel) -> str:
    return json.dumps(model_to_dict(m), indent=2)


# -- joints --------------------------------------------------------------------------------


def joint_from_dict(d: dict, where: str = "joint") -> JointDistribution:
    factors = _require(d, "factors", list, where)
    values = _require(d, "values", list, where)
    spaces = []
    for f in factors:
        name = _require(f, "name", str, where)
        labels = _require(f, "outcomes", list, where)
        spaces.append(FinSpace(name, tuple(str(x) for x in labels)))
    try:
        return JointDistribution(tuple(spaces), np.array(values, dtype=float))
    except (TypeError, ValueError):
        raise FileFormatError(f"{where}: values must be numbers") from None


def joint_to_dict(P: JointDistribution) -> dict:
    return {
        "factors": [{"name": f.name, "outcomes": list(f.outcomes)} for f in P.factors],
        "values": P.values.tolist(),
    }


def load_joint(path: str | Path) -> JointDistribution:
    return joint_from_dict(read_json(path), str(path))


# -- morphisms ---------------------------------------------------------------------------


def _model_ref(ref, base: Path, where: str) -> StochCausalModel:
    if isinstance(ref, str):
        return load_model(base / ref)
    if isinstance(ref, dict):
        return model_from_dict(ref, base, where)
    raise FileFormatError(f"{where}: expected a model path or an inline model")


def morphism_from_dict(d: dict, base: Path | None = None, where: str = "morphism") -> ModelMorphism:
    base = base or Path(".")
    if not isinstance(d, dict) or "source" not in d or "target" not in d:
        raise FileFormatError(f"{where}: needs 'source' and 'target'")
    P = _model_ref(d["source"], base, where + ".source")
    Q = _model_ref(d["target"], base, where + ".target")
    maps = _require(d, "maps", dict, where)
    with _loading(where):
        for name, s in zip(P.structure.names, P.spaces):
            table = maps.get(name)
            if not isinstance(table, dict):
                raise InvalidFile(f"{where}: no outcome map for variable {name!r}")
            missing = [o for o in s.outcomes if o not in table]
            if missing:
                raise InvalidFile(f"{where}: map for {name!r} is not total, missing {missing}")
        return ModelMorphism.from_maps(P, Q, maps)


def load_morphism(path: str | Path) -> ModelMorphism:
    path = Path(path)
    return morphism_from_dict(read_json(path), path.parent, str(path))


# -- bundled data ----------------------------------------------------------------------------


def data_path(name: str) -> Path:
    """Path of a file shipped in the package's ``data`` directory."""
    return Path(str(resources.files("causal_theories") / "data" / name))


# -- expressions and printing ---------------------------------------------------------------------

_EXPR = re.compile(r"^\s*(id)?\s*\[(?P<body>[^\[\]]*)\]\s*$")


def parse_expression(G: CausalStructure, text: str) -> dg.Diagram:
    """Parse ``[w' || w]`` (a causal conditional), ``[w']`` (a prior) or ``id[w]``.

    Names are whitespace-separated.
    """
    m = _EXPR.match(text)
    if not m:
        raise ExpressionError(f"malformed expression {text!r}; expected '[ names || names ]'")
    body = m.group("body")
    if m.group(1):
        if "||" in body:
            raise ExpressionError(f"identity takes a single list of names: {text!r}")
        return dg.identity(dg.TheoryObject(tuple(G.index(n) for n in body.split())))
    left, sep, right = body.partition("||")
    if "|" in left or "|" in right:
        raise ExpressionError(f"malformed expression {text!r}")
    targets = left.split()
    given = right.split() if sep else []
    if not targets:
        raise ExpressionError(f"no target variables in {text!r}")
    return dg.causal_conditional(G, [G.index(n) for n in given], [G.index(n) for n in targets])


def format_matrix(K: StochMatrix, digits: int = 6) -> str:
    """Labeled table: one row per codomain outcome, one column per domain outcome."""
    cols = product_labels(K.dom)
    rows = product_labels(K.cod)
    corner = (",".join(s.name for s in K.cod) or "()") + " | " + (",".join(s.name for s in K.dom) or "()")
    cells = [[f"{x:.{digits}f}" for x in row] for row in K.data]
    width = max([len(c) for c in cols] + [digits + 2])
    lw = max(len(r) for r in rows + [corner])
    lines = [corner.ljust(lw) + "  " + "  ".join(c.rjust(width) for c in cols)]
    for r, row in zip(rows, cells):
        lines.append(r.ljust(lw) + "  " + "  ".join(c.rjust(width) for c in row))
    return "\n".join(lines)

