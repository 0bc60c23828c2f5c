"""JSON descriptor documents: a series, an evaluation policy, points and
parameter references. Field-by-field reference in ``docs/schema.md``."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import SchemaError
from .series import Block, EvalConfig, ParamRef, SeriesSpec

SCHEMA_ID = "qlauricella/1"

_NUM = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_MULTI = {
    "type": "object",
    "required": ["value", "exponents"],
    "additionalProperties": False,
    "properties": {"value": _NUM, "exponents": {"type": "array", "items": _NONNEG}},
}
_SINGLE = {
    "type": "object",
    "required": ["value", "exponent"],
    "additionalProperties": False,
    "properties": {"value": _NUM, "exponent": _NONNEG},
}

JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "series", "points"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "series": {
            "type": "object",
            "required": ["q", "n_vars"],
            "additionalProperties": False,
            "properties": {
                "q": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "n_vars": {"type": "integer", "minimum": 1},
                "upper_multi": {"type": "array", "items": _MULTI},
                "lower_multi": {"type": "array", "items": _MULTI},
                "upper_single": {"type": "array", "items": {"type": "array", "items": _SINGLE}},
                "lower_single": {"type": "array", "items": {"type": "array", "items": _SINGLE}},
            },
        },
        "config": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps_term": {"type": "number", "exclusiveMinimum": 0},
                "n_max_per_index": {"type": "integer", "minimum": 1},
                "eps_prod": {"type": "number", "exclusiveMinimum": 0},
                "shell_stall": {"type": "integer", "minimum": 1},
                "growth_shells": {"type": "integer", "minimum": 1},
                "growth_warmup": {"type": "integer", "minimum": 0},
                "precision": {"enum": ["double", "extended"]},
                "dps": {"type": "integer", "minimum": 16},
            },
        },
        "points": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "params": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["block", "j"],
                "additionalProperties": False,
                "properties": {
                    "block": {"enum": [b.value for b in Block]},
                    "j": {"type": "integer", "minimum": 0},
                    "var": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class DescriptorDocument:
    spec: SeriesSpec
    config: EvalConfig = field(default_factory=EvalConfig)
    points: tuple[tuple[float, ...], ...] = ()
    params: tuple[ParamRef, ...] = ()


def _path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _cross_check(raw: dict) -> list[str]:
    errors = []
    series = raw["series"]
    n = series["n_vars"]
    for name in ("upper_multi", "lower_multi"):
        for j, item in enumerate(series.get(name, [])):
            if len(item["exponents"]) != n:
                errors.append(f"$.series.{name}[{j}].exponents: expected {n} entries, got {len(item['exponents'])}")
    for name in ("upper_single", "lower_single"):
        if name in series and len(series[name]) != n:
            errors.append(f"$.series.{name}: expected {n} variable groups, got {len(series[name])}")
    for i, pt in enumerate(raw["points"]):
        if len(pt) != n:
            errors.append(f"$.points[{i}]: expected {n} coordinates, got {len(pt)}")
    for i, ref in enumerate(raw.get("params", [])):
        block = Block(ref["block"])
        where = f"$.params[{i}]"
        if block.is_single:
            if "var" not in ref:
                errors.append(f"{where}: single-index blocks need 'var'")
                continue
            groups = series.get(block.value, [])
            if ref["var"] >= len(groups) or ref["j"] >= len(groups[ref["var"]]):
                errors.append(f"{where}: {block.value}[{ref['var']}][{ref['j']}] does not exist")
        else:
            if "var" in ref:
                errors.append(f"{where}: multi-index blocks take no 'var'")
            elif ref["j"] >= len(series.get(block.value, [])):
                errors.append(f"{where}: {block.value}[{ref['j']}] does not exist")
    return errors


def from_dict(raw) -> DescriptorDocument:
    """Validate a decoded JSON object and build the document."""
    validator = jsonschema.Draft202012Validator(JSON_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise SchemaError(f"{_path(e)}: {e.message}" for e in errors)
    cross = _cross_check(raw)
    if cross:
        raise SchemaError(cross)
    s = raw["series"]
    spec = SeriesSpec(
        q=s["q"],
        n_vars=s["n_vars"],
        upper_multi=[(p["value"], tuple(p["exponents"])) for p in s.get("upper_multi", [])],
        lower_multi=[(p["value"], tuple(p["exponents"])) for p in s.get("lower_multi", [])],
        upper_single=[[(p["value"], p["exponent"]) for p in g] for g in s["upper_single"]]
        if "upper_single" in s else None,
        lower_single=[[(p["value"], p["exponent"]) for p in g] for g in s["lower_single"]]
        if "lower_single" in s else None,
    )
    return DescriptorDocument(
        spec=spec,
        config=EvalConfig(**raw.get("config", {})),
        points=tuple(tuple(pt) for pt in raw["points"]),
        params=tuple(ParamRef(Block(r["block"]), r["j"], r.get("var")) for r in raw.get("params", [])),
    )


def parse_descriptor(source: str | Path) -> DescriptorDocument:
    """Parse a descriptor from a path or from JSON text.

    Raises SchemaError (with line/column for syntax errors, JSON paths for
    field errors) or OSError when a path cannot be read.
    """
    if isinstance(source, Path) or (source.strip() and not source.lstrip().startswith("{")):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    if not text.strip():
        raise SchemaError(["$: empty document; required fields are 'schema', 'series', 'points'"])
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    return from_dict(raw)


def to_dict(doc: DescriptorDocument) -> dict:
    spec = doc.spec
    out = {
        "schema": SCHEMA_ID,
        "series": {
            "q": spec.q,
            "n_vars": spec.n_vars,
            "upper_multi": [{"value": p.value, "exponents": list(p.exponents)} for p in spec.upper_multi],
            "lower_multi": [{"value": p.value, "exponents": list(p.exponents)} for p in spec.lower_multi],
            "upper_single": [[{"value": p.value, "exponent": p.exponent} for p in g] for g in spec.upper_single],
            "lower_single": [[{"value": p.value, "exponent": p.exponent} for p in g] for g in spec.lower_single],
        },
        "config": asdict(doc.config),
        "points": [list(pt) for pt in doc.points],
        "params": [],
    }
    for ref in doc.params:
        item = {"block": ref.block.value, "j": ref.j}
        if ref.var is not None:
            item["var"] = ref.var
        out["params"].append(item)
    return out


def serialize(doc: DescriptorDocument) -> str:
    return json.dumps(to_dict(doc), indent=2) + "\n"


def bundled(name: str) -> DescriptorDocument:
    """Load one of the descriptors shipped in ``qlauricella/data``."""
    text = resources.files("qlauricella").joinpath("data", f"{name}.example.json").read_text(encoding="utf-8")
    return parse_descriptor(text)
