"""JSON/CSV input and output helpers, schema validation and bundled data."""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema


class InputError(ValueError):
    """Malformed or schema-violating input; carries a schema excerpt."""

    def __init__(self, message: str, excerpt: str = ""):
        super().__init__(message)
        self.excerpt = excerpt


SCHEMAS = ("period_basis", "subgroup", "group", "atlas", "leaf", "system", "nerve", "cochain", "lift", "manifest")


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"unknown schema {name!r}")
    text = resources.files("affinekit").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def schema_excerpt(name: str) -> str:
    s = schema(name)
    body = {k: v for k, v in s.items() if k not in ("$defs", "$schema")}
    return json.dumps(body, indent=2)[:1500]


def validate(data, name: str) -> None:
    try:
        jsonschema.validate(data, schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{name} input invalid at {where}: {exc.message}", schema_excerpt(name)) from None


def data_path(name: str) -> Path:
    return Path(str(resources.files("affinekit").joinpath("data", name)))


def resolve(path_or_name: str) -> Path:
    """A filesystem path, or the name of a bundled data file (``torus2`` or ``torus2.json``)."""
    p = Path(path_or_name)
    if p.exists():
        return p
    for cand in (path_or_name, f"{path_or_name}.json"):
        q = data_path(cand)
        if q.exists():
            return q
    raise InputError(f"no such file or bundled data: {path_or_name}")


def load_json(path_or_name: str, schema_name: str | None = None):
    p = resolve(path_or_name)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from None
    if schema_name:
        validate(data, schema_name)
    return data


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def histogram_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["bin_lo", "bin_hi", "mass", "stderr"])
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()
