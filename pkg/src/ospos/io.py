"""JSON encoding of matrices, subspaces, reflections and triples.

Complex entries are written as [re, im] pairs; plain numbers are accepted on
input.  Matrices are row-major lists of rows.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .errors import ParseError, SchemaError
from .linalg import Subspace
from .markov import ProjectionTriple
from .reflection import Reflection


def load_schema(name: str) -> dict:
    with resources.files("ospos").joinpath("schemas", f"{name}.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def parse_json(text: str, source: str = "<input>") -> Any:
    if not text.strip():
        raise SchemaError(f"{source}: empty document")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def validate(doc: Any, definition: str, schema_name: str = "inputs") -> None:
    """Validate ``doc`` against ``$defs/definition`` of a shipped schema file."""
    schema = load_schema(schema_name)
    sub = {"$ref": f"#/$defs/{definition}", "$defs": schema["$defs"]} if "$defs" in schema else schema
    try:
        jsonschema.validate(doc, sub)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"field {path}: {exc.message}") from None


def _scalar(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def decode_matrix(obj) -> np.ndarray:
    """Matrix from {"entries": rows, "dim"?: n} or a bare list of rows."""
    rows = obj["entries"] if isinstance(obj, dict) else obj
    M = np.array([[_scalar(v) for v in row] for row in rows], dtype=complex)
    if M.ndim != 2:
        M = M.reshape(len(rows), -1)
    if isinstance(obj, dict) and "dim" in obj and M.shape != (obj["dim"], obj["dim"]):
        raise SchemaError(f"field dim: declared {obj['dim']}, entries have shape {M.shape}")
    return M


def decode_subspace(obj) -> Subspace:
    n = obj["ambient_dim"]
    if "frame" in obj:
        F = decode_matrix(obj["frame"])
        if F.size == 0:
            return Subspace.zero(n)
        if F.shape[0] != n:
            raise SchemaError(f"field frame: {F.shape[0]} rows, ambient_dim is {n}")
        return Subspace.from_frame(F)
    vecs = [[_scalar(v) for v in vec] for vec in obj.get("span", [])]
    if not vecs:
        return Subspace.zero(n)
    V = np.array(vecs, dtype=complex).T
    if V.shape[0] != n:
        raise SchemaError(f"field span: vectors of length {V.shape[0]}, ambient_dim is {n}")
    return Subspace.span(V)


def decode_reflection(obj) -> Reflection:
    if "fixed_space" in obj:
        S = decode_subspace(obj["fixed_space"])
        if S.ambient_dim != obj["ambient_dim"]:
            raise SchemaError("field fixed_space: ambient_dim disagrees with the reflection")
        return Reflection(S)
    return Reflection.from_matrix(decode_matrix(obj["matrix"]))


def decode_triple(obj) -> ProjectionTriple:
    return ProjectionTriple(decode_subspace(obj["H0"]), decode_subspace(obj["H_plus"]), decode_subspace(obj["H_minus"]))


def num(x) -> Any:
    """JSON-safe real number; non-finite values become strings."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def encode_complex(z) -> list:
    z = complex(z)
    return [num(z.real), num(z.imag)]


def encode_matrix(M) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    out = {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "entries": [[encode_complex(v) for v in row] for row in M]}
    if M.shape[0] == M.shape[1]:
        out["dim"] = int(M.shape[0])
    return out


def encode_vector(v) -> list:
    return [encode_complex(x) for x in np.asarray(v, dtype=complex).ravel()]


def encode_reals(v) -> list:
    return [num(x) for x in np.asarray(v, dtype=float).ravel()]


def encode_subspace(S: Subspace) -> dict:
    return {"ambient_dim": S.ambient_dim, "dim": S.dim, "frame": encode_matrix(S.frame)}


def encode_reflection(R: Reflection) -> dict:
    return {"ambient_dim": R.ambient_dim, "fixed_space": encode_subspace(R.fixed_space)}


def dumps(doc) -> str:
    """Deterministic serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
