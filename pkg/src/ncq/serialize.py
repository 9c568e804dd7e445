"""Canonical JSON for algebras, elements and reports.

Parsing is strict: unexpected keys or malformed entries raise
:class:`FormatError`. Reports are written with a fixed 12-significant-digit
float format so identical inputs give byte-identical output.
"""
from __future__ import annotations

import json
import math
from typing import Any, Mapping

import numpy as np

from .algebra import AlgebraElement, BlockAlgebra


class FormatError(ValueError):
    pass


def require_keys(obj: Any, required: set[str], optional: set[str] = frozenset(), where: str = "object") -> dict:
    if not isinstance(obj, Mapping):
        raise FormatError(f"{where}: expected an object, got {type(obj).__name__}")
    keys = set(obj)
    unknown = keys - required - set(optional)
    if unknown:
        raise FormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise FormatError(f"{where}: missing keys {sorted(missing)}")
    return dict(obj)


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"{where}: expected a number, got {v!r}")
    return float(v)


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def pair_to_complex(v, where: str = "entry") -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(float(v))
    if not isinstance(v, list) or len(v) != 2:
        raise FormatError(f"{where}: expected [re, im], got {v!r}")
    return complex(_number(v[0], where), _number(v[1], where))


def algebra_to_obj(alg: BlockAlgebra) -> dict:
    return {"blocks": [{"size": n, "weight": w} for n, w in zip(alg.block_sizes, alg.trace_weights)]}


def algebra_from_obj(obj) -> BlockAlgebra:
    obj = require_keys(obj, {"blocks"}, where="algebra")
    blocks = obj["blocks"]
    if not isinstance(blocks, list) or not blocks:
        raise FormatError("algebra: 'blocks' must be a non-empty list")
    sizes, weights = [], []
    for i, b in enumerate(blocks):
        b = require_keys(b, {"size", "weight"}, where=f"blocks[{i}]")
        size = b["size"]
        if isinstance(size, bool) or not isinstance(size, int) or size < 1:
            raise FormatError(f"blocks[{i}].size must be a positive integer")
        sizes.append(size)
        weights.append(_number(b["weight"], f"blocks[{i}].weight"))
    try:
        return BlockAlgebra(tuple(sizes), tuple(weights))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def matrix_to_obj(m: np.ndarray) -> list:
    return [complex_to_pair(z) for z in np.asarray(m).reshape(-1)]


def element_to_obj(x: AlgebraElement) -> dict:
    out = algebra_to_obj(x.parent)
    out["data"] = [matrix_to_obj(b) for b in x.blocks]
    return out


def element_from_obj(obj) -> AlgebraElement:
    obj = require_keys(obj, {"blocks", "data"}, where="element")
    alg = algebra_from_obj({"blocks": obj["blocks"]})
    data = obj["data"]
    if not isinstance(data, list) or len(data) != alg.num_blocks:
        raise FormatError("element: 'data' must hold one entry list per block")
    blocks = []
    for k, (n, entries) in enumerate(zip(alg.block_sizes, data)):
        if not isinstance(entries, list) or len(entries) != n * n:
            raise FormatError(f"data[{k}] must hold {n * n} entries")
        vals = [pair_to_complex(v, f"data[{k}]") for v in entries]
        blocks.append(np.array(vals, dtype=complex).reshape(n, n))
    return AlgebraElement(alg, tuple(blocks))


def dumps_algebra(alg: BlockAlgebra) -> str:
    return canonical_dumps(algebra_to_obj(alg), exact=True)


def loads_algebra(text: str) -> BlockAlgebra:
    return algebra_from_obj(_loads(text))


def dumps_element(x: AlgebraElement) -> str:
    return canonical_dumps(element_to_obj(x), exact=True)


def loads_element(text: str) -> AlgebraElement:
    return element_from_obj(_loads(text))


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc


def format_number(x: float, exact: bool = False) -> str:
    """12 significant digits, or the shortest round-trip form when ``exact``."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0"
    s = repr(x) if exact else format(x, ".12g")
    if "e" in s:
        mant, exp = s.split("e")
        s = f"{mant}e{int(exp)}"
    return s


def canonical_dumps(obj, indent: int = 2, exact: bool = False) -> str:
    """JSON text with insertion-ordered keys and 12-significant-digit floats.

    ``exact`` keeps every float bit-for-bit, for data meant to be read back.
    """
    return _emit(obj, 0, indent, exact) + "\n"


def _emit(obj, level: int, indent: int, exact: bool = False) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return format_number(obj, exact)
    if isinstance(obj, (complex, np.complexfloating)):
        return _emit(complex_to_pair(complex(obj)), level, indent, exact)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, level + 1, indent, exact)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.integer, np.floating)) or v is None for v in obj):
            return "[" + ", ".join(_emit(v, level + 1, indent, exact) for v in obj) + "]"
        items = [pad + _emit(v, level + 1, indent, exact) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
