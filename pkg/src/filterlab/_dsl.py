"""Shared call-syntax parser for the set, filter, map, sequence and vector DSLs.

``union(squares, ap(1,2))`` parses to ``Call('union', (Call('squares', ()),
Call('ap', (1, 2))))``.  Bare names become zero-argument calls, ``inf`` is
``math.inf``, brace literals become dicts and arguments that are arithmetic
in ``n``/``t`` are kept as source text for :class:`~filterlab._expr.Expression`.
"""

import ast
import math
from dataclasses import dataclass

from .errors import DSLParseError


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Raw:
    """Unparsed arithmetic, e.g. the ``1/n`` in ``scalar(1/n)``."""

    text: str


def parse(text):
    text = text.strip()
    if not text:
        raise DSLParseError("empty expression")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise DSLParseError(f"cannot parse {text!r}: {exc.msg}") from None
    return _convert(tree.body, text)


def _convert(node, text):
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise DSLParseError(f"bad call syntax in {text!r}")
        return Call(node.func.id, tuple(_convert(a, text) for a in node.args))
    if isinstance(node, ast.Name):
        if node.id == "inf":
            return math.inf
        return Call(node.id, ())
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float, str)) and not isinstance(node.value, bool):
            return node.value
        raise DSLParseError(f"unsupported literal in {text!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub) and isinstance(node.operand, ast.Constant):
        return -node.operand.value
    if isinstance(node, ast.Dict):
        out = {}
        for k, v in zip(node.keys, node.values):
            key = k.id if isinstance(k, ast.Name) else getattr(k, "value", None)
            if key is None:
                raise DSLParseError(f"bad dict key in {text!r}")
            val = _convert(v, text)
            if not isinstance(val, (int, float)):
                raise DSLParseError(f"dict values must be numbers in {text!r}")
            out[str(key)] = float(val)
        return out
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_convert(e, text) for e in node.elts]
    if isinstance(node, (ast.BinOp, ast.UnaryOp, ast.Compare)):
        return Raw(ast.unparse(node))
    raise DSLParseError(f"unsupported syntax {type(node).__name__} in {text!r}")


def expect_int(value, what):
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise DSLParseError(f"{what} must be an integer, got {value!r}")
    return value


def expect_number(value, what):
    if isinstance(value, (int, float)):
        return float(value)
    raise DSLParseError(f"{what} must be a number, got {value!r}")


def fmt_number(x):
    """Render a number the way the DSLs print it (ints without a decimal point)."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)
