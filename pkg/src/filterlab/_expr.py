"""Tiny arithmetic expression compiler used by the modulus and sequence DSLs.

Expressions are parsed with :mod:`ast` and only a whitelist of node types is
accepted, so configuration text never reaches ``eval``.
"""

import ast
import math

import numpy as np

from .errors import DSLParseError

_FUNCS = {
    "log": np.log,
    "log1p": np.log1p,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "floor": np.floor,
    "pow": np.power,
    "min": np.minimum,
    "max": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}

_CMPOPS = {
    ast.Eq: np.equal,
    ast.NotEq: np.not_equal,
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
    ast.Mod: np.mod,
    ast.FloorDiv: np.floor_divide,
}


class Expression:
    """A compiled expression in one variable, evaluated elementwise on arrays."""

    def __init__(self, text, var="t"):
        self.text = text.strip()
        self.var = var
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise DSLParseError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise DSLParseError(f"operator {type(node.op).__name__} not allowed in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise DSLParseError(f"unary operator not allowed in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Compare):
            if len(node.ops) != 1 or type(node.ops[0]) not in _CMPOPS:
                raise DSLParseError(f"only single comparisons are allowed in {self.text!r}")
            self._check(node.left)
            self._check(node.comparators[0])
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise DSLParseError(f"unknown function in {self.text!r}; allowed: {sorted(_FUNCS)}")
            for arg in node.args:
                self._check(arg)
        elif isinstance(node, ast.Name):
            if node.id != self.var and node.id not in _CONSTS:
                raise DSLParseError(f"unknown name {node.id!r} in {self.text!r} (variable is {self.var!r})")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise DSLParseError(f"non-numeric constant in {self.text!r}")
        else:
            raise DSLParseError(f"unsupported syntax {type(node).__name__} in {self.text!r}")

    def _eval(self, node, x):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            val = self._eval(node.operand, x)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Compare):
            op = _CMPOPS[type(node.ops[0])]
            return op(self._eval(node.left, x), self._eval(node.comparators[0], x)).astype(float)
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](*(self._eval(a, x) for a in node.args))
        if isinstance(node, ast.Name):
            return x if node.id == self.var else _CONSTS[node.id]
        return float(node.value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, x)
        out = np.asarray(out, dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return out

    def __repr__(self):
        return f"Expression({self.text!r}, var={self.var!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.text, self.var) == (other.text, other.var)

    def __hash__(self):
        return hash((self.text, self.var))
