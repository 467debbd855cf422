"""A tiny expression language over one variable ``t``.

Grammar: numbers, ``t``, the constants ``e`` and ``pi``, binary ``+ - * /``,
``^`` or ``**`` for powers, unary minus, and the calls ``exp(.)``, ``log(.)``.
Parsing goes through :mod:`ast` and every node is whitelisted, so nothing is
ever ``eval``-ed.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

import numpy as np

from .errors import ExpressionError

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_FUNCS = {"exp": np.exp, "log": np.log}
_CONSTS = {"e": math.e, "pi": math.pi}


def _compile(node: ast.AST) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        value = float(node.value)
        return lambda t: np.full_like(t, value)
    if isinstance(node, ast.Name):
        if node.id == "t":
            return lambda t: t
        if node.id in _CONSTS:
            value = _CONSTS[node.id]
            return lambda t: np.full_like(t, value)
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left), _compile(node.right)
        return lambda t: op(left(t), right(t))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda t: -inner(t)
        return inner
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0])
        return lambda t: fn(arg(t))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


class Expression:
    """Compiled expression; calling it evaluates elementwise on arrays."""

    def __init__(self, body: str):
        if not isinstance(body, str) or not body.strip():
            raise ExpressionError("expression body must be a non-empty string")
        self.body = body.strip()
        try:
            tree = ast.parse(self.body.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {body!r}: {exc.msg}") from None
        self._fn = _compile(tree)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = self._fn(arr)
        return out if arr.ndim else float(out)

    def __repr__(self):
        return f"Expression({self.body!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and other.body == self.body

    def __hash__(self):
        return hash(("expr", self.body))
