"""Small arithmetic-expression language for coefficient and source fields.

Expressions use the variable ``x``, numbers, + - * /, powers (``**`` or
``^``), parentheses, the constants ``pi`` and ``e``, and the functions
exp, log, sqrt, sin, cos, abs, min and max.  They are parsed with the
``ast`` module against a whitelist and evaluated elementwise on numpy arrays.
"""

from __future__ import annotations

import ast
import math
import operator as op

import numpy as np

from .errors import ParameterError

_BINARY = {ast.Add: op.add, ast.Sub: op.sub, ast.Mult: op.mul, ast.Div: op.truediv, ast.Pow: op.pow}
_UNARY = {ast.UAdd: op.pos, ast.USub: op.neg}
_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}


class Expression:
    """A parsed expression in ``x``; call it with a float or an array."""

    def __init__(self, text: str):
        self.text = text
        source = text.replace("^", "**")
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ParameterError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            pass
        elif isinstance(node, ast.Name) and (node.id == "x" or node.id in _CONSTS):
            pass
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
                and not node.keywords:
            want = 2 if node.func.id in ("min", "max") else 1
            if len(node.args) != want:
                raise ParameterError(f"{node.func.id} takes {want} argument(s) in {self.text!r}")
            for arg in node.args:
                self._check(arg)
        else:
            raise ParameterError(f"unsupported element {ast.dump(node)[:40]!r} in expression {self.text!r}")

    def _eval(self, node, x):
        if isinstance(node, ast.BinOp):
            return _BINARY[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, x))
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return x if node.id == "x" else _CONSTS[node.id]
        return _FUNCS[node.func.id](*(self._eval(a, x) for a in node.args))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self._eval(self._tree, x), dtype=float) * np.ones_like(x)
        if not np.all(np.isfinite(out)):
            raise ParameterError(f"expression {self.text!r} is not finite on the mesh")
        return out if out.ndim else float(out)

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse(text: str) -> Expression:
    return Expression(text)
