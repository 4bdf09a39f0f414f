"""Small arithmetic expression language for walls and coefficients.

Variables ``x``, ``y`` (second coordinate, k=2) and ``u`` (state); operators
``+ - * / ^`` (``**`` also accepted); functions ``sin cos exp log sqrt abs
tanh min max``; numeric constants and ``pi``.  Expressions are parsed once
with :mod:`ast` and interpreted over numpy arrays.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .coefficients import CoefficientError, Diffusion, Drift


class ExpressionError(ValueError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at column {position})")
        self.position = position


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "tanh": np.tanh,
    "min": lambda *a: _fold(np.minimum, a), "max": lambda *a: _fold(np.maximum, a),
}
_CONSTS = {"pi": np.pi, "e": np.e}
VARIABLES = ("x", "y", "u")


def _fold(fn, args):
    if len(args) < 2:
        raise ExpressionError("min/max need at least two arguments")
    out = args[0]
    for a in args[1:]:
        out = fn(out, a)
    return out


class Expression:
    """A parsed expression; call it with keyword arrays ``x=..., y=..., u=...``."""

    def __init__(self, text: str):
        self.text = text
        src = text.replace("^", "**")
        try:
            tree = ast.parse(src.strip(), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"syntax error in '{text}': {exc.msg}", exc.offset) from None
        self._check(tree.body)
        self.tree = tree.body
        self.names = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)} & set(VARIABLES)

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"operator not allowed in '{self.text}'", node.col_offset + 1)
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ExpressionError(f"operator not allowed in '{self.text}'", node.col_offset + 1)
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise ExpressionError(f"unknown function in '{self.text}'", node.col_offset + 1)
            for a in node.args:
                self._check(a)
        elif isinstance(node, ast.Name):
            if node.id not in VARIABLES and node.id not in _CONSTS:
                raise ExpressionError(f"unknown name '{node.id}' in '{self.text}'", node.col_offset + 1)
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"only numeric constants allowed in '{self.text}'", node.col_offset + 1)
        else:
            raise ExpressionError(f"unsupported syntax in '{self.text}'", getattr(node, "col_offset", 0) + 1)

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](*(self._eval(a, env) for a in node.args))
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ExpressionError(f"variable '{node.id}' has no value here")
        return float(node.value)

    def __call__(self, **env):
        env = {k: np.asarray(v, dtype=float) for k, v in env.items() if v is not None}
        with np.errstate(all="ignore"):
            return self._eval(self.tree, env)

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse_expression(text: str) -> Expression:
    return Expression(text)


def _coords(pts):
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 2:
        return pts[:, 0], pts[:, 1]
    return pts, None


def spatial_function(text: str):
    """Callable of node coordinates, for walls and ``v``."""
    expr = Expression(text)
    if "u" in expr.names:
        raise ExpressionError(f"'{text}' may only depend on x and y")

    def fn(pts):
        x, y = _coords(pts)
        return expr(x=x, y=y)

    return fn


def drift_from_expression(text: str, k: int = 1, samples: int = 512) -> Drift:
    """Drift ``f(x, u)`` from text; rejected unless it passes a randomized
    monotonicity spot-check in ``u``."""
    expr = Expression(text)

    def fn(pts, s):
        x, y = _coords(pts)
        return expr(x=x, y=y, u=s)

    drift = Drift(fn, None, None, text)
    try:
        drift.check_monotone(k, samples)
    except CoefficientError as exc:
        err = ExpressionError(str(exc))
        err.pair = exc.pair
        raise err from exc
    return drift


def diffusion_from_expression(text: str, lipschitz: float, k: int = 1) -> Diffusion:
    expr = Expression(text)

    def fn(pts, s):
        x, y = _coords(pts)
        return expr(x=x, y=y, u=s)

    sig = Diffusion(fn, float(lipschitz), text, "u" not in expr.names)
    sig.check_lipschitz(k)
    return sig
