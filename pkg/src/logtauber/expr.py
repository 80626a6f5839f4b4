"""Expression trees over the single variable ``x``.

Evaluation is vectorized and takes ``u = log x`` rather than ``x``.  The
interesting horizons here are doubly exponential (``x = e^{e^4}`` and beyond),
so ``log x`` and ``log log x`` are read straight off ``u`` and ``x`` itself is
only materialized when an expression actually uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

FUNCTIONS = ("sin", "cos", "exp", "log", "loglog", "abs")


class Node:
    """Base class of all expression nodes (immutable)."""

    def is_constant(self) -> bool:
        return not any(isinstance(n, Var) for n in walk(self))


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    pass


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node


@dataclass(frozen=True)
class Indicator(Node):
    """1 on the half-open interval [lo, hi) of x, 0 elsewhere."""

    lo: float
    hi: float


Expression = Node
Number = Union[float, np.ndarray]


def walk(node: Node):
    yield node
    if isinstance(node, Neg):
        yield from walk(node.arg)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Func):
        yield from walk(node.arg)


def _log_of(node: Node, u: np.ndarray):
    """Return log(node) computed without forming x, or None if not possible."""
    if isinstance(node, Var):
        return u
    if isinstance(node, BinOp) and node.op == "^" and isinstance(node.left, Var) \
            and node.right.is_constant():
        return evaluate_u(node.right, u) * u
    if isinstance(node, Func) and node.name == "exp":
        return evaluate_u(node.arg, u)
    return None


def _check(mask, message):
    if np.any(mask):
        raise DomainError(message)


def evaluate_u(node: Node, u: np.ndarray) -> np.ndarray:
    """Evaluate ``node`` at ``x = exp(u)`` elementwise; ``u`` must be an array."""
    if isinstance(node, Const):
        return np.full(u.shape, node.value, dtype=float)
    if isinstance(node, Var):
        with np.errstate(over="ignore"):
            return np.exp(u)
    if isinstance(node, Neg):
        return -evaluate_u(node.arg, u)
    if isinstance(node, Indicator):
        lo = -np.inf if node.lo <= 0 else math.log(node.lo)
        hi = np.inf if node.hi == math.inf else math.log(node.hi)
        return ((u >= lo) & (u < hi)).astype(float)
    if isinstance(node, Func):
        name = node.name
        if name == "log":
            direct = _log_of(node.arg, u)
            if direct is not None:
                return np.array(direct, dtype=float, copy=True)
            a = evaluate_u(node.arg, u)
            _check(~(a > 0), "log of a non-positive argument")
            return np.log(a)
        if name == "loglog":
            la = _log_of(node.arg, u)
            if la is None:
                a = evaluate_u(node.arg, u)
                _check(~(a > 0), "loglog of a non-positive argument")
                la = np.log(a)
            _check(~(la > 0), "loglog of an argument <= 1")
            return np.log(la)
        a = evaluate_u(node.arg, u)
        if name == "sin":
            return np.sin(a)
        if name == "cos":
            return np.cos(a)
        if name == "exp":
            with np.errstate(over="ignore"):
                return np.exp(a)
        if name == "abs":
            return np.abs(a)
        raise ValueError(f"unknown function {name!r}")
    if isinstance(node, BinOp):
        a = evaluate_u(node.left, u)
        b = evaluate_u(node.right, u)
        with np.errstate(over="ignore", invalid="ignore"):
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                # 0 * inf from an overflowed x counts as 0
                r = a * b
                r[(a == 0) | (b == 0)] = 0.0
                return r
            if node.op == "/":
                _check(b == 0, "division by zero")
                return a / b
            if node.op == "^":
                r = np.power(a, b)
                _check(np.isnan(r) & ~np.isnan(a) & ~np.isnan(b),
                       "power of a negative base to a non-integer exponent")
                return r
        raise ValueError(f"unknown operator {node.op!r}")
    raise TypeError(f"not an expression node: {node!r}")


def constant_value(node: Node) -> float:
    if not node.is_constant():
        raise ValueError("expression depends on x")
    return float(evaluate_u(node, np.zeros(1))[0])


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_source(node: Node) -> str:
    """Print ``node`` so that re-parsing yields the identical tree."""
    if isinstance(node, Const):
        v = node.value
        if v < 0 or math.copysign(1.0, v) < 0:
            return f"(-{repr(-v)})"
        if math.isinf(v):
            return "inf"
        return repr(v)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Func):
        return f"{node.name}({to_source(node.arg)})"
    if isinstance(node, Indicator):
        return f"ind({repr(node.lo)}, {repr(node.hi) if node.hi != math.inf else 'inf'})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    raise TypeError(node)
