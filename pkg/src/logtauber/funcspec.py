"""Piecewise closed-form functions on [1, inf): parsing, evaluation, serialization.

A small DSL describes a function as either one expression or a list of
half-open pieces::

    sin(log(x))
    piece [1, e): 0; piece [e, inf): loglog(x);
    0 spikes(2, 2, 1, 1)

The optional ``spikes(start, power, width, height)`` clause overlays the value
``height`` on ``[n^power, n^power + width)`` for every integer ``n >= start``.
Spike intervals are expanded lazily, and only up to ``spike_horizon``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import expr as E
from .errors import DomainError, DSLSyntaxError, HorizonError, IntervalError

DEFAULT_SPIKE_HORIZON = 1e12

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),;:\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str):
    pos = 0
    out = []
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise _syntax(source, pos, f"unexpected character {source[pos]!r}")
        if m.lastgroup != "ws":
            text = m.group()
            out.append(Token(m.lastgroup, "^" if text == "**" else text, pos))
        pos = m.end()
    out.append(Token("end", "", len(source)))
    return out


def _syntax(source, pos, message):
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return DSLSyntaxError(message, line, col)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return _syntax(self.source, tok.pos, message)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    # expression grammar, usual precedence; ^ is right associative
    def expression(self):
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            node = E.BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            node = E.BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, E.Const):
                return E.Const(-arg.value)
            return E.Neg(arg)
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return E.BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return E.Const(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            name = tok.text
            if name == "x":
                return E.Var()
            if name == "pi":
                return E.Const(math.pi)
            if name == "e":
                return E.Const(math.e)
            if name == "inf":
                return E.Const(math.inf)
            if name in E.FUNCTIONS:
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return E.Func(name, arg)
            if name == "pow":
                self.expect("(")
                a = self.expression()
                self.expect(",")
                b = self.expression()
                self.expect(")")
                return E.BinOp("^", a, b)
            if name == "ind":
                self.expect("(")
                lo = self.constant()
                self.expect(",")
                hi = self.constant()
                self.expect(")")
                return E.Indicator(lo, hi)
            raise self.error(f"unknown name {name!r}", tok)
        if self.accept("("):
            node = self.expression()
            self.expect(")")
            return node
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def constant(self) -> float:
        tok = self.tok
        node = self.expression()
        if not node.is_constant():
            raise self.error("expected a constant", tok)
        return E.constant_value(node)

    def piece_body(self):
        """Either ``complex(re, im)`` or a real expression."""
        if self.tok.text == "complex" and self.tokens[self.i + 1].text == "(":
            self.i += 2
            re_ = self.expression()
            self.expect(",")
            im = self.expression()
            self.expect(")")
            return (re_, im)
        return self.expression()

    def interval(self):
        self.expect("[")
        lo = self.constant()
        self.expect(",")
        hi = self.constant()
        self.expect(")")
        return lo, hi

    def spikes(self):
        self.expect("(")
        vals = [self.constant()]
        while self.accept(","):
            vals.append(self.constant())
        self.expect(")")
        if len(vals) != 4:
            raise self.error("spikes takes (start, power, width, height)")
        start, power, width, height = vals
        if start != int(start) or start < 1 or power <= 0 or width <= 0:
            raise self.error("spikes needs integer start >= 1, power > 0, width > 0")
        return SpikeTrain(int(start), power, width, height)

    def spec(self):
        pieces = []
        if self.tok.text == "piece":
            while self.accept("piece"):
                lo, hi = self.interval()
                self.expect(":")
                pieces.append((lo, hi, self.piece_body()))
                self.expect(";")
        else:
            body = self.piece_body()
            if self.accept("on"):
                lo, hi = self.interval()
            else:
                lo, hi = 1.0, math.inf
            pieces.append((lo, hi, body))
            self.accept(";")
        train = None
        if self.accept("spikes"):
            train = self.spikes()
            self.accept(";")
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return pieces, train


@dataclass(frozen=True)
class SpikeTrain:
    """Value ``height`` on [n^power, n^power + width) for integers n >= start."""

    start: int
    power: float
    width: float
    height: float
    horizon: float = DEFAULT_SPIKE_HORIZON

    def bounds_u(self, n):
        n = np.asarray(n, dtype=float)
        base = n ** self.power
        return self.power * np.log(n), np.log(base) + np.log1p(self.width / base)

    def indices_between(self, lo_u, hi_u):
        """Spike indices whose interval meets (lo_u, hi_u)."""
        lo_x = math.exp(min(lo_u, 700.0))
        hi_x = math.exp(min(hi_u, 700.0))
        n_lo = max(self.start, int(math.floor(max(lo_x - self.width, 0.0) ** (1 / self.power))) - 1)
        n_hi = int(math.floor(hi_x ** (1 / self.power))) + 1
        if n_hi < n_lo:
            return np.zeros(0, dtype=np.int64)
        n = np.arange(n_lo, n_hi + 1, dtype=np.int64)
        a, b = self.bounds_u(n)
        return n[(b > lo_u) & (a < hi_u)]

    def contains_u(self, u):
        """Boolean mask of ``u`` inside some spike (same bounds as ``bounds_u``)."""
        n0 = np.floor(np.exp(np.minimum(u, 700.0) / self.power))
        hit = np.zeros(u.shape, dtype=bool)
        for k in (-1.0, 0.0, 1.0):
            n = np.maximum(n0 + k, 1.0)
            a, b = self.bounds_u(n)
            hit |= (n >= self.start) & (u >= a) & (u < b)
        return hit


def _probe_domain(body, lo, hi):
    """Reject log/loglog arguments that are non-positive on a piece."""
    lo_u = math.log(lo)
    hi_u = math.log(hi) if hi != math.inf else lo_u + 200.0
    probes = np.concatenate([[lo_u], np.linspace(lo_u, hi_u, 258)[1:-1]])
    for part in body if isinstance(body, tuple) else (body,):
        for node in E.walk(part):
            if isinstance(node, E.Func) and node.name in ("log", "loglog"):
                E.evaluate_u(node, probes)


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    body: object  # Node, or (re, im) pair of Nodes

    @property
    def is_constant(self):
        parts = self.body if isinstance(self.body, tuple) else (self.body,)
        return all(p.is_constant() for p in parts)

    def evaluate_u(self, u):
        if isinstance(self.body, tuple):
            return E.evaluate_u(self.body[0], u) + 1j * E.evaluate_u(self.body[1], u)
        return E.evaluate_u(self.body, u)

    def source(self):
        if isinstance(self.body, tuple):
            return f"complex({E.to_source(self.body[0])}, {E.to_source(self.body[1])})"
        return E.to_source(self.body)


def _fmt_bound(v):
    return "inf" if v == math.inf else repr(v)


class Evaluable:
    """Interface shared by everything the analysis modules can consume.

    Subclasses provide ``eval_u``, ``breakpoints_u``, ``is_complex`` and
    ``log_max`` (the largest ``log x`` at which evaluation is available).
    """

    name = "anonymous"
    is_complex = False
    log_max = math.inf

    def eval_u(self, u):
        raise NotImplementedError

    def breakpoints_u(self, lo_u, hi_u):
        return np.zeros(0)

    def constant_segments(self, a, b):
        """Boolean mask: is the function constant on each segment (a_i, b_i)?"""
        return np.zeros(np.shape(a), dtype=bool)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 1):
            raise DomainError("functions are defined on [1, inf)")
        out = self.eval_u(np.log(np.atleast_1d(x)))
        return out[0] if x.ndim == 0 else out

    def check_horizon(self, hi_u):
        if hi_u > self.log_max * (1 + 1e-12):
            raise HorizonError(
                f"{self.name}: log x = {hi_u:.6g} beyond available horizon {self.log_max:.6g}")

    def __neg__(self):
        return Combination(((-1.0, self),), name=f"-{self.name}")


@dataclass(frozen=True, eq=False)
class FunctionSpec(Evaluable):
    pieces: tuple
    codomain: str = "real"
    name: str = "anonymous"
    spikes: Optional[SpikeTrain] = None
    _starts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pieces = self.pieces
        if not pieces:
            raise IntervalError("a function needs at least one piece")
        if pieces[0].lo != 1.0:
            raise IntervalError(f"first piece starts at {pieces[0].lo}, not at 1")
        for p, q in zip(pieces, pieces[1:]):
            if not p.lo < p.hi:
                raise IntervalError(f"empty piece [{p.lo}, {p.hi})")
            if q.lo < p.hi:
                raise IntervalError(f"pieces overlap at [{q.lo}, {p.hi})")
            if q.lo > p.hi:
                raise IntervalError(f"gap between pieces: [{p.hi}, {q.lo})")
        if pieces[-1].hi != math.inf:
            raise IntervalError("last piece must be unbounded")
        object.__setattr__(self, "_starts", np.array([math.log(p.lo) for p in pieces]))

    @property
    def is_complex(self):
        return self.codomain == "complex"

    @property
    def log_max(self):
        return math.log(self.spikes.horizon) if self.spikes else math.inf

    def eval_u(self, u):
        u = np.asarray(u, dtype=float)
        if u.size and u.max() > self.log_max * (1 + 1e-12):
            raise HorizonError(f"{self.name}: spikes expanded only up to x = {self.spikes.horizon:g}")
        out = np.empty(u.shape, dtype=complex if self.is_complex else float)
        idx = np.searchsorted(self._starts, u, side="right") - 1
        if np.any(idx < 0):
            raise DomainError("x < 1")
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out[sel] = piece.evaluate_u(u[sel])
        if self.spikes is not None:
            out[self.spikes.contains_u(u)] = self.spikes.height
        return out

    def breakpoints_u(self, lo_u, hi_u):
        pts = self._starts[(self._starts > lo_u) & (self._starts < hi_u)]
        if self.spikes is not None:
            n = self.spikes.indices_between(lo_u, min(hi_u, self.log_max))
            a, b = self.spikes.bounds_u(n)
            pts = np.concatenate([pts, a, b])
            pts = pts[(pts > lo_u) & (pts < hi_u)]
        return np.unique(pts)

    def constant_segments(self, a, b):
        mid = 0.5 * (np.asarray(a) + np.asarray(b))
        idx = np.searchsorted(self._starts, mid, side="right") - 1
        const = np.array([p.is_constant for p in self.pieces])[np.maximum(idx, 0)]
        if self.spikes is not None:
            const = const | self.spikes.contains_u(mid)
        return const

    def to_source(self):
        parts = [f"piece [{_fmt_bound(p.lo)}, {_fmt_bound(p.hi)}): {p.source()};"
                 for p in self.pieces]
        if self.spikes is not None:
            s = self.spikes
            parts.append(f"spikes({s.start}, {s.power!r}, {s.width!r}, {s.height!r});")
        return "\n".join(parts)

    def to_json(self):
        d = {"name": self.name, "codomain": self.codomain,
             "pieces": [{"lo": p.lo, "hi": _fmt_bound(p.hi), "expr_text": p.source()}
                        for p in self.pieces]}
        if self.spikes is not None:
            s = self.spikes
            d["spikes"] = {"start": s.start, "power": s.power, "width": s.width,
                           "height": s.height, "horizon": s.horizon}
        return json.dumps(d, sort_keys=True)


def parse(source: str, name: str = "anonymous", spike_horizon: float = DEFAULT_SPIKE_HORIZON):
    parser = _Parser(source)
    raw, train = parser.spec()
    pieces = []
    for lo, hi, body in raw:
        if lo < 1:
            raise IntervalError(f"piece starts at {lo} < 1")
        if not lo < hi:
            raise IntervalError(f"empty piece [{lo}, {hi})")
        _probe_domain(body, lo, hi)
        pieces.append(Piece(float(lo), float(hi), body))
    pieces.sort(key=lambda p: p.lo)
    codomain = "complex" if any(isinstance(p.body, tuple) for p in pieces) else "real"
    if train is not None:
        train = SpikeTrain(train.start, train.power, train.width, train.height, spike_horizon)
    return FunctionSpec(tuple(pieces), codomain, name, train)


def from_json(text: str) -> FunctionSpec:
    d = json.loads(text)
    pieces = []
    for p in d["pieces"]:
        body = _Parser(p["expr_text"]).piece_body()
        hi = math.inf if p["hi"] == "inf" else float(p["hi"])
        pieces.append(Piece(float(p["lo"]), hi, body))
    train = None
    if "spikes" in d:
        s = d["spikes"]
        train = SpikeTrain(int(s["start"]), s["power"], s["width"], s["height"], s["horizon"])
    return FunctionSpec(tuple(pieces), d["codomain"], d["name"], train)


def evaluate(spec: Evaluable, x):
    """Value of ``spec`` at ``x >= 1`` (scalar or array)."""
    return spec(x)


def parse_constant(text: str) -> float:
    """Evaluate a constant DSL expression such as ``e^pi`` or ``3^2``."""
    p = _Parser(text)
    value = p.constant()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return value


def parse_log_quantity(text: str) -> float:
    """Return log of a positive quantity; ``e^<expr>`` is read without overflow."""
    text = text.strip()
    m = re.fullmatch(r"e\s*(\^|\*\*)\s*(.+)", text)
    if m:
        return parse_constant(m.group(2))
    value = parse_constant(text)
    if not value > 0:
        raise ValueError(f"{text!r} is not positive")
    return math.log(value)


class Combination(Evaluable):
    """Linear combination sum(c_k * f_k) of evaluables (pure, immutable)."""

    def __init__(self, terms: Sequence, name="combination"):
        self.terms = tuple((float(c), f) for c, f in terms)
        self.name = name
        self.is_complex = any(f.is_complex for _, f in self.terms)
        self.log_max = min(f.log_max for _, f in self.terms)

    def eval_u(self, u):
        u = np.asarray(u, dtype=float)
        out = 0
        for c, f in self.terms:
            out = out + c * f.eval_u(u)
        return np.asarray(out) + np.zeros(u.shape)

    def breakpoints_u(self, lo_u, hi_u):
        return np.unique(np.concatenate([f.breakpoints_u(lo_u, hi_u) for _, f in self.terms]))

    def constant_segments(self, a, b):
        mask = np.ones(np.shape(a), dtype=bool)
        for _, f in self.terms:
            mask &= f.constant_segments(a, b)
        return mask
