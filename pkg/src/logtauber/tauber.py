"""Slow decrease / slow oscillation with respect to (L,1), and Tauberian conditions.

Windows are x < t <= x^lam.  In log-log coordinates (y = log log x) such a
window is the interval (y, y + log lam], so every grid here is uniform in
log log x and every window has the same number of grid points.

The asymptotic quantities (liminf over x -> infinity) are replaced by extrema
over a finite bracket x in [X, X^Lambda].  Reports always carry the bracket.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import HorizonError
from .funcspec import Evaluable
from .quadrature import integrate_intervals

DEFAULT_LOG_X_HORIZON = 32.0
DEFAULT_BRACKET = 4.0  # Lambda: x ranges over [X, X^Lambda]
DEFAULT_GRID_DENSITY = 200
MIN_WINDOW_POINTS = 32
MAX_BREAKPOINTS = 2000
# find_window checks x up to X^CHECK_BRACKET; e^{2 pi} lets log log x sweep a
# full period of sin(log log x)
CHECK_BRACKET = math.exp(2 * math.pi)
# for a candidate lam, the check bracket starts no lower than log x = SCALE/(lam-1),
# where a window spans at least SCALE in log x
SCALE = 2 * math.pi
MODES = ("decrease", "increase", "oscillation")


def lambda_schedule(k_max=12):
    """2, 1.5, 1.25, ..., 1 + 2^-k_max."""
    return [1.0 + 2.0 ** -k for k in range(k_max + 1)]


def _objective(mode, delta):
    """Quantity to minimize; the modulus value is recovered by ``_value``."""
    if mode == "decrease":
        return delta.real
    if mode == "increase":
        return -delta.real
    return -np.abs(delta)


def _value(mode, obj):
    return obj if mode == "decrease" else -obj


@dataclass(frozen=True)
class ModulusCurve:
    mode: str
    lambdas: tuple
    values: np.ndarray
    log_x_horizon: float
    bracket: float
    witness_log_x: np.ndarray
    witness_log_t: np.ndarray

    @property
    def witnesses(self):
        return list(zip(np.exp(np.minimum(self.witness_log_x, 709.0)),
                        np.exp(np.minimum(self.witness_log_t, 709.0))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "value", "witness_x", "witness_t", "log_witness_x", "log_witness_t"])
        for lam, v, lx, lt in zip(self.lambdas, self.values, self.witness_log_x, self.witness_log_t):
            w.writerow([repr(lam), repr(float(v)), repr(math.exp(lx) if lx < 709 else math.inf),
                        repr(math.exp(lt) if lt < 709 else math.inf), repr(float(lx)), repr(float(lt))])
        return buf.getvalue()

    def as_dict(self):
        return {"mode": self.mode, "lambdas": list(self.lambdas),
                "values": [float(v) for v in self.values],
                "log_x_horizon": self.log_x_horizon, "bracket": self.bracket,
                "witness_log_x": [float(v) for v in self.witness_log_x],
                "witness_log_t": [float(v) for v in self.witness_log_t]}


def _subsample(points, cap):
    if len(points) <= cap:
        return points
    return points[np.linspace(0, len(points) - 1, cap).round().astype(np.int64)]


def _window_extremes(f: Evaluable, lambdas, lo_ux, hi_ux, grid_density, mode, refine=True):
    """Extremes of s(t) - s(x) over x in [e^lo_ux, e^hi_ux], x < t <= x^lam.

    Returns (objective values, witness log x, witness log t) per lambda, in
    the order given.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas <= 1):
        raise ValueError("every lambda must exceed 1")
    lam_max = float(lambdas.max())
    if not 0 < lo_ux <= hi_ux:
        raise ValueError("x bracket must lie above 1")
    if hi_ux * lam_max > f.log_max * (1 + 1e-12):
        raise HorizonError(f"{f.name}: window reaches log x = {hi_ux * lam_max:.6g} "
                           f"beyond the available {f.log_max:.6g}")

    y_lo, y_hi = math.log(lo_ux), math.log(hi_ux)
    nx = max(2, int(math.ceil(grid_density * (y_hi - y_lo))) + 1)
    ux = np.exp(np.linspace(y_lo, y_hi, nx))
    ux[0], ux[-1] = lo_ux, hi_ux
    bp = _subsample(f.breakpoints_u(lo_ux, hi_ux * lam_max), MAX_BREAKPOINTS)
    bp_in = bp[(bp >= lo_ux) & (bp <= hi_ux)]
    ux = np.unique(np.concatenate([ux, bp_in, np.nextafter(bp_in, -np.inf)]))
    ux = ux[(ux >= lo_ux) & (ux <= hi_ux)]

    # common offsets d = log log t - log log x; a smaller lam uses a subset
    logs = np.log(lambdas)
    offs = [np.arange(1, int(grid_density * logs.max()) + 1) / grid_density, logs]
    for ll in logs:
        offs.append(np.linspace(0.0, ll, MIN_WINDOW_POINTS + 1)[1:])
    d = np.unique(np.concatenate(offs))
    d = d[(d > 0) & (d <= logs.max())]

    sx = f.eval_u(ux)
    ut = ux[:, None] * np.exp(d)[None, :]
    st = f.eval_u(ut.ravel()).reshape(ut.shape)
    obj = _objective(mode, st - sx[:, None])

    # jump pairs (b-, b) at breakpoints: t/x -> 1, inside every window
    jb = bp[(bp > lo_ux) & (bp <= hi_ux)]
    jb_left = np.nextafter(jb, -np.inf)
    jobj = _objective(mode, f.eval_u(jb) - f.eval_u(jb_left)) if len(jb) else np.zeros(0)

    out_obj = np.empty(len(lambdas))
    out_x = np.empty(len(lambdas))
    out_t = np.empty(len(lambdas))
    for i, ll in enumerate(logs):
        cols = d <= ll * (1 + 1e-15)
        sub = obj[:, cols]
        k = int(np.argmin(sub))
        r, c = divmod(k, sub.shape[1])
        best, bx, bt = float(sub[r, c]), ux[r], ut[r, np.flatnonzero(cols)[c]]
        if len(jb):
            j = int(np.argmin(jobj))
            if jobj[j] < best or (jobj[j] == best and jb_left[j] < bx):
                best, bx, bt = float(jobj[j]), jb_left[j], jb[j]
        if refine:
            best, bx, bt = _refine(f, mode, best, bx, bt, ll, lo_ux, hi_ux, bp)
        out_obj[i], out_x[i], out_t[i] = best, bx, bt

    # a witness for a smaller window is also one for every larger window
    order = np.argsort(lambdas)
    for prev, cur in zip(order, order[1:]):
        if out_obj[prev] < out_obj[cur]:
            out_obj[cur], out_x[cur], out_t[cur] = out_obj[prev], out_x[prev], out_t[prev]
    return out_obj, out_x, out_t


def _refine(f, mode, best, ux, ut, log_lam, lo_ux, hi_ux, bp):
    """Coordinate descent in (log log x, log log t) on a smooth stretch."""
    if len(bp) and np.min(np.abs(bp - ux)) < 1e-9 * ux:
        return best, ux, ut
    if len(bp) and np.min(np.abs(bp - ut)) < 1e-9 * ut:
        return best, ux, ut

    def at(ux_, ut_):
        v = _objective(mode, f.eval_u(np.array([ut_])) - f.eval_u(np.array([ux_])))
        return float(v[0])

    y, z = math.log(ux), math.log(ut)
    for _ in range(2):
        # t for fixed x
        lo, hi = y + 1e-12, y + log_lam
        res = minimize_scalar(lambda zz: at(ux, math.exp(zz)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        if res.fun < best:
            best, z, ut = float(res.fun), float(res.x), math.exp(res.x)
        # x for fixed t, keeping x < t <= x^lam and x inside the bracket
        lo = max(math.log(lo_ux), z - log_lam)
        hi = min(math.log(hi_ux), z - 1e-12)
        if hi > lo:
            res = minimize_scalar(lambda yy: at(math.exp(yy), ut), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-10})
            if res.fun < best:
                best, y, ux = float(res.fun), float(res.x), math.exp(res.x)
    return best, ux, ut


def _modulus(f, lambdas, mode, log_x_horizon, bracket, grid_density, refine):
    lambdas = tuple(sorted((float(l) for l in lambdas), reverse=True))
    lo = log_x_horizon
    hi = log_x_horizon * bracket
    obj, wx, wt = _window_extremes(f, lambdas, lo, hi, grid_density, mode, refine)
    return ModulusCurve(mode, lambdas, _value(mode, obj), lo, bracket, wx, wt)


def slow_decrease_modulus(spec: Evaluable, lambdas, x_horizon=None, grid_density=DEFAULT_GRID_DENSITY,
                          bracket=DEFAULT_BRACKET, *, log_x_horizon=None, refine=True,
                          mode="decrease") -> ModulusCurve:
    """inf of s(t) - s(x) over X <= x <= X^bracket, x < t <= x^lam, per lam.

    ``mode="increase"`` gives the sup instead (slow increase).  The value is a
    grid estimate: the true inf can only be lower, by at most what the grid
    and local refinement miss.
    """
    if spec.is_complex:
        raise TypeError("slow decrease is defined for real-valued functions only")
    if mode not in ("decrease", "increase"):
        raise ValueError(mode)
    lx = _log_x(x_horizon, log_x_horizon)
    return _modulus(spec, lambdas, mode, lx, bracket, grid_density, refine)


def slow_oscillation_modulus(spec: Evaluable, lambdas, x_horizon=None, grid_density=DEFAULT_GRID_DENSITY,
                             bracket=DEFAULT_BRACKET, *, log_x_horizon=None, refine=True) -> ModulusCurve:
    """sup of |s(t) - s(x)| over X <= x <= X^bracket, x < t <= x^lam, per lam."""
    lx = _log_x(x_horizon, log_x_horizon)
    return _modulus(spec, lambdas, "oscillation", lx, bracket, grid_density, refine)


def _log_x(x, log_x):
    if log_x is not None:
        return float(log_x)
    if x is None:
        return DEFAULT_LOG_X_HORIZON
    if not x > 1:
        raise ValueError("x horizon must exceed 1")
    return math.log(x)


@dataclass(frozen=True)
class SlowWindow:
    """s(t) - s(x) >= -eps (or |s(t) - s(x)| <= eps) for x0 <= x < t <= x^lam,
    checked for x up to exp(checked_log_x)."""

    eps: float
    x0: float
    lam: float
    mode: str = "decrease"
    checked_log_x: float = math.inf
    value: float = 0.0

    def __post_init__(self):
        if not (self.eps > 0 and self.x0 > 1 and self.lam > 1):
            raise ValueError("a window needs eps > 0, x0 > 1, lam > 1")

    def as_dict(self):
        return {"eps": self.eps, "x0": self.x0, "lambda": self.lam, "mode": self.mode,
                "checked_log_x": self.checked_log_x, "value": self.value}


def _clears(mode, value, eps):
    if mode == "decrease":
        return value >= -eps - 1e-9
    return value <= eps + 1e-9


def window_value(spec: Evaluable, x0, lam, mode, log_hi, grid_density=DEFAULT_GRID_DENSITY):
    """Finite-horizon modulus over x0 <= x <= e^log_hi for one lambda."""
    lo = math.log(x0)
    log_hi = min(log_hi, spec.log_max / lam)
    if log_hi < lo:
        raise HorizonError(f"{spec.name}: no room for windows above x0 = {x0:g}")
    obj, wx, wt = _window_extremes(spec, [lam], lo, log_hi, grid_density, mode)
    return float(_value(mode, obj)[0]), log_hi, (float(wx[0]), float(wt[0]))


def check_window(spec: Evaluable, window: SlowWindow, log_horizon=None,
                 grid_density=DEFAULT_GRID_DENSITY):
    """Re-verify a window up to ``log_horizon`` (default: its own checked range)."""
    log_hi = window.checked_log_x if log_horizon is None else log_horizon
    if math.isinf(log_hi):
        log_hi = _check_top(window.x0, window.lam, spec)
    value, _, witness = window_value(spec, window.x0, window.lam, window.mode, log_hi, grid_density)
    return _clears(window.mode, value, window.eps), value, witness


def _check_top(x0, lam, spec):
    base = max(math.log(x0), SCALE / (lam - 1))
    return min(base * CHECK_BRACKET, spec.log_max / lam)


DEFAULT_X0_SCHEDULE = tuple(math.exp(2.0 ** k) for k in range(5))  # e, e^2, e^4, e^8, e^16


def find_window(spec: Evaluable, eps, mode="decrease", search_budget=64,
                lambdas=None, x0_schedule=DEFAULT_X0_SCHEDULE,
                grid_density=DEFAULT_GRID_DENSITY) -> Optional[SlowWindow]:
    """First (x0, lam) whose finite-horizon modulus clears eps, or None.

    lam runs over 2, 1.5, 1.25, ... and, for each lam, x0 over an increasing
    schedule.  A candidate is checked for x from x0 up to
    max(log x0, 2 pi/(lam - 1)) * e^{2 pi} in log x: far enough out that each
    window spans more than a full period in log x and log log x sweeps a full
    period, so neither oscillation scale can hide behind the horizon.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if mode not in ("decrease", "oscillation"):
        raise ValueError(mode)
    if mode == "decrease" and spec.is_complex:
        raise TypeError("slow decrease is defined for real-valued functions only")
    used = 0
    for lam in (lambdas or lambda_schedule()):
        for x0 in x0_schedule:
            if used >= search_budget:
                return None
            log_hi = _check_top(x0, lam, spec)
            if log_hi < math.log(x0):
                continue
            used += 1
            value, log_hi, _ = window_value(spec, x0, lam, mode, log_hi, grid_density)
            if _clears(mode, value, eps):
                return SlowWindow(float(eps), float(x0), float(lam), mode, log_hi, value)
    return None


@dataclass(frozen=True)
class TauberConstant:
    C: float
    x0: float = 1.0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.x0 >= 1:
            raise ValueError("x0 must be at least 1")


@dataclass(frozen=True)
class ConditionReport:
    condition: str  # landau | hardy
    C: float
    x0: float
    log_horizon: float
    extreme_value: float
    extreme_log_u: float
    passed: bool
    u_weighted: bool = False

    @property
    def extreme_u(self):
        return math.exp(self.extreme_log_u) if self.extreme_log_u < 709 else math.inf

    def as_dict(self):
        return {"condition": self.condition, "C": self.C, "x0": self.x0,
                "log_horizon": self.log_horizon, "extreme_value": self.extreme_value,
                "extreme_u": self.extreme_u, "extreme_log_u": self.extreme_log_u,
                "passed": self.passed, "u_weighted": self.u_weighted}


def _minimize_on(func_u, f: Evaluable, lo_u, hi_u, grid_density=DEFAULT_GRID_DENSITY):
    """min of func_u over (e^lo_u, e^hi_u]: log log grid per segment, both sides of
    every breakpoint, then bounded refinement around the best grid point."""
    lo_u = max(lo_u, 1e-300)
    bp = f.breakpoints_u(lo_u, hi_u)
    edges = np.concatenate([[lo_u], bp, [hi_u]])
    pts = []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(64, int(grid_density * (math.log(b) - math.log(a))) + 1)
        g = np.exp(np.linspace(math.log(a), math.log(b), n))
        g[-1] = np.nextafter(b, -np.inf) if b != hi_u else hi_u
        pts.append(g)
    # the interval is open at lo_u
    first = np.nextafter(lo_u, np.inf)
    pts = np.unique(np.concatenate(pts + [[first], bp]))
    pts = pts[(pts > lo_u) & (pts <= hi_u)]
    vals = func_u(pts)
    k = int(np.argmin(vals))
    best, bu = float(vals[k]), float(pts[k])
    lo = pts[max(k - 1, 0)]
    hi = pts[min(k + 1, len(pts) - 1)]
    inner = [p for p in bp if lo < p < hi]
    if hi > lo and not inner:
        res = minimize_scalar(lambda v: float(func_u(np.array([v]))[0]), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * max(1.0, hi)})
        if res.fun < best:
            best, bu = float(res.fun), float(res.x)
    return best, bu


def _u_log_u(f, u):
    """u * log u * f(u) with u = e^v, treating 0 * inf as 0."""
    fv = f.eval_u(u)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.exp(u) * u * fv
    w[fv == 0] = 0.0
    return w


def check_landau(f: Evaluable, const: TauberConstant, horizon=None, *, log_horizon=None) -> ConditionReport:
    """One-sided condition u (log u) f(u) >= -C on (x0, horizon]."""
    if f.is_complex:
        raise TypeError("the one-sided condition needs a real-valued f")
    lh = _log_x(horizon, log_horizon)
    lo = math.log(const.x0)
    if not lh > lo:
        raise ValueError("horizon must exceed x0")
    best, bu = _minimize_on(lambda u: _u_log_u(f, u), f, lo, lh)
    return ConditionReport("landau", const.C, const.x0, lh, best, bu, best >= -const.C - 1e-9)


def check_hardy(f: Evaluable, const: TauberConstant, horizon=None, *, log_horizon=None,
                u_weighted=False) -> ConditionReport:
    """Two-sided condition (log u) |f(u)| <= C on (x0, horizon].

    With ``u_weighted`` the weight is u (log u), matching the one-sided form.
    """
    lh = _log_x(horizon, log_horizon)
    lo = math.log(const.x0)
    if not lh > lo:
        raise ValueError("horizon must exceed x0")

    def neg_weighted(u):
        fv = np.abs(f.eval_u(u))
        w = u * fv
        if u_weighted:
            with np.errstate(over="ignore", invalid="ignore"):
                w = np.exp(u) * w
            w[fv == 0] = 0.0
        return -w

    best, bu = _minimize_on(neg_weighted, f, lo, lh)
    return ConditionReport("hardy", const.C, const.x0, lh, -best, bu, -best <= const.C + 1e-9, u_weighted)


class Primitive(Evaluable):
    """s(x) = integral_1^x f(u) du, evaluated by cumulative quadrature.

    In log coordinates the integrand is f(e^v) e^v, so evaluation stops at
    log x = 700 where e^v would overflow.
    """

    def __init__(self, f: Evaluable, abs_tol=1e-9, name=None):
        self.f = f
        self.abs_tol = abs_tol
        self.name = name or f"primitive[{f.name}]"
        self.is_complex = f.is_complex
        self.log_max = min(f.log_max, 700.0)

    def _integrand(self, v):
        fv = self.f.eval_u(v)
        out = fv * np.exp(v)
        out[fv == 0] = 0
        return out

    def eval_u(self, u):
        u = np.asarray(u, dtype=float)
        if u.size == 0:
            return np.zeros(0, dtype=complex if self.is_complex else float)
        self.check_horizon(float(u.max()))
        flat = u.ravel()
        uniq, inverse = np.unique(flat, return_inverse=True)
        edges = np.concatenate([[0.0], uniq])
        vals, _ = integrate_intervals(self._integrand, edges, self.abs_tol,
                                      self.f.breakpoints_u(0.0, uniq[-1]),
                                      const_fn=self._const_zero)
        return np.cumsum(vals)[inverse].reshape(u.shape)

    def _const_zero(self, a, b):
        const = self.f.constant_segments(a, b)
        if np.any(const):
            mid = 0.5 * (a[const] + b[const])
            const[const] = self.f.eval_u(mid) == 0
        return const

    def breakpoints_u(self, lo_u, hi_u):
        return self.f.breakpoints_u(lo_u, hi_u)


def primitive(f: Evaluable, abs_tol=1e-9) -> Primitive:
    return Primitive(f, abs_tol)
