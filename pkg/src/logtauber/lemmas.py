"""Numerical checks of the growth lemmas and the proof constructions.

All chain and window arithmetic is done on log x (and log log x): the points
x0^(lam^p) leave double range after a handful of steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonError, HypothesisError
from .funcspec import Evaluable
from .logmean import DEFAULT_ABS_TOL, integrate_weighted_u, log_mean_u
from .quadrature import integrate_intervals
from .tauber import SlowWindow, check_window

MARGIN_TOL = 1e-7
DEFAULT_SEED = 20240101


def b1_constant(lam):
    return 2.0 / math.log(lam)


def b2_constant(lam, x0):
    return b1_constant(lam) / lam * (math.log(lam) + math.log(math.log(x0)) + 1.0)


@dataclass(frozen=True)
class GeometricChain:
    """t_0 = t, t_p = t_{p-1}^(1/lam), stopped at t_{q+1} <= x < t_q."""

    log_t0: float
    lam: float
    log_points: tuple  # log t_0, ..., log t_{q+1}
    q: int
    log_x: float

    @property
    def points(self):
        return tuple(math.exp(v) if v < 709 else math.inf for v in self.log_points)

    def q_bound(self):
        """(1/log lam) log(log t / log x); q must be strictly below it."""
        return math.log(self.log_t0 / self.log_x) / math.log(self.lam)

    def telescoping_terms(self, f: Evaluable):
        """s(t_{p-1}) - s(t_p) for p = 1..q, then s(t_q) - s(x)."""
        u = np.array(self.log_points[: self.q + 1] + (self.log_x,))
        s = f.eval_u(u)
        return s[:-1] - s[1:]

    def as_dict(self):
        return {"log_t0": self.log_t0, "lambda": self.lam, "q": self.q, "log_x": self.log_x,
                "log_points": list(self.log_points), "q_bound": self.q_bound()}


def build_chain(t=None, x=None, lam=2.0, *, log_t=None, log_x=None) -> GeometricChain:
    lt = log_t if log_t is not None else math.log(t)
    lx = log_x if log_x is not None else math.log(x)
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    if not lx > 0:
        raise HypothesisError("x must exceed 1")
    if not lx < lt / lam:
        raise HypothesisError("chain needs x < t^(1/lambda)")
    pts = [lt]
    p = 0
    while True:
        p += 1
        v = lt / lam ** p
        pts.append(v)
        if v <= lx:
            break
    return GeometricChain(lt, float(lam), tuple(pts), p - 1, lx)


@dataclass(frozen=True)
class LemmaBoundReport:
    lemma_id: int
    lam: float
    x0: float
    B1: float
    B2: float
    margin: float
    passed: bool
    n_tested: int
    witness: tuple  # (log x, log t) of the worst case
    horizon_log: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {"lemma_id": self.lemma_id, "lambda": self.lam, "x0": self.x0, "B1": self.B1,
                "B2": self.B2, "margin": self.margin, "passed": self.passed,
                "n_tested": self.n_tested, "witness_log_x_t": list(self.witness),
                "horizon_log": self.horizon_log, "details": self.details}


def _require_window(spec, window, mode, log_horizon):
    if window.eps != 1:
        raise HypothesisError("the lemmas assume the window condition with eps = 1")
    if window.mode != mode:
        raise HypothesisError(f"need a {mode} window")
    if mode == "decrease" and spec.is_complex:
        raise HypothesisError("slow decrease needs a real-valued function")
    top = min(log_horizon, spec.log_max / window.lam)
    ok, value, witness = check_window(spec, window, top)
    if not ok:
        raise HypothesisError(
            f"window (x0={window.x0:g}, lambda={window.lam:g}) fails for eps=1 at "
            f"log x={witness[0]:.6g}, log t={witness[1]:.6g} (value {value:.6g})")


def sample_pairs(x0, lam, log_t_max, n, seed=DEFAULT_SEED):
    """Pairs with x0 <= x < t^(1/lam) <= ..., log log x uniform first, then log log t.

    Returns (log x, log t) arrays.
    """
    rng = np.random.default_rng(seed)
    y0 = math.log(math.log(x0))
    ytop = math.log(log_t_max)
    if not ytop > y0 + math.log(lam):
        raise ValueError("horizon too small for any pair x < t^(1/lambda)")
    y = rng.uniform(y0, ytop - math.log(lam), n)
    z = rng.uniform(y + math.log(lam), ytop)
    lx, lt = np.exp(y), np.exp(z)
    lx = np.maximum(lx, math.log(x0))
    # keep the hypothesis strict after rounding
    ok = lx < lt / lam
    return lx[ok], lt[ok]


def _pair_lemma(spec, window, log_t_max, n_pairs, seed, lemma_id):
    mode = "decrease" if lemma_id == 1 else "oscillation"
    _require_window(spec, window, mode, log_t_max)
    lam, x0 = window.lam, window.x0
    B1 = b1_constant(lam)
    lx, lt = sample_pairs(x0, lam, log_t_max, n_pairs, seed)
    ratio = np.log(lt / lx)
    gate = bool(np.all(math.log(lam) < ratio))
    delta = spec.eval_u(lt) - spec.eval_u(lx)
    if lemma_id == 1:
        margins = delta - (-B1 * ratio)
    else:
        margins = B1 * ratio - np.abs(delta)
    k = int(np.argmin(margins))
    worst = float(margins[k])
    chain = build_chain(log_t=float(lt[k]), log_x=float(lx[k]), lam=lam)
    details = {"eq37_gate": gate, "worst_chain": chain.as_dict(),
               "worst_chain_terms": [float(np.real(v)) if lemma_id == 1 else float(abs(v))
                                     for v in chain.telescoping_terms(spec)]}
    return LemmaBoundReport(lemma_id, lam, x0, B1, b2_constant(lam, x0), worst,
                            worst >= -MARGIN_TOL and gate, len(lx),
                            (float(lx[k]), float(lt[k])), log_t_max, details)


def verify_lemma1(spec: Evaluable, window: SlowWindow, log_t_max, n_pairs=10_000, seed=DEFAULT_SEED):
    """s(t) - s(x) >= -B1 log(log t / log x) for sampled x0 <= x < t^(1/lam)."""
    return _pair_lemma(spec, window, log_t_max, n_pairs, seed, 1)


def verify_lemma2(spec: Evaluable, window: SlowWindow, log_t_max, n_pairs=10_000, seed=DEFAULT_SEED):
    """|s(t) - s(x)| <= B1 log(log t / log x) for sampled x0 <= x < t^(1/lam)."""
    return _pair_lemma(spec, window, log_t_max, n_pairs, seed, 2)


def default_t_samples(x0, lam, log_t_max, n=24):
    lo = lam * math.log(x0)
    g = np.exp(np.linspace(math.log(lo), math.log(log_t_max), n + 1))[1:]
    return g


def _integral_lemma(spec, window, log_t_samples, abs_tol, lemma_id):
    mode = "decrease" if lemma_id == 3 else "oscillation"
    lt_all = np.asarray(log_t_samples, dtype=float)
    if window.x0 <= math.e:
        raise HypothesisError("the integral lemmas assume x0 > e")
    _require_window(spec, window, mode, float(lt_all.max()))
    lam, x0 = window.lam, window.x0
    lx0 = math.log(x0)
    if np.any(lt_all <= lam * lx0):
        raise HypothesisError("every t must exceed x0^lambda")
    B2 = b2_constant(lam, x0)
    rows = []
    for lt in lt_all:
        st = spec.eval_u(np.array([lt]))[0]
        if lemma_id == 3:
            def g(u, st=st):
                return np.real(st - spec.eval_u(u))
        else:
            def g(u, st=st):
                return np.abs(st - spec.eval_u(u))
        split = lt / lam
        # split at t^(1/lam): the two parts estimated separately in the proof
        parts, _ = integrate_intervals(g, [lx0, split, lt], abs_tol,
                                       spec.breakpoints_u(lx0, lt))
        lhs = float(parts.sum()) / lt
        margin = lhs + B2 if lemma_id == 3 else B2 - lhs
        rows.append((margin, float(lt), lhs, float(parts[0]), float(parts[1])))
    worst = min(rows)
    return LemmaBoundReport(lemma_id, lam, x0, b1_constant(lam), B2, worst[0],
                            worst[0] >= -MARGIN_TOL, len(rows), (lx0, worst[1]),
                            float(lt_all.max()),
                            {"samples": [{"log_t": r[1], "lhs": r[2], "lower_part": r[3],
                                          "upper_part": r[4], "margin": r[0]} for r in rows]})


def verify_lemma3(spec: Evaluable, window: SlowWindow, log_t_samples, abs_tol=DEFAULT_ABS_TOL):
    """(1/log t) int_{x0}^t (s(t) - s(x))/x dx >= -B2 for t > x0^lam."""
    return _integral_lemma(spec, window, log_t_samples, abs_tol, 3)


def verify_lemma4(spec: Evaluable, window: SlowWindow, log_t_samples, abs_tol=DEFAULT_ABS_TOL):
    """(1/log t) int_{x0}^t |s(t) - s(x)|/x dx <= B2 for t > x0^lam."""
    return _integral_lemma(spec, window, log_t_samples, abs_tol, 4)


@dataclass(frozen=True)
class BnSequence:
    log_b: tuple
    n0: int
    eps: float
    lam: float
    x0: float
    ell: float
    cases: tuple  # case of the step b_n -> b_{n+1}: "i" or "ii"
    # per case-(ii) step: exceptional density lower bound under two normalizations
    density_bounds: tuple = ()
    stop_reason: str = ""

    @property
    def b(self):
        return tuple(math.exp(v) if v < 709 else math.inf for v in self.log_b)

    def check_invariants(self, spec: Evaluable):
        lb = np.array(self.log_b)
        vals = spec.eval_u(lb)
        close = bool(np.all(np.abs(vals - self.ell) <= self.eps))
        r = math.sqrt(self.lam)
        grows = bool(np.all(lb[1:] > r * lb[:-1]))
        # b_{n+1} < b_n^lam for n > n0 (1-based n, so index n0 onward)
        capped = bool(np.all(lb[self.n0 + 1:] < self.lam * lb[self.n0:-1])) if len(lb) > 1 else True
        return {"close_to_limit": close, "grows_past_sqrt_lambda": grows,
                "below_lambda_after_n0": capped}

    def as_dict(self):
        return {"log_b": list(self.log_b), "n0": self.n0, "eps": self.eps, "lambda": self.lam,
                "x0": self.x0, "ell": self.ell, "cases": list(self.cases),
                "density_bounds": [list(d) for d in self.density_bounds],
                "stop_reason": self.stop_reason}


BN_GRID_DENSITY = 200  # points per unit of log log x


def construct_bn(spec: Evaluable, ell, eps, lam, x0, max_n=50, horizon=None, *,
                 log_horizon=None, grid_density=BN_GRID_DENSITY) -> BnSequence:
    """The sequence b_n of the statistical-to-ordinary proof, on a log log grid.

    b_1 is the first grid point >= x0 with |s - ell| <= eps.  Each step looks
    for such a point in (b_n^sqrt(lam), b_n^lam) (case i), else at or beyond
    b_n^lam (case ii).
    """
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    lh = log_horizon if log_horizon is not None else math.log(horizon)
    lh = min(lh, spec.log_max)
    lx0 = math.log(x0)
    if not lh > lx0:
        raise HorizonError("horizon must exceed x0")
    y = np.arange(math.log(lx0), math.log(lh), 1.0 / grid_density)
    grid = np.exp(y)
    grid[0] = lx0
    good = np.abs(spec.eval_u(grid) - ell) <= eps
    idx = np.flatnonzero(good)
    if not len(idx):
        raise HypothesisError("no b_1: |s - ell| > eps on the whole grid, "
                              "which contradicts the statistical-limit evidence")
    log_b = [grid[idx[0]]]
    cases, bounds = [], []
    n0 = 0
    stop = "max_n"
    r = math.sqrt(lam)
    while len(log_b) < max_n:
        cur = log_b[-1]
        lo = np.searchsorted(grid, r * cur, side="right")
        hi = np.searchsorted(grid, lam * cur, side="left")
        cand = idx[(idx >= lo) & (idx < hi)]
        if len(cand):
            log_b.append(grid[cand[0]])
            cases.append("i")
            continue
        cand = idx[idx >= hi]
        if hi >= len(grid) or not len(cand):
            stop = "horizon"
            break
        log_b.append(grid[cand[0]])
        cases.append("ii")
        n0 = len(log_b) - 1
        # exceptional density on (b_n^sqrt(lam), b_n^lam) normalized by b_n
        # and by the right endpoint b_n^lam
        by_bn = math.exp(min((lam - 1) * cur, 709.0)) - math.exp(min((r - 1) * cur, 709.0))
        by_right = -math.expm1((r - lam) * cur)
        bounds.append((len(log_b) - 1, by_bn, by_right))
    return BnSequence(tuple(float(v) for v in log_b), n0, float(eps), float(lam), float(x0),
                      ell, tuple(cases), tuple(bounds), stop)


@dataclass(frozen=True)
class JDecomposition:
    log_x: float
    log_t: float
    log_x0: float
    J1: float
    J2: float
    J3: float
    J4: float
    total: float

    @property
    def residual(self):
        return abs(self.J1 + self.J2 + self.J3 + self.J4 - self.total)

    def as_dict(self):
        return {"log_x": self.log_x, "log_t": self.log_t, "log_x0": self.log_x0,
                "J1": _num(self.J1), "J2": _num(self.J2), "J3": _num(self.J3),
                "J4": _num(self.J4), "total": _num(self.total), "residual": self.residual}


def _num(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def j_decomposition(spec: Evaluable, x=None, t=None, x0=None, abs_tol=DEFAULT_ABS_TOL, *,
                    log_x=None, log_t=None, log_x0=None) -> JDecomposition:
    """Split tau(t) - tau(x) into the four terms J1..J4 and record tau(t) - tau(x)."""
    lx = log_x if log_x is not None else math.log(x)
    lt = log_t if log_t is not None else math.log(t)
    l0 = log_x0 if log_x0 is not None else math.log(x0)
    if not l0 > 1:
        raise HypothesisError("need x0 > e")
    if not l0 <= lx < lt:
        raise HypothesisError("need x0 <= x < t")
    spec.check_horizon(lt)
    sx = spec.eval_u(np.array([lx]))[0]
    delta = 1.0 / lx - 1.0 / lt
    bp = spec.breakpoints_u(0.0, lt)
    const = spec.constant_segments

    J1 = delta * l0 * sx
    J2 = -delta * integrate_weighted_u(spec, 0.0, l0, abs_tol)
    if lx > l0:
        i3, _ = integrate_intervals(lambda u: sx - spec.eval_u(u), [l0, lx], abs_tol / (lx - l0),
                                    bp, const)
        J3 = delta * i3[0]
    else:
        J3 = 0.0 * sx
    i4, _ = integrate_intervals(lambda u: spec.eval_u(u) - sx, [lx, lt], abs_tol / (lt - lx), bp, const)
    J4 = i4[0] / lt
    total = log_mean_u(spec, lt, abs_tol) - log_mean_u(spec, lx, abs_tol)
    return JDecomposition(lx, lt, l0, J1, J2, J3, J4, total)


@dataclass(frozen=True)
class LiminfReport:
    x0: float
    lam: float
    rows: tuple  # (p, log x_p, s(x_p)/x_p, (s(x0) - p)/x_p, chain inequality holds)
    passed: bool

    def as_dict(self):
        return {"x0": self.x0, "lambda": self.lam, "passed": self.passed,
                "rows": [{"p": r[0], "log_x": r[1], "ratio": r[2], "lower_bound": r[3],
                          "chain_ok": r[4]} for r in self.rows]}


def check_liminf_s_over_x(spec: Evaluable, window: SlowWindow, probe_ps=range(1, 40)) -> LiminfReport:
    """s(x0^(lam^p)) - s(x0) >= -p, and the ratio s/x at those points tends to >= 0."""
    log_cap = math.log(1e300)
    lx0 = math.log(window.x0)
    _require_window(spec, window, "decrease",
                    min(log_cap, spec.log_max) / window.lam)
    s0 = spec.eval_u(np.array([lx0]))[0]
    rows = []
    ok = True
    for p in probe_ps:
        lxp = lx0 * window.lam ** p
        if lxp > min(log_cap, spec.log_max):
            break
        sp = float(spec.eval_u(np.array([lxp]))[0])
        scale = math.exp(-lxp)
        ratio = sp * scale
        bound = (s0 - p) * scale
        chain_ok = sp - s0 >= -p - 1e-9
        ok &= chain_ok and ratio >= bound - 1e-300
        rows.append((int(p), lxp, ratio, bound, bool(chain_ok)))
    if rows:
        # the last probe is the closest to the limit and must not be the worst
        ok &= rows[-1][2] >= min(r[2] for r in rows)
    return LiminfReport(window.x0, window.lam, tuple(rows), bool(ok))
