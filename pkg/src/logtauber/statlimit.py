"""Statistical limits at infinity: exceptional-set measures and limit detectors.

The exceptional set {x in (a, b): |s(x) - ell| > eps} is located exactly, up to
root-finding precision, by isolating the roots of |s - ell|^2 - eps^2 on each
smooth segment.  Everything is done in u = log x; lengths are converted back
to Lebesgue measure in x only at the end, scaled by the horizon so huge
horizons do not overflow.

The detectors work on finite horizons and are heuristics.  Their thresholds
are policy, and every verdict says so in its evidence.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .funcspec import Evaluable

GRID_STEP_U = 0.01
MIN_GRID = 16
MC_SAMPLES = 1_000_000
DEFAULT_EPSILONS = (0.5, 0.25, 0.1)
DEFAULT_DECAY_THRESHOLD = 0.02
DEFAULT_LOG_HORIZONS = (4.0, 8.0, 16.0, 32.0)
DEFAULT_ORDINARY_TOL = 0.1
TAIL_SAMPLES = 20_000
ORDINARY_GRID = 10_000
POLICY_NOTE = "finite-horizon heuristic; thresholds are artifact policy, not a proof"


def _scaled_length(lo, hi, ref):
    """(e^hi - e^lo) / e^ref without overflow."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return np.exp(hi - ref) * -np.expm1(lo - hi)


def _segments(f: Evaluable, lo_u, hi_u):
    edges = np.concatenate([[lo_u], f.breakpoints_u(lo_u, hi_u), [hi_u]])
    a, b = edges[:-1], edges[1:]
    keep = b > a
    return a[keep], b[keep]


def _grid(a, b, step, min_points):
    """Per-segment grids of points on [a_i, b_i), the last one just below b_i."""
    n = np.maximum(min_points, np.ceil((b - a) / step)).astype(np.int64)
    seg = np.repeat(np.arange(len(a)), n + 1)
    k = np.arange(len(seg)) - np.repeat(np.cumsum(n + 1) - (n + 1), n + 1)
    pts = a[seg] + (b - a)[seg] * (k / n[seg])
    last = k == n[seg]
    pts[last] = np.nextafter(b[seg][last], -np.inf)
    return pts, seg, n


def _bisect(g, lo, hi, lo_positive):
    """Vectorized bisection; ``lo_positive`` is the sign of g at ``lo``."""
    lo, hi = lo.copy(), hi.copy()
    for _ in range(200):
        width = hi - lo
        if np.all(width <= 1e-12 * np.maximum(1.0, np.abs(lo))):
            break
        mid = 0.5 * (lo + hi)
        pos = g(mid) > 0
        same = pos == lo_positive
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ExceptionalSet:
    """Union of intervals (in log x) where |s - ell| > eps, on (lo_u, hi_u)."""

    lo: np.ndarray
    hi: np.ndarray
    span: tuple
    exact: bool = True
    # Monte Carlo fallback for segments whose roots could not be isolated:
    # (log segment bounds, estimated positive fraction, standard error)
    fallback: tuple = ()

    def measure_scaled(self, lo_u, hi_u, ref):
        """Measure within (e^lo_u, e^hi_u), divided by e^ref; returns (value, radius)."""
        a = np.clip(self.lo, lo_u, hi_u)
        b = np.clip(self.hi, lo_u, hi_u)
        value = float(np.sum(_scaled_length(a, b, ref)))
        radius = 0.0
        for (sa, sb), p, se in self.fallback:
            a, b = min(max(sa, lo_u), hi_u), min(max(sb, lo_u), hi_u)
            length = float(_scaled_length(a, b, ref))
            value += p * length
            radius += 3 * se * length
        return value, radius


def exceptional_set(f: Evaluable, ell, eps, lo_u, hi_u, step=GRID_STEP_U) -> ExceptionalSet:
    if not eps > 0:
        raise ValueError("eps must be positive")
    f.check_horizon(hi_u)

    def g(u):
        return np.abs(f.eval_u(u) - ell) ** 2 - eps ** 2

    a, b = _segments(f, lo_u, hi_u)
    const = f.constant_segments(a, b)
    out_lo, out_hi = [], []
    if np.any(const):
        ca, cb = a[const], b[const]
        pos = g(0.5 * (ca + cb)) > 0
        out_lo.append(ca[pos])
        out_hi.append(cb[pos])
    a, b = a[~const], b[~const]
    exact = True
    fallback = []
    if len(a):
        pts, seg, n = _grid(a, b, step, MIN_GRID)
        fine, fseg, _ = _grid(a, b, step / 2, 2 * MIN_GRID)
        pos = g(pts) > 0
        fpos = g(fine) > 0
        same_seg = seg[1:] == seg[:-1]
        flips = same_seg & (pos[1:] != pos[:-1])
        fflips = (fseg[1:] == fseg[:-1]) & (fpos[1:] != fpos[:-1])
        coarse_count = np.bincount(seg[:-1][flips], minlength=len(a))
        fine_count = np.bincount(fseg[:-1][fflips], minlength=len(a))
        bad = coarse_count != fine_count

        cell = same_seg & ~bad[seg[:-1]]
        left, right = pts[:-1], pts[1:]
        both = cell & pos[:-1] & pos[1:]
        out_lo.append(left[both])
        out_hi.append(right[both])
        cross = cell & flips
        if np.any(cross):
            r = _bisect(g, left[cross], right[cross], pos[:-1][cross])
            starts_pos = pos[:-1][cross]
            out_lo.append(np.where(starts_pos, left[cross], r))
            out_hi.append(np.where(starts_pos, r, right[cross]))
        # the last grid point sits just below b; close the gap to b
        ends = ~np.append(same_seg, False)
        tail = ends & pos & ~bad[seg]
        out_lo.append(pts[tail])
        out_hi.append(b[seg[tail]])

        if np.any(bad):
            exact = False
            fallback = _monte_carlo(g, a[bad], b[bad])
    lo = np.concatenate(out_lo) if out_lo else np.zeros(0)
    hi = np.concatenate(out_hi) if out_hi else np.zeros(0)
    order = np.argsort(lo, kind="stable")
    return ExceptionalSet(lo[order], hi[order], (lo_u, hi_u), exact, tuple(fallback))


def _monte_carlo(g, a, b, n_total=MC_SAMPLES, seed=0):
    """Stratified estimate of the positive fraction of each segment, in x-measure."""
    rng = np.random.default_rng(seed)
    ref = float(np.max(b))
    w = _scaled_length(a, b, ref)
    counts = np.maximum(1000, np.round(n_total * w / w.sum())).astype(np.int64)
    out = []
    for sa, sb, m in zip(a, b, counts):
        frac = (np.arange(m) + rng.random(m)) / m
        # x uniform on (e^sa, e^sb), written in logs
        u = sb + np.log(frac + (1 - frac) * math.exp(sa - sb))
        hits = g(np.minimum(u, np.nextafter(sb, -np.inf))) > 0
        p = float(hits.mean())
        se = math.sqrt(max(p * (1 - p), 1.0 / m) / m)
        out.append(((float(sa), float(sb)), p, se))
    return out


@dataclass(frozen=True)
class MeasureResult:
    value: float
    lo: float
    hi: float
    exact: bool
    method: str

    def __float__(self):
        return self.value


def exceptional_measure(f: Evaluable, ell, eps, b, a=1.0, *, log_b=None) -> MeasureResult:
    """Lebesgue measure of {x in (a, b): |s(x) - ell| > eps}.

    Exact (root isolation) unless some segment has more sign changes than the
    grid resolves; then those segments fall back to stratified Monte Carlo and
    [lo, hi] is a 3-sigma interval.
    """
    lo_u = math.log(a)
    hi_u = log_b if log_b is not None else math.log(b)
    if not hi_u > lo_u:
        raise ValueError("need b > a")
    ex = exceptional_set(f, ell, eps, lo_u, hi_u)
    scaled, radius = ex.measure_scaled(lo_u, hi_u, hi_u)
    scale = math.exp(hi_u) if hi_u < 709 else math.inf
    value = scaled * scale
    if ex.exact:
        return MeasureResult(value, value, value, True, "root-isolation")
    return MeasureResult(value, max(0.0, (scaled - radius) * scale),
                         (scaled + radius) * scale, False, "monte-carlo")


@dataclass(frozen=True)
class DensityProfile:
    ell: complex
    epsilons: tuple
    log_horizons: tuple
    density: np.ndarray  # shape (len(epsilons), len(horizons))
    exact: bool = True

    @property
    def horizons(self):
        return tuple(math.exp(h) if h < 709 else math.inf for h in self.log_horizons)

    @property
    def measure(self):
        with np.errstate(over="ignore"):
            return self.density * np.expm1(np.array(self.log_horizons))[None, :]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "b", "measure", "density"])
        m = self.measure
        for i, eps in enumerate(self.epsilons):
            for j, b in enumerate(self.horizons):
                w.writerow([repr(float(eps)), repr(b), repr(float(m[i, j])),
                            repr(float(self.density[i, j]))])
        return buf.getvalue()


def density_profile(f: Evaluable, ell, epsilons, horizons=None, *, log_horizons=None) -> DensityProfile:
    """D[eps][b] = |{x in (1, b): |s(x) - ell| > eps}| / (b - 1)."""
    eps = tuple(float(e) for e in epsilons)
    if any(e <= 0 for e in eps) or any(x <= y for x, y in zip(eps, eps[1:])):
        raise ValueError("epsilons must be positive and decreasing")
    lh = tuple(log_horizons) if log_horizons is not None else tuple(math.log(b) for b in horizons)
    if any(h <= 0 for h in lh) or any(x >= y for x, y in zip(lh, lh[1:])):
        raise ValueError("horizons must exceed 1 and increase")
    D = np.zeros((len(eps), len(lh)))
    exact = True
    for i, e in enumerate(eps):
        ex = exceptional_set(f, ell, e, 0.0, lh[-1])
        exact &= ex.exact
        for j, h in enumerate(lh):
            scaled, _ = ex.measure_scaled(0.0, h, h)
            D[i, j] = min(1.0, scaled / -math.expm1(-h))
    return DensityProfile(ell, eps, lh, D, exact)


@dataclass(frozen=True)
class LimitVerdict:
    kind: str  # none | statistical | ordinary | inconclusive
    ell: object
    evidence: dict = field(default_factory=dict)

    def as_dict(self):
        ell = self.ell
        if isinstance(ell, complex):
            ell = [ell.real, ell.imag]
        return {"kind": self.kind, "ell": ell, "evidence": self.evidence}


def default_log_horizons(f: Evaluable, base=DEFAULT_LOG_HORIZONS):
    hs = tuple(h for h in base if h <= f.log_max)
    return hs


def _check_horizons(lh):
    if len(lh) < 3:
        raise ValueError("need at least three horizons")
    if (lh[-1] - lh[0]) / math.log(10) < 2:
        raise ValueError("horizons must span at least two decades")
    if any(x >= y for x, y in zip(lh, lh[1:])):
        raise ValueError("horizons must increase")


def _tail_points(lo_u, hi_u, n=TAIL_SAMPLES):
    """Log of n stratified midpoints, uniform in x on (e^lo_u, e^hi_u)."""
    frac = (np.arange(n) + 0.5) / n
    return hi_u + np.log(frac + (1 - frac) * math.exp(lo_u - hi_u))


def tail_median(f: Evaluable, lo_u, hi_u):
    v = f.eval_u(_tail_points(lo_u, hi_u))
    if np.iscomplexobj(v):
        return complex(np.median(v.real), np.median(v.imag))
    return float(np.median(v))


def _as_log_horizons(f, horizons, log_horizons):
    if log_horizons is not None:
        return tuple(float(h) for h in log_horizons)
    if horizons is not None:
        return tuple(math.log(b) for b in horizons)
    return default_log_horizons(f)


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    return float(v)


def detect_statistical_limit(f: Evaluable, horizons=None, epsilons=DEFAULT_EPSILONS,
                             decay_threshold=DEFAULT_DECAY_THRESHOLD, *,
                             log_horizons=None) -> LimitVerdict:
    """Finite-horizon evidence for st-lim s(x) = ell.

    The candidate ell is the median of s (in x-measure) over the last horizon
    window [b_{k-1}, b_k].  The verdict is statistical when, for every eps,
    the density at the largest horizon is below ``decay_threshold`` and the
    densities do not increase over the last three horizons.  The candidate
    must also be stable: the median over the previous window may differ from
    ell by at most min(eps); a drifting median (loglog x) means no limit.
    """
    lh = _as_log_horizons(f, horizons, log_horizons)
    _check_horizons(lh)
    ell = tail_median(f, lh[-2], lh[-1])
    previous = tail_median(f, lh[-3], lh[-2])
    stable = abs(ell - previous) <= min(epsilons)
    prof = density_profile(f, ell, epsilons, log_horizons=lh)
    last3 = prof.density[:, -3:]
    small = bool(np.all(prof.density[:, -1] < decay_threshold))
    monotone = bool(np.all(np.diff(last3, axis=1) <= 1e-9))
    if small and monotone and stable:
        kind = "statistical"
    elif small and stable:
        kind = "inconclusive"
    else:
        kind = "none"
    evidence = {
        "log_horizons": list(lh),
        "tail_densities": {repr(e): [float(d) for d in row] for e, row in zip(prof.epsilons, prof.density)},
        "tail_median": _jsonable(ell),
        "previous_window_median": _jsonable(previous),
        "median_stable": bool(stable),
        "decay_threshold": decay_threshold,
        "densities_nonincreasing": monotone,
        "exact_measure": prof.exact,
        "note": POLICY_NOTE,
    }
    return LimitVerdict(kind, ell, evidence)


def tail_range(f: Evaluable, lo_u, hi_u, n=ORDINARY_GRID):
    """Sampled values of s on [e^lo_u, e^hi_u]: a log grid per smooth segment,
    one value per constant segment, plus both sides of every breakpoint."""
    a, b = _segments(f, lo_u, hi_u)
    const = f.constant_segments(a, b)
    pts = [0.5 * (a[const] + b[const])]
    for sa, sb in zip(a[~const], b[~const]):
        pts.append(np.linspace(sa, np.nextafter(sb, -np.inf), n))
    bp = f.breakpoints_u(lo_u, hi_u)
    pts += [bp, np.nextafter(bp, -np.inf), np.array([lo_u, hi_u])]
    return f.eval_u(np.concatenate(pts))


def detect_ordinary_limit(f: Evaluable, horizons=None, tol=DEFAULT_ORDINARY_TOL, *,
                          log_horizons=None) -> LimitVerdict:
    """Ordinary limit when sup - inf of s over the last horizon window is below tol.

    Oscillation in [tol, 2 tol] is reported as inconclusive.  For complex s
    the oscillation is the larger of the real and imaginary ranges.
    """
    lh = _as_log_horizons(f, horizons, log_horizons)
    _check_horizons(lh)
    v = tail_range(f, lh[-2], lh[-1])
    if np.iscomplexobj(v):
        osc = max(np.ptp(v.real), np.ptp(v.imag))
        ell = complex(0.5 * (v.real.max() + v.real.min()), 0.5 * (v.imag.max() + v.imag.min()))
    else:
        osc = float(np.ptp(v))
        ell = 0.5 * float(v.max() + v.min())
    osc = float(osc)
    if osc < tol:
        kind = "ordinary"
    elif osc <= 2 * tol:
        kind = "inconclusive"
    else:
        kind = "none"
    evidence = {"log_horizons": list(lh), "tail_window_log": [lh[-2], lh[-1]],
                "oscillation": osc, "tol": tol, "note": POLICY_NOTE}
    return LimitVerdict(kind, ell, evidence)
