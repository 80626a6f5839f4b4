"""End-to-end checks of the Tauberian implications over a set of functions.

Each theorem is an implication "window + limit of the mean => ordinary limit
of s at the same ell".  A case is

* ``pass`` when the hypotheses are observed and s has the same limit,
* ``consistent-control`` when some hypothesis is absent (nothing to check),
* ``inconclusive`` when a detector cannot decide at the given horizons,
* ``counterexample`` when the hypotheses are observed but the conclusion
  fails.  Since the implications are theorems this signals a defect here.
"""

from __future__ import annotations

import csv
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .config import RunConfig
from .corpus import builtin_corpus
from .funcspec import Evaluable
from .logmean import tau_function
from .statlimit import LimitVerdict, detect_ordinary_limit, detect_statistical_limit
from .tauber import find_window

THEOREMS = ("A", "B", "1", "2", "3", "4")
STATUSES = ("pass", "consistent-control", "inconclusive", "counterexample")

# which window each implication needs, and what the limit hypothesis is about
_WINDOW_MODE = {"A": "decrease", "1": "decrease", "3": "decrease",
                "B": "oscillation", "2": "oscillation", "4": "oscillation"}
_LIMIT_KIND = {"A": "tau-ordinary", "B": "tau-ordinary",
               "1": "s-statistical", "2": "s-statistical",
               "3": "tau-statistical", "4": "tau-statistical"}


def applicable(theorem_id: str, spec: Evaluable) -> bool:
    """Slow decrease only makes sense for real-valued functions."""
    return not (spec.is_complex and _WINDOW_MODE[theorem_id] == "decrease")


def effective_log_horizons(spec: Evaluable, log_horizons) -> tuple:
    """Horizons within the function's domain.

    When truncation leaves fewer than three, the function's own horizon is
    appended so the detectors still see three nested windows.
    """
    hs = tuple(float(h) for h in log_horizons if h <= spec.log_max)
    if len(hs) < 3 and math.isfinite(spec.log_max) and (not hs or spec.log_max > hs[-1]):
        hs = hs + (float(spec.log_max),)
    return hs


def _verdict_dict(v: Optional[LimitVerdict]):
    return None if v is None else v.as_dict()


def _ell_distance(a, b):
    return abs(complex(a) - complex(b))


class Evidence:
    """Detector results for one function, computed lazily and shared across theorems."""

    def __init__(self, spec: Evaluable, config: RunConfig):
        self.spec = spec
        self.config = config
        self.log_horizons = effective_log_horizons(spec, config.log_horizons)
        self._lock = threading.RLock()
        self._cache = {}

    def _memo(self, key, compute):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]

    def windows(self, mode):
        """find_window for every eps, stopping at the first eps that fails."""
        def compute():
            out = []
            for eps in sorted(self.config.window_eps, reverse=True):
                w = find_window(self.spec, eps, mode, self.config.search_budget,
                                grid_density=self.config.grid_density)
                out.append({"eps": eps, "found": w is not None,
                            "window": None if w is None else w.as_dict()})
                if w is None:
                    break
            return out
        return self._memo(("window", mode), compute)

    def window_ok(self, mode):
        ws = self.windows(mode)
        return len(ws) == len(self.config.window_eps) and all(w["found"] for w in ws)

    def horizons_usable(self, lh=None):
        lh = self.log_horizons if lh is None else lh
        return len(lh) >= 3 and (lh[-1] - lh[0]) / math.log(10) >= 2

    @property
    def previous_horizons(self):
        """The horizon set without its last member, or None when too short."""
        lh = self.log_horizons[:-1]
        return lh if self.horizons_usable(lh) else None

    def tau(self):
        def compute():
            return tau_function(self.spec, self.log_horizons[-1], self.config.tau_points,
                                self.config.abs_tol)
        return self._memo("tau", compute)

    def limit(self, kind, log_horizons=None) -> LimitVerdict:
        c = self.config
        lh = self.log_horizons if log_horizons is None else tuple(log_horizons)

        def compute():
            if kind == "tau-ordinary":
                return detect_ordinary_limit(self.tau()[0], tol=c.ordinary_tol, log_horizons=lh)
            if kind == "s-ordinary":
                return detect_ordinary_limit(self.spec, tol=c.ordinary_tol, log_horizons=lh)
            target = self.spec if kind == "s-statistical" else self.tau()[0]
            return detect_statistical_limit(target, epsilons=c.epsilons,
                                            decay_threshold=c.decay_threshold, log_horizons=lh)
        return self._memo((kind, lh), compute)


@dataclass(frozen=True)
class TheoremCase:
    theorem_id: str
    spec_name: str
    status: str
    window_mode: str
    windows: list
    hypothesis_limit: Optional[dict]
    conclusion: Optional[dict]
    log_horizons: tuple
    tolerance: float
    note: str = ""
    interpolation_error: Optional[float] = None
    hypothesis_kind: str = ""

    @property
    def hypothesis_held(self):
        return self.status in ("pass", "counterexample")

    def as_dict(self):
        return {"theorem_id": self.theorem_id, "spec": self.spec_name, "status": self.status,
                "hypothesis": {"window_mode": self.window_mode, "windows": self.windows,
                               "limit_kind": self.hypothesis_kind,
                               "limit": self.hypothesis_limit},
                "conclusion": self.conclusion, "log_horizons": list(self.log_horizons),
                "tolerance": self.tolerance, "interpolation_error": self.interpolation_error,
                "note": self.note}

    def csv_rows(self):
        rows = [("case", "theorem", self.theorem_id), ("case", "spec", self.spec_name),
                ("case", "status", self.status), ("case", "note", self.note),
                ("case", "log_horizons", " ".join(repr(h) for h in self.log_horizons))]
        for w in self.windows:
            win = w["window"] or {}
            rows.append(("window", f"eps={w['eps']!r}",
                         f"found={w['found']} x0={win.get('x0')} lambda={win.get('lambda')}"))
        for label, v in (("hypothesis", self.hypothesis_limit), ("conclusion", self.conclusion)):
            if v is not None:
                rows.append((label, "kind", v["kind"]))
                rows.append((label, "ell", repr(v["ell"])))
        return rows


def combined_tolerance(theorem_id, config: RunConfig):
    """Tolerance for 'same ell': the ordinary detector's plus the hypothesis detector's."""
    if _LIMIT_KIND[theorem_id] == "tau-ordinary":
        return 2 * config.ordinary_tol
    return config.ordinary_tol + min(config.epsilons)


def run_theorem(theorem_id: str, spec: Evaluable, config: RunConfig = RunConfig(),
                evidence: Optional[Evidence] = None) -> TheoremCase:
    if theorem_id not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem_id!r}")
    if not applicable(theorem_id, spec):
        raise ValueError(f"theorem {theorem_id} needs a real-valued function")
    ev = evidence or Evidence(spec, config)
    mode = _WINDOW_MODE[theorem_id]
    kind = _LIMIT_KIND[theorem_id]
    tol = combined_tolerance(theorem_id, config)

    def case(status, note, hyp=None, concl=None):
        err = ev.tau()[1] if kind != "s-statistical" and "tau" in ev._cache else None
        return TheoremCase(theorem_id, spec.name, status, mode, ev.windows(mode),
                           _verdict_dict(hyp), _verdict_dict(concl), ev.log_horizons, tol,
                           note, err, kind)

    window_ok = ev.window_ok(mode)
    if not ev.horizons_usable():
        if not window_ok:
            return case("consistent-control", "hypothesis not satisfied: no window; "
                        "horizons too short for limit detectors")
        return case("inconclusive", "horizons too short for limit detectors")

    hyp = ev.limit(kind)
    concl = ev.limit("s-ordinary")
    wanted = "ordinary" if kind == "tau-ordinary" else "statistical"
    if not window_ok or hyp.kind == "none":
        missing = "no window" if not window_ok else f"no {kind} limit"
        outcome = {"ordinary": "conclusion holds", "none": "conclusion fails",
                   "inconclusive": "conclusion undecided"}[concl.kind]
        return case("consistent-control",
                    f"hypothesis not satisfied ({missing}); {outcome}; no contradiction",
                    hyp, concl)
    if hyp.kind != wanted:
        return case("inconclusive", f"{kind} detector inconclusive", hyp, concl)
    # hysteresis: the limit must already be visible one horizon earlier, at the same ell
    prev_lh = ev.previous_horizons
    if prev_lh is not None:
        prev = ev.limit(kind, prev_lh)
        if prev.kind != wanted or _ell_distance(prev.ell, hyp.ell) > tol:
            return case("inconclusive", f"{kind} limit not stable across horizons", hyp, concl)
    if concl.kind == "inconclusive":
        return case("inconclusive", "ordinary-limit detector inconclusive", hyp, concl)
    if concl.kind == "ordinary" and _ell_distance(hyp.ell, concl.ell) <= tol:
        return case("pass", "hypotheses observed; s has the same limit", hyp, concl)
    if concl.kind == "ordinary":
        return case("counterexample", "limits differ beyond tolerance", hyp, concl)
    return case("counterexample", "hypotheses observed but s has no limit", hyp, concl)


@dataclass
class SuiteReport:
    cases: list
    config: RunConfig
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.summary = {s: sum(c.status == s for c in self.cases) for s in STATUSES}

    @property
    def counterexamples(self):
        return [c for c in self.cases if c.status == "counterexample"]

    @property
    def exit_code(self):
        return 1 if self.counterexamples else 0

    def as_dict(self):
        return {"cases": [c.as_dict() for c in self.cases], "summary": self.summary}

    def table(self) -> str:
        lines = [f"{'thm':<4}{'function':<12}{'status':<20}note"]
        for c in self.cases:
            lines.append(f"{c.theorem_id:<4}{c.spec_name:<12}{c.status:<20}{c.note}")
        lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in self.summary.items()))
        return "\n".join(lines)

    def write_bundles(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        for c in self.cases:
            path = os.path.join(out_dir, f"theorem{c.theorem_id}_{c.spec_name}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["section", "key", "value"])
                w.writerows(c.csv_rows())


def select_specs(config: RunConfig, extra=()):
    specs = [e.spec for e in builtin_corpus()]
    if config.corpus is not None:
        wanted = set(config.corpus)
        unknown = wanted - {s.name for s in specs}
        if unknown:
            raise ValueError(f"unknown corpus members: {', '.join(sorted(unknown))}")
        specs = [s for s in specs if s.name in wanted]
    return specs + list(extra)


def _run_spec(spec, config):
    ev = Evidence(spec, config)
    return [run_theorem(t, spec, config, ev) for t in THEOREMS if applicable(t, spec)]


def run_suite(config: RunConfig = RunConfig(), extra_specs=()) -> SuiteReport:
    """Every applicable theorem x function case; functions run in parallel."""
    specs = select_specs(config, extra_specs)
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("function names must be unique")
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(lambda s: _run_spec(s, config), specs))
    cases = sorted((c for r in results for c in r), key=lambda c: (c.theorem_id, c.spec_name))
    report = SuiteReport(cases, config)
    if config.out_dir:
        report.write_bundles(config.out_dir)
    return report


@dataclass(frozen=True)
class ObservedClassification:
    spec_name: str
    slowly_decreasing: Optional[bool]
    slowly_oscillating: bool
    l1_summable: Optional[bool]
    statistical: Optional[bool]
    ordinary: Optional[bool]
    tau_limit: object = None
    stat_limit: object = None
    ordinary_limit: object = None

    def as_dict(self):
        def j(v):
            return [v.real, v.imag] if isinstance(v, complex) else v
        return {k: j(v) for k, v in self.__dict__.items()}


def classify(spec: Evaluable, config: RunConfig = RunConfig(log_horizons=(8.0, 16.0, 32.0, 64.0)),
             evidence: Optional[Evidence] = None) -> ObservedClassification:
    """Detector-based classification; inconclusive verdicts map to None."""
    ev = evidence or Evidence(spec, config)

    def flag(kind, positive):
        v = ev.limit(kind)
        return None if v.kind == "inconclusive" else v.kind == positive, v

    sd = None if spec.is_complex else ev.window_ok("decrease")
    so = ev.window_ok("oscillation")
    l1, tau_v = flag("tau-ordinary", "ordinary")
    st, st_v = flag("s-statistical", "statistical")
    od, od_v = flag("s-ordinary", "ordinary")
    return ObservedClassification(spec.name, sd, so, l1, st, od,
                                  tau_v.ell if l1 else None, st_v.ell if st else None,
                                  od_v.ell if od else None)
