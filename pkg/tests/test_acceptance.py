"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a single ``CRITERION n: PASS|FAIL`` line (visible even when
pytest captures output) before asserting.
"""

import math
import time

import numpy as np
import pytest

from logtauber import (build_chain, construct_bn, detect_ordinary_limit, detect_statistical_limit,
                       exceptional_measure, find_window, j_decomposition, log_mean, parse,
                       verify_lemma1, verify_lemma3, verify_lemma4)
from logtauber.corpus import builtin_corpus, get
from logtauber.harness import effective_log_horizons
from logtauber.lemmas import default_t_samples
from logtauber.logmean import loglog_grid, mean_curve
from logtauber.statlimit import DEFAULT_EPSILONS, DEFAULT_ORDINARY_TOL
from logtauber.tauber import DEFAULT_X0_SCHEDULE, SlowWindow


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def test_criterion_01_constant_exactness(report):
    start = time.perf_counter()
    f = get("C1")
    U = loglog_grid(1.0, 64.0, 51)[1:]  # 50 points, t in (e, e^64]
    curve = mean_curve(f, log_t_min=float(U[0]), log_t_max=64.0, n_points=50)
    err = float(np.max(np.abs(curve.tau - 3.5)))
    elapsed = time.perf_counter() - start
    report(1, err <= 1e-9 and elapsed < 1.0 and len(curve.tau) == 50,
           f"max |tau - 3.5| = {err:.2e} over 50 points, {elapsed:.3f} s")


def test_criterion_02_closed_form_oracles(report):
    curve = mean_curve(get("S1"), log_t_min=1.0, log_t_max=math.exp(4.0), n_points=400)
    U = curve.log_t
    err = float(np.max(np.abs(curve.tau - (1 - np.cos(U)) / U)))
    err_log = abs(log_mean(parse("log(x)"), math.e ** 2) - 1.0)
    report(2, err <= 1e-8 and err_log <= 1e-9,
           f"S1 max error {err:.2e} up to e^(e^4); |tau(e^2) - 1| for log x = {err_log:.2e}")


def test_criterion_03_statistical_limit_reproduction(report):
    f = get("S2")
    targets = {1e2: 8 / 99, 1e3: 29 / 999, 1e4: 98 / 9999}
    got = {}
    exact = True
    for b, want in targets.items():
        m = exceptional_measure(f, 0.0, 0.5, b)
        exact &= m.exact
        got[b] = m.value / (b - 1)
    errs = {b: abs(got[b] - targets[b]) for b in targets}
    v = detect_statistical_limit(f)
    ok = all(e <= 1e-6 for e in errs.values()) and exact and v.kind == "statistical" and v.ell == 0.0
    detail = ", ".join(f"b={b:g}: {got[b]:.7f} vs {targets[b]:.7f}" for b in targets)
    report(3, ok, f"{detail}; detector {v.kind}, ell = {v.ell}")


def test_criterion_04_implication_ordering(report):
    tol = DEFAULT_ORDINARY_TOL + min(DEFAULT_EPSILONS)
    violations = []
    for e in builtin_corpus():
        lh = effective_log_horizons(e.spec, (4.0, 8.0, 16.0, 32.0))
        o = detect_ordinary_limit(e.spec, log_horizons=lh)
        if o.kind != "ordinary":
            continue
        s = detect_statistical_limit(e.spec, log_horizons=lh)
        if s.kind != "statistical" or abs(complex(s.ell) - complex(o.ell)) > tol:
            violations.append(e.name)
    report(4, not violations, f"ordinary => statistical violations: {violations or 'none'} (7 members)")


def test_criterion_05_lemma1_bound(report):
    start = time.perf_counter()
    rep = verify_lemma1(get("L2"), SlowWindow(1.0, math.e ** 2, 2.0), math.exp(3.0))
    elapsed = time.perf_counter() - start
    ok = (rep.passed and rep.n_tested == 10_000 and rep.margin >= -1e-7
          and abs(rep.B1 - 2.8853901) < 1e-7 and elapsed < 10)
    report(5, ok, f"{rep.n_tested} pairs, worst margin {rep.margin:.6f}, B1 = {rep.B1:.7f}, {elapsed:.2f} s")


def test_criterion_06_lemma3_lemma4(report):
    worst = {}
    ok = True
    for name in ("L1", "L2", "O1"):
        f = get(name)
        for lemma, mode, fn in ((3, "decrease", verify_lemma3), (4, "oscillation", verify_lemma4)):
            w = find_window(f, 1.0, mode, x0_schedule=DEFAULT_X0_SCHEDULE[1:])
            samples = default_t_samples(w.x0, w.lam, 64.0)
            rep = fn(f, SlowWindow(1.0, w.x0, w.lam, mode), samples)
            ok &= rep.passed and rep.margin >= -1e-7 and bool(np.all(samples <= 64.0))
            worst[f"{name}/L{lemma}"] = rep.margin
    report(6, ok, "worst margins " + ", ".join(f"{k}: {v:.4f}" for k, v in worst.items()))


def test_criterion_07_telescoping(report):
    rng = np.random.default_rng(7)
    names = [e.name for e in builtin_corpus()]
    worst, q_ok = 0.0, True
    for _ in range(100):
        f = get(names[rng.integers(len(names))])
        top = min(f.log_max, 200.0)
        lam = rng.uniform(1.05, 4.0)
        lx = rng.uniform(0.5, top / lam / 1.01)
        lt = rng.uniform(lam * lx * 1.001, top)
        chain = build_chain(log_t=lt, log_x=lx, lam=lam)
        q_ok &= chain.q < chain.q_bound()
        d = f.eval_u(np.array([lt]))[0] - f.eval_u(np.array([lx]))[0]
        worst = max(worst, abs(chain.telescoping_terms(f).sum() - d))
    report(7, worst <= 1e-10 and q_ok, f"100 chains, max telescoping error {worst:.2e}, q bound strict: {q_ok}")


def test_criterion_08_j_identity(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for e in builtin_corpus():
        top = min(e.spec.log_max, 64.0)
        for _ in range(50):
            l0 = rng.uniform(1.01, top / 4)
            lx = rng.uniform(l0, top / 2)
            lt = rng.uniform(lx * 1.01, top)
            worst = max(worst, j_decomposition(e.spec, log_x=lx, log_t=lt, log_x0=l0).residual)
    report(8, worst <= 5e-9, f"350 pairs, max |J1+J2+J3+J4 - (tau(t) - tau(x))| = {worst:.2e}")


def test_criterion_09_theorem_suite(report, suite_e32, suite_e64):
    ok = True
    for rep in (suite_e32, suite_e64):
        ok &= rep.summary["counterexample"] == 0
        for c in rep.cases:
            if c.spec_name in ("S1", "S2"):
                ok &= c.status == "consistent-control" and c.conclusion["kind"] == "none"
    elapsed = suite_e32.elapsed + suite_e64.elapsed
    ok &= elapsed < 300
    report(9, ok, f"e^32 {suite_e32.summary}; e^64 {suite_e64.summary}; {elapsed:.1f} s")


def test_criterion_10_bn_construction(report):
    f = get("V1")
    seq = construct_bn(f, 2.0, 0.1, 2.0, math.e, log_horizon=1e6)
    inv = seq.check_invariants(f)
    lb = np.array(seq.log_b)
    grows = bool(np.all(lb[1:] > math.sqrt(2) * lb[:-1]))
    ok = len(lb) >= 20 and all(inv.values()) and grows and 0 <= seq.n0 < len(lb)
    report(10, ok, f"{len(lb)} terms, n0 = {seq.n0}, invariants {inv}, log b_max = {lb[-1]:.4g}")
