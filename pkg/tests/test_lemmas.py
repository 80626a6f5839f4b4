import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logtauber import (HypothesisError, build_chain, check_liminf_s_over_x, construct_bn,
                       j_decomposition, parse, verify_lemma1, verify_lemma2, verify_lemma3,
                       verify_lemma4)
from logtauber.corpus import builtin_corpus, get
from logtauber.lemmas import b1_constant, b2_constant, default_t_samples
from logtauber.tauber import SlowWindow

E2 = math.e ** 2


def test_constants():
    assert b1_constant(2.0) == pytest.approx(2.8853900817779268, abs=1e-12)
    # B2 = (B1 / lam) (log lam + log log x0 + 1)
    assert b2_constant(2.0, E2) == pytest.approx(2.8853900817779268 / 2 * (math.log(2) + math.log(2) + 1))


def test_chain_example():
    chain = build_chain(log_t=16.0, log_x=2.0, lam=2.0)
    assert chain.q == 2 and chain.q_bound() == pytest.approx(3.0)
    assert chain.log_points[:3] == (16.0, 8.0, 4.0)
    assert chain.log_points[chain.q + 1] <= chain.log_x < chain.log_points[chain.q]


def test_chain_needs_gap():
    with pytest.raises(HypothesisError):
        build_chain(log_t=4.0, log_x=3.0, lam=2.0)


@given(st.floats(0.5, 50.0), st.floats(1.05, 4.0), st.floats(0.0, 1.0),
       st.sampled_from([e.name for e in builtin_corpus() if e.name != "S2"]))
def test_chain_telescopes(log_x, lam, frac, name):
    f = get(name)
    log_t = log_x * lam * (1.0 + 1e-9) + frac * 200.0
    chain = build_chain(log_t=log_t, log_x=log_x, lam=lam)
    assert chain.q < chain.q_bound()
    terms = chain.telescoping_terms(f)
    diff = f.eval_u(np.array([log_t]))[0] - f.eval_u(np.array([log_x]))[0]
    assert terms.sum() == pytest.approx(diff, abs=1e-10)


def test_lemma1_l2():
    rep = verify_lemma1(get("L2"), SlowWindow(1.0, E2, 2.0), math.exp(3.0))
    assert rep.passed and rep.n_tested == 10_000
    # closed form: the margin is log(log t / log x) / log 2 > 1
    assert 1.0 - 1e-9 <= rep.margin <= 1.05
    lx, lt = rep.witness
    assert rep.margin == pytest.approx(math.log(lt / lx) / math.log(2), abs=1e-12)
    assert rep.details["eq37_gate"]


def test_lemma2_o1():
    rep = verify_lemma2(get("O1"), SlowWindow(1.0, E2, math.e, "oscillation"), 200.0, n_pairs=2000)
    assert rep.passed and rep.margin >= 0


def test_lemma_hypothesis_checked():
    with pytest.raises(HypothesisError):
        verify_lemma1(get("S1"), SlowWindow(1.0, E2, 2.0), 20.0)
    with pytest.raises(HypothesisError):
        verify_lemma1(get("L2"), SlowWindow(0.5, E2, 2.0), 20.0)
    with pytest.raises(HypothesisError):
        verify_lemma2(get("L2"), SlowWindow(1.0, E2, 2.0), 20.0)  # decrease window


def l2_lemma3_lhs(U0, U):
    return -(1 - U0 / U - U0 / U * math.log(U / U0)) / math.log(2)


def test_lemma3_l2_oracle():
    samples = default_t_samples(E2, 2.0, 64.0)
    rep = verify_lemma3(get("L2"), SlowWindow(1.0, E2, 2.0), samples)
    assert rep.passed
    for row in rep.details["samples"]:
        assert row["lhs"] == pytest.approx(l2_lemma3_lhs(2.0, row["log_t"]), abs=1e-9)


@pytest.mark.parametrize("name,lam", [("L1", 2.0), ("L2", 2.0), ("O1", math.e)])
def test_lemma4(name, lam):
    samples = default_t_samples(E2, lam, 64.0)
    rep = verify_lemma4(get(name), SlowWindow(1.0, E2, lam, "oscillation"), samples)
    assert rep.passed and rep.margin >= -1e-7


def test_integral_lemmas_need_x0_above_e():
    with pytest.raises(HypothesisError):
        verify_lemma3(get("L2"), SlowWindow(1.0, math.e, 2.0), [10.0])


def test_bn_spikes_avoid_exceptional_set():
    f = get("S2")
    seq = construct_bn(f, 0.0, 0.5, 2.0, math.e, max_n=30, log_horizon=27.0)
    assert all(seq.check_invariants(f).values())
    assert np.all(f.eval_u(np.array(seq.log_b)) == 0.0)


def test_bn_case_two():
    # s = 1 on [e^10, e^40): no good point in (b^sqrt2, b^2) once b passes e^10 / sqrt 2
    f = parse("piece [1, e^10): 0; piece [e^10, e^40): 1; piece [e^40, inf): 0;")
    seq = construct_bn(f, 0.0, 0.5, 2.0, math.e, max_n=40, log_horizon=1e4)
    assert "ii" in seq.cases and seq.density_bounds
    assert seq.log_b[seq.n0] >= 40.0
    assert all(seq.check_invariants(f).values())
    k, by_bn, by_right = seq.density_bounds[0]
    assert by_bn > 1 and 0 < by_right < 1  # the two normalizations differ


def test_bn_no_start():
    with pytest.raises(HypothesisError):
        construct_bn(parse("5"), 0.0, 0.5, 2.0, math.e, log_horizon=100.0)


@pytest.mark.parametrize("entry", builtin_corpus(), ids=lambda e: e.name)
@given(data=st.data())
def test_j_identity(entry, data):
    f = entry.spec
    top = min(f.log_max, 64.0)
    l0 = data.draw(st.floats(1.01, top / 4))
    lx = data.draw(st.floats(l0, top / 2))
    lt = data.draw(st.floats(lx * 1.01, top))
    j = j_decomposition(f, log_x=lx, log_t=lt, log_x0=l0)
    assert j.residual <= 5e-9


def test_j_requires_order():
    with pytest.raises(HypothesisError):
        j_decomposition(get("V1"), log_x=3.0, log_t=2.0, log_x0=1.5)
    with pytest.raises(HypothesisError):
        j_decomposition(get("V1"), log_x=3.0, log_t=5.0, log_x0=0.5)


def test_liminf_l2():
    rep = check_liminf_s_over_x(get("L2"), SlowWindow(1.0, E2, 2.0))
    assert rep.passed
    assert all(r[4] for r in rep.rows)


def test_bn_spikes_late_steps_are_case_one():
    seq = construct_bn(get("S2"), 0.0, 0.5, 2.0, math.e, max_n=30, log_horizon=27.0)
    late = [c for lb, c in zip(seq.log_b[1:], seq.cases) if lb > 5.0]
    assert late and all(c == "i" for c in late)
