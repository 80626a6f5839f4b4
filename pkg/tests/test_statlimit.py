import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logtauber import (density_profile, detect_ordinary_limit, detect_statistical_limit,
                       exceptional_measure, parse)
from logtauber.corpus import get
from logtauber.statlimit import exceptional_set, tail_median


def spike_measure(b):
    """|{x in (1, b): s(x) = 1}| for unit spikes on [n^2, n^2 + 1), n >= 2."""
    n = np.arange(2, int(math.isqrt(int(b))) + 2)
    lo = n.astype(float) ** 2
    return float(np.sum(np.clip(np.minimum(lo + 1, b) - lo, 0, None)))


def sin_measure(b, a=1.0):
    """|{x in (a, b): |sin x| > 1/2}|, exact."""
    def F(y):
        k, r = divmod(y, math.pi)
        return k * 2 * math.pi / 3 + min(max(r - math.pi / 6, 0.0), 2 * math.pi / 3)
    return F(b) - F(a)


@pytest.mark.parametrize("b,count", [(1e2, 8), (1e3, 30), (1e4, 98)])
def test_spike_densities(b, count):
    m = exceptional_measure(get("S2"), 0.0, 0.5, b)
    assert m.exact and m.method == "root-isolation"
    assert m.value == pytest.approx(count, abs=1e-6)
    assert m.value / (b - 1) == pytest.approx(count / (b - 1), abs=1e-9)


@given(st.floats(2.0, 1e6))
def test_spike_measure_oracle(b):
    assert float(exceptional_measure(get("S2"), 0.0, 0.5, b)) == pytest.approx(
        spike_measure(b), abs=1e-6 * max(1.0, b / 1e4))


def test_s1_oracle():
    # |sin u| > eps on one period of u, measured in x = e^u
    eps = 0.5
    a1 = math.asin(eps)
    ivs = [(a1, math.pi - a1), (math.pi + a1, 2 * math.pi - a1)]
    exact = sum(math.exp(h) - math.exp(l) for l, h in ivs)
    m = exceptional_measure(get("S1"), 0.0, eps, None, log_b=2 * math.pi)
    assert m.exact and m.value == pytest.approx(exact, rel=1e-10)
    assert float(exceptional_measure(get("S1"), 0.0, 1.5, 1e6)) == 0.0


def test_s1_density_stays_large():
    d = float(exceptional_measure(get("S1"), 0.0, 0.5, None, log_b=20.0)) / math.expm1(20.0)
    assert d >= 0.3


def test_monte_carlo_fallback_brackets_exact():
    m = exceptional_measure(parse("sin(x)"), 0.0, 0.5, 5000.0)
    assert not m.exact and m.method == "monte-carlo"
    assert m.lo <= sin_measure(5000.0) <= m.hi


def test_exceptional_set_intervals():
    es = exceptional_set(get("S2"), 0.0, 0.5, 0.0, math.log(30.0))
    # spikes [4, 5), [9, 10), [16, 17), [25, 26)
    np.testing.assert_allclose(np.exp(es.lo), [4, 9, 16, 25], rtol=1e-12)
    np.testing.assert_allclose(np.exp(es.hi), [5, 10, 17, 26], rtol=1e-12)


@given(st.floats(1.0, 12.0), st.floats(0.1, 12.0), st.floats(0.05, 0.9))
def test_measure_additivity(la, w, eps):
    f = get("S1")
    a, b = math.exp(la), math.exp(la + w)
    whole = float(exceptional_measure(f, 0.0, eps, b))
    parts = float(exceptional_measure(f, 0.0, eps, a)) + float(exceptional_measure(f, 0.0, eps, b, a))
    assert whole == pytest.approx(parts, rel=1e-9, abs=1e-9)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(2.0, 25.0))
def test_eps_monotonicity(e1, e2, lb):
    f = get("O1")
    lo, hi = sorted((e1, e2))
    m_lo = float(exceptional_measure(f, 0.1, lo, None, log_b=lb))
    m_hi = float(exceptional_measure(f, 0.1, hi, None, log_b=lb))
    assert m_hi <= m_lo * (1 + 1e-12) + 1e-12


def test_density_profile_shape_and_csv():
    prof = density_profile(get("S2"), 0.0, (0.5, 0.25), horizons=(1e2, 1e3, 1e4))
    assert prof.density.shape == (2, 3)
    np.testing.assert_allclose(prof.density[0], [8 / 99, 30 / 999, 98 / 9999], atol=1e-9)
    assert prof.to_csv().splitlines()[0] == "eps,b,measure,density"
    with pytest.raises(ValueError):
        density_profile(get("S2"), 0.0, (0.1, 0.5), horizons=(1e2, 1e3, 1e4))


def test_tail_median_is_x_weighted():
    # x-uniform sampling of (e^4, e^8): almost all mass sits near e^8
    assert tail_median(get("L1"), 4.0, 8.0) == pytest.approx(math.log(math.log((math.exp(4) + math.exp(8)) / 2)), abs=1e-4)


@pytest.mark.parametrize("name,kind,ell", [("C1", "statistical", 3.5), ("S2", "statistical", 0.0),
                                           ("S1", "none", None), ("L1", "none", None),
                                           ("O1", "none", None)])
def test_statistical_detector(name, kind, ell):
    f = get(name)
    lh = (4.0, 8.0, 16.0, 32.0) if f.log_max >= 32 else (4.0, 8.0, 16.0, f.log_max)
    v = detect_statistical_limit(f, log_horizons=lh)
    assert v.kind == kind
    if ell is not None:
        assert v.ell == pytest.approx(ell, abs=1e-12)
    assert "artifact policy" in v.evidence["note"]


@pytest.mark.parametrize("name,kind", [("C1", "ordinary"), ("V1", "ordinary"), ("S1", "none"),
                                       ("L1", "none"), ("O1", "none")])
def test_ordinary_detector(name, kind):
    assert detect_ordinary_limit(get(name)).kind == kind


def test_ordinary_detector_sees_spikes():
    v = detect_ordinary_limit(get("S2"), log_horizons=(4.0, 8.0, 16.0))
    assert v.kind == "none" and v.evidence["oscillation"] == 1.0


def test_horizon_checks():
    with pytest.raises(ValueError):
        detect_ordinary_limit(get("C1"), log_horizons=(4.0, 8.0))
    with pytest.raises(ValueError):
        detect_ordinary_limit(get("C1"), log_horizons=(4.0, 5.0, 6.0))


@pytest.mark.parametrize("b", [1e2, 1e3, 1e4, 1e6])
def test_left_endpoint_is_immaterial(b):
    f = get("S2")
    d1 = float(exceptional_measure(f, 0.0, 0.5, b)) / (b - 1)
    m10 = float(exceptional_measure(f, 0.0, 0.5, b, 10.0))
    d10 = m10 / (b - 10)
    head = float(exceptional_measure(f, 0.0, 0.5, 10.0))
    assert abs(d1 - d10) <= (10 + head) / (b - 10)


def test_spike_value_at_9_5():
    assert get("S2")(9.5)[()] == 1.0
