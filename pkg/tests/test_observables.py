import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strictlab import BondClass, Configuration, Lattice, Phase, binned_stats, classify_bond, classify_state, measure
from strictlab.observables import FIELDS, integrated_autocorr_time, measure_fast, per_bond_classes, summarize

from conftest import checkerboard, random_config


@pytest.mark.parametrize("r, expected", [(0.5, BondClass.LT), (0.7, BondClass.MID), (0.9, BondClass.GT),
                                         (0.1, BondClass.LT), (0.8999, BondClass.MID), (50.0, BondClass.GT)])
def test_classify_bond(r, expected):
    assert classify_bond(r, 0.5, 0.4) is expected


@pytest.mark.parametrize("args", [(0.0, 0.5, 0.4), (1.0, 0.0, 0.4), (1.0, 0.5, -0.1)])
def test_classify_bond_domain(args):
    with pytest.raises(ValueError):
        classify_bond(*args)


def test_measure_examples(lat4, preset):
    rec = measure(lat4, preset, Configuration.uniform(lat4, 1, 0.25))
    assert (rec.f_lt, rec.f_mid, rec.f_gt, rec.m, rec.f_stagger) == (1, 0, 0, 1, 0)
    rec = measure(lat4, preset, checkerboard(lat4, 2.0))
    assert (rec.f_gt, rec.m, rec.f_stagger) == (1, 0, 0)
    rec = measure(lat4, preset, checkerboard(lat4, 0.25))
    assert rec.f_stagger == 1


def test_measure_size_mismatch(lat4, preset):
    with pytest.raises(ValueError):
        measure(lat4, preset, Configuration.uniform(Lattice(3), 1, 0.25))


@pytest.mark.parametrize("args, phase", [((0.8, 0.1), Phase.CONTRACTED), ((0.1, 0.9), Phase.EXPANDED),
                                         ((0.5, 0.4), Phase.UNDETERMINED), ((0.75, 0.0), Phase.CONTRACTED)])
def test_classify_state(args, phase):
    assert classify_state(*args) is phase


@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_classify_state_exclusive(a, b):
    if a + b <= 1:
        ph = classify_state(a, b)
        assert ph is not Phase.CONTRACTED or b < 0.75
        assert ph is not Phase.EXPANDED or a < 0.75


@settings(max_examples=60, deadline=None)
@given(L=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), r_max=st.floats(0.3, 3.0))
def test_record_invariants_and_compiled_agreement(L, seed, r_max):
    from strictlab import preset_params
    p = preset_params(2.0, 0.1).with_field(0.2)
    lat = Lattice(L)
    c = random_config(lat, np.random.default_rng(seed), r_max)
    rec = measure(lat, p, c)
    assert rec.f_lt + rec.f_mid + rec.f_gt == 1
    assert rec.f_stagger <= rec.f_lt
    assert rec.m2 == pytest.approx(rec.m ** 2)
    fast = measure_fast(lat, p, c)
    ref = np.array([getattr(rec, f) for f in FIELDS])
    np.testing.assert_allclose(fast, ref, rtol=1e-12, atol=1e-12)


def test_per_bond_breakdown(lat4, preset):
    c = Configuration.uniform(lat4, 1, 0.25)
    c.lengths[lat4.bond_index(lat4.site_index(2, 1), 1)] = 3.0
    grid = per_bond_classes(lat4, preset, c)
    assert grid.shape == (4, 4, 2)
    assert grid[1, 2, 1] == 2 and (grid == 0).sum() == 31


def test_binned_constant():
    mean, err, _ = binned_stats(np.full(1000, 0.3))
    assert mean == pytest.approx(0.3) and err == 0


def test_binned_iid():
    rng = np.random.default_rng(12345)
    n, v = 100_000, 4.0
    mean, err, tau = binned_stats(rng.normal(1.0, np.sqrt(v), n))
    assert err == pytest.approx(np.sqrt(v / n), rel=0.2)
    assert tau == pytest.approx(0.5, abs=0.1)


def test_binned_alternating():
    mean, err, tau = binned_stats(np.tile([1.0, -1.0], 500))
    assert mean == 0 and tau < 1


def test_binned_short_series():
    with pytest.raises(ValueError):
        binned_stats([1.0])


def test_ar1_autocorrelation_time():
    # AR(1) with coefficient a has tau_int = (1 + a) / (2 (1 - a)).
    rng = np.random.default_rng(7)
    a, n = 0.9, 200_000
    x = np.empty(n)
    x[0] = 0
    noise = rng.normal(size=n)
    for i in range(1, n):
        x[i] = a * x[i - 1] + noise[i]
    assert integrated_autocorr_time(x) == pytest.approx((1 + a) / (2 * (1 - a)), rel=0.1)
    mean, err, _ = binned_stats(x)
    exact = np.sqrt((1 + a) / (1 - a) / (1 - a * a) / n)
    assert err == pytest.approx(exact, rel=0.3)


def test_summarize_columns():
    rows = np.random.default_rng(0).random((50, len(FIELDS)))
    s = summarize(rows)
    for name in FIELDS + ("m_abs",):
        assert name in s and name + "_err" in s
    assert s["phase"] in {p.value for p in Phase}
    empty = summarize(np.empty((0, len(FIELDS))))
    assert empty["phase"] == ""


@given(nb=st.integers(1, 5000), data=st.data())
def test_partition_arithmetic_exact_for_all_counts(nb, data):
    """The fraction arithmetic used by both measurement paths sums to exactly 1."""
    n_lt = data.draw(st.integers(0, nb))
    n_gt = data.draw(st.integers(0, nb - n_lt))
    f_lt, f_mid = n_lt / nb, (nb - n_lt - n_gt) / nb
    assert f_lt + f_mid + (1.0 - (f_lt + f_mid)) == 1
