import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleson_lab._parse import SpecError
from carleson_lab.grid import Arc, write_signal_csv
from carleson_lab.operators import maximal
from carleson_lab.weights import (
    FileWeight,
    PiecewisePower,
    PowerWeight,
    RandomA1,
    TwoValue,
    Unit,
    WeightProfile,
    a1_constant,
    ainfty_constant,
    ap_constant,
    dual_weight,
    openness_probe,
    parse_weight,
    rw_exponent,
)
from carleson_lab.grid import real_values

SETTINGS = settings(max_examples=30, deadline=None)


def _all_arcs(N):
    for L in range(1, N):
        for s in range(N):
            yield (s + np.arange(L)) % N
    yield np.arange(N)


def _brute_ap(v, p):
    return max(v[c].mean() * np.mean(v[c] ** (-1 / (p - 1))) ** (p - 1) for c in _all_arcs(v.size))


def _brute_a1(v):
    return max(v[c].mean() / v[c].min() for c in _all_arcs(v.size))


def _brute_ainf(v):
    # M(w chi_Q) on Q only sees subarcs of Q, so it is the maximal function of a segment
    best = 0.0
    for c in _all_arcs(v.size):
        seg = v[c]
        if c.size == v.size:
            Mseg = real_values(maximal(seg))
        else:
            n = seg.size
            Mseg = np.array([max(seg[a:b].mean() for a in range(i + 1) for b in range(i + 1, n + 1)) for i in range(n)])
        best = max(best, Mseg.sum() / seg.sum())
    return best


def test_unit_weight_constants_are_one():
    w = Unit().instantiate(32)
    assert ap_constant(w, 2).value == pytest.approx(1)
    assert a1_constant(w).value == pytest.approx(1)
    assert ainfty_constant(w).value == pytest.approx(1)


def test_two_value_closed_forms():
    N = 64
    w = TwoValue(1, 4).instantiate(N)
    # half/half arcs maximise <w><w^-1> = 2.5 * 0.625
    assert ap_constant(w, 2).value == pytest.approx(1.5625, rel=1e-12)
    # one low cell plus the whole high half
    assert a1_constant(w).value == pytest.approx((4 * N / 2 + 1) / (N / 2 + 1), rel=1e-12)
    assert ainfty_constant(w).value == pytest.approx(1.5852572110297123, rel=1e-9)


@SETTINGS
@given(st.lists(st.floats(0.05, 20.0), min_size=8, max_size=8), st.sampled_from([1.5, 2.0, 3.0]))
def test_constants_match_brute_force(vals, p):
    v = np.array(vals)
    assert ap_constant(v, p).value == pytest.approx(_brute_ap(v, p), rel=1e-10)
    assert a1_constant(v).value == pytest.approx(_brute_a1(v), rel=1e-10)


def test_ainfty_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(4):
        v = rng.lognormal(0, 1.5, 8)
        assert ainfty_constant(v).value == pytest.approx(_brute_ainf(v), rel=1e-10)


def test_constant_ordering_and_argmax():
    w = PowerWeight(-0.5).instantiate(128)
    a1 = a1_constant(w)
    a2 = ap_constant(w, 2)
    a3 = ap_constant(w, 3)
    ainf = ainfty_constant(w)
    assert 1 <= a3.value <= a2.value <= a1.value
    assert ainf.value >= 1
    # the arg-max arc reproduces the value
    v = w.values
    c = a2.arc.cell_weights()[0]
    assert v[c].mean() * np.mean(1 / v[c]) == pytest.approx(a2.value, rel=1e-12)


def test_dyadic_scope_is_smaller():
    w = PowerWeight(0.7, 0.3).instantiate(64)
    for f in (lambda s: ap_constant(w, 2, s), lambda s: a1_constant(w, s), lambda s: ainfty_constant(w, s)):
        assert f("dyadic").value <= f("all").value + 1e-12
    with pytest.raises(ValueError):
        ap_constant(w, 2, "weird")


def test_duality_identity():
    # [w]_{A_p}^{1/(p-1)} = [sigma]_{A_p'}
    w = PowerWeight(0.6, 0.2).instantiate(128)
    for p in (1.5, 2.0, 4.0):
        sigma = dual_weight(w, p)
        lhs = ap_constant(w, p).value ** (1 / (p - 1))
        assert ap_constant(sigma, p / (p - 1)).value == pytest.approx(lhs, rel=1e-10)


@SETTINGS
@given(st.integers(-40, 40))
def test_constants_are_scale_invariant(e):
    w = PowerWeight(-0.4).instantiate(64)
    c = 2.0**e
    assert ap_constant(w * c, 2).value == pytest.approx(ap_constant(w, 2).value, rel=1e-12)
    assert a1_constant(c * w).value == pytest.approx(a1_constant(w).value, rel=1e-12)


def test_power_weight_cell_averages():
    N = 32
    w = PowerWeight(0.5).instantiate(N)
    # symmetric about 0, and cell averages integrate to the exact mass 2 * (1/2)^1.5 / 1.5
    np.testing.assert_allclose(w.values, w.values[::-1], rtol=1e-12)
    assert w.values.mean() == pytest.approx(2 * 0.5**1.5 / 1.5, rel=1e-12)
    with pytest.raises(ValueError):
        PowerWeight(-1.0).instantiate(N)


def test_piecewise_power_single_factor():
    a = PiecewisePower(((0.5, 0.25),)).instantiate(64)
    b = PowerWeight(0.5, 0.25).instantiate(64)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12)


def test_weight_profile_validation_and_average():
    with pytest.raises(ValueError):
        WeightProfile.from_values([1.0, 0.0, 2.0, 3.0, 1, 1, 1, 1])
    with pytest.raises(ValueError):
        WeightProfile.from_values([1.0, np.inf, 2.0, 3.0, 1, 1, 1, 1])
    w = WeightProfile.from_values(np.arange(1.0, 9.0))
    assert w.average(Arc(8, 6, 4)) == pytest.approx((7 + 8 + 1 + 2) / 4)
    assert w.average(Arc(8, 0, 8), 2.0) == pytest.approx(np.mean(np.arange(1.0, 9.0) ** 2))
    assert w.mass(Arc(8, 0.5, 1)) == pytest.approx((0.5 * 1 + 0.5 * 2) / 8)


def test_random_a1_hits_target():
    w = RandomA1(3, 2.0).instantiate(256)
    assert a1_constant(w).value == pytest.approx(2.0, rel=1e-3)
    again = RandomA1(3, 2.0).instantiate(256)
    np.testing.assert_array_equal(w.values, again.values)
    with pytest.raises(ValueError):
        RandomA1(0, 0.5).instantiate(64)


def test_rw_exponent():
    w = TwoValue(1, 4).instantiate(64)
    assert rw_exponent(w) == pytest.approx(1 + 1 / (4 * a1_constant(w).value))
    assert rw_exponent(w, 1.0) == 1.25


def test_openness_probe():
    w = PowerWeight(0.5).instantiate(128)
    for via in ("ap", "sigma"):
        out = openness_probe(w, 2.0, 0.25, via)
        assert 0 < out["eps"] <= 0.5
        assert out["ratio"] >= 1 - 1e-12
    with pytest.raises(ValueError):
        openness_probe(w, 2.0, via="nope")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("one", Unit()),
        ("power:-0.5", PowerWeight(-0.5)),
        ("power:0.5@0.25", PowerWeight(0.5, 0.25)),
        ("twovalue:1,4", TwoValue(1, 4)),
        ("twovalue: 1 , 9 , 0.25", TwoValue(1, 9, 0.25)),
        ("pwpower:0.5@0,-0.3@0.5", PiecewisePower(((0.5, 0.0), (-0.3, 0.5)))),
        ("randa1:7,3", RandomA1(7, 3.0)),
    ],
)
def test_parse_weight(text, expected):
    w = parse_weight(text)
    assert w == expected
    assert parse_weight(w.spec) == w


@pytest.mark.parametrize(
    "text, pos",
    [("power:-1", 6), ("twovalue:1", 10), ("twovalue:0,1", 9), ("twovalue:1,2,1.5", 9), ("cube:1", 0), ("one x", 4), ("csv:", 4)],
)
def test_parse_weight_errors(text, pos):
    with pytest.raises(SpecError) as ei:
        parse_weight(text)
    assert ei.value.pos == pos


def test_file_weight(tmp_path):
    v = np.linspace(1, 2, 16)
    write_signal_csv(tmp_path / "w.csv", v)
    fw = parse_weight(f"csv:{tmp_path / 'w.csv'}")
    assert isinstance(fw, FileWeight)
    np.testing.assert_allclose(fw.instantiate(16).values, v)
    with pytest.raises(ValueError):
        fw.instantiate(32)
