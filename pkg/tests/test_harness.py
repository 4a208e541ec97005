import math

import numpy as np
import pytest

from carleson_lab.grid import Arc, DyadicInterval
from carleson_lab.harness import (
    REPORT_COLUMNS,
    SWEEP_FIELDS,
    SweepRecord,
    base_corpus,
    cond11_ratio,
    corpus_signals,
    default_strategy,
    exponent_fit,
    fit_sweep,
    lp_domination_probe,
    lp_norm,
    opnorm_lower,
    power_sweep,
    read_report_csv,
    read_sweep_csv,
    star_ratio,
    suite,
    tail_growth_probe,
    weak_l1_local,
    weight_corpus,
    write_fit_csv,
    write_report_csv,
    write_sweep_csv,
)
from carleson_lab.operators import CARLESON, HILBERT, IDENTITY, Operator, hilbert, maximal
from carleson_lab.sparse import random_sparse_family
from carleson_lab.weights import PowerWeight, Unit
from carleson_lab.young import Identity, LLogL


def test_lp_norm():
    f = np.array([1.0, -2, 0, 3])
    assert lp_norm(f, 1) == pytest.approx(1.5)
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(14 / 4))
    assert lp_norm(f, 2, np.array([4.0, 1, 1, 0])) == pytest.approx(math.sqrt(8 / 4))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)
    with pytest.raises(ValueError):
        lp_norm(f, 2, np.ones(8))


def test_weak_l1_local():
    g = np.array([4.0, 1, 2, 0, 0, 0, 0, 0])
    # a |{|g| > a}| over the level sets: 4 * 1/8, 2 * 2/8, 1 * 3/8
    assert weak_l1_local(g, Arc(8, 0, 8)) == pytest.approx(0.5)
    assert weak_l1_local(g, Arc(8, 1, 2)) == pytest.approx(2 / 8)
    assert weak_l1_local(np.zeros(8), Arc(8, 0, 8)) == 0.0


def test_corpus_is_seeded_and_sized():
    a = corpus_signals(64, 3)
    b = corpus_signals(64, 3)
    assert [t for t, _ in a] == [t for t, _ in b]
    assert all(np.array_equal(x, y) for (_, x), (_, y) in zip(a, b))
    assert len(base_corpus(0, 0)) == 14 and len(base_corpus(0, 40)) == 54
    w = PowerWeight(0.5).instantiate(64)
    assert len(weight_corpus(w, 2, compact=True)) < len(weight_corpus(w, 2))
    assert len(corpus_signals(64, 0, w, 2)) == 54 + len(weight_corpus(w, 2))


def test_opnorm_identity_and_hilbert():
    one = Unit().instantiate(64)
    r = opnorm_lower(IDENTITY, 2, one)
    assert r.value == pytest.approx(1.0, abs=1e-12)
    h = opnorm_lower(HILBERT, 2, one, "ratio-ascent")
    assert 0.99 <= h.value <= 1 + 1e-9
    assert lp_norm(hilbert(h.witness), 2) / lp_norm(h.witness, 2) == pytest.approx(h.value)
    assert max(h.history) == h.value


def test_weighted_hilbert_against_singular_value():
    N = 64
    w = PowerWeight(-0.6).instantiate(N)
    H = np.array([hilbert(e).values for e in np.eye(N)]).T
    s = np.sqrt(w.values)
    exact = np.linalg.norm(s[:, None] * H / s[None, :], 2)
    r = opnorm_lower(HILBERT, 2, w, "ratio-ascent", iterations=60)
    assert r.value <= exact * (1 + 1e-9)
    assert r.value >= 0.95 * exact
    assert opnorm_lower(HILBERT, 2, w, "corpus-max").value <= r.value + 1e-12


def test_opnorm_strategy_validation():
    one = Unit().instantiate(32)
    with pytest.raises(ValueError):
        opnorm_lower(CARLESON, 2, one, "ratio-ascent")
    with pytest.raises(ValueError):
        opnorm_lower(HILBERT, 2, one, "linearized-ascent")
    with pytest.raises(ValueError):
        opnorm_lower(HILBERT, 2, one, "guess")
    with pytest.raises(ValueError):
        opnorm_lower(HILBERT, 2)
    assert default_strategy(HILBERT) == "ratio-ascent"
    assert default_strategy(CARLESON) == "linearized-ascent"
    assert default_strategy(Operator("max", maximal)) == "corpus-max"


def test_linearized_ascent_is_a_valid_lower_bound():
    one = Unit().instantiate(64)
    r = opnorm_lower(CARLESON, 2, one, "linearized-ascent", iterations=5)
    f = r.witness
    assert lp_norm(CARLESON(f), 2) / lp_norm(f, 2) == pytest.approx(r.value, rel=1e-12)
    assert r.value >= opnorm_lower(CARLESON, 2, one, "corpus-max").value - 1e-12


def test_exponent_fit():
    c = np.geomspace(1, 50, 8)
    fit = exponent_fit(c, 3 * c**1.5)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3), abs=1e-12)
    assert fit.residual < 1e-12 and fit.n == 8
    assert fit.xrange == pytest.approx((1, 50))
    with pytest.raises(ValueError):
        exponent_fit(c[:5], c[:5])
    with pytest.raises(ValueError):
        exponent_fit(np.ones(8), c)


def test_identity_sweep_has_flat_fit():
    recs = power_sweep([0.5, 0.6, 0.7, 0.8, 0.9, 0.95], 64, 2.0, IDENTITY)
    fit = fit_sweep(recs, "ap")
    assert abs(fit.slope) <= 1e-10
    assert all(r.norm == pytest.approx(1.0) for r in recs)


def test_sweep_record_validation():
    base = dict(family="one", param=0.0, N=8, p=2.0, a1=1.0, ap=1.0, ainf=1.0, sigma_ainf=1.0,
                operator="id", norm=1.0, witness="x")
    SweepRecord(**base)
    with pytest.raises(ValueError):
        SweepRecord(**{**base, "ap": 0.5})
    with pytest.raises(ValueError):
        SweepRecord(**{**base, "norm": -1.0})


def test_sweep_csv_round_trip(tmp_path):
    recs = power_sweep([0.5, 0.7], 32, 2.0, HILBERT)
    write_sweep_csv(tmp_path / "s.csv", recs)
    back = read_sweep_csv(tmp_path / "s.csv")
    assert back == recs
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == ",".join(SWEEP_FIELDS)
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_sweep_csv(tmp_path / "bad.csv")


def test_fit_csv(tmp_path):
    c = np.geomspace(1, 10, 6)
    write_fit_csv(tmp_path / "f.csv", exponent_fit(c, c), "ap")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "constant,slope,intercept,residual,xmin,xmax,n"
    assert lines[1].startswith("ap,1.0") and lines[1].endswith(",6")


def test_suite_is_deterministic_and_round_trips(tmp_path):
    a = suite("thmA", N=32)
    b = suite("thmA", N=32)
    assert [r.cells() for r in a.rows] == [r.cells() for r in b.rows]
    assert not a.exact_failed
    write_report_csv(tmp_path / "r.csv", [a])
    back = read_report_csv(tmp_path / "r.csv")
    assert [r.cells() for r in back] == [r.cells() for r in a.rows]
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)


def test_degenerate_family_skips_fits():
    rep = suite("thmA", N=32, family="one")
    fits = [r for r in rep.rows if r.check == "ap_fit"]
    assert fits and all(r.status == "SKIP" for r in fits)
    # every sweep point is the same unweighted norm: 1 on L^2, larger on L^3
    for p in (2.0, 3.0):
        vals = {r.value for r in rep.rows if r.check == "ap_bound" and r.p == p}
        assert len(vals) == 1
    assert [r.value for r in rep.rows if r.check == "ap_bound" and r.p == 2.0][0] == pytest.approx(1.0)


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        suite("thm99")


def test_prop31_and_mixed_small_grid():
    for name in ("prop31", "mixed42"):
        rep = suite(name, N=32)
        assert not rep.exact_failed, [r for r in rep.rows if r.status == "FAIL"]
        assert all(np.isfinite(float(r.value)) for r in rep.rows if r.value != "")


def test_cond11_identity_is_bounded():
    # weak L^1 of f chi_Q is at most its L^1 norm, which is at most |Q| ||f||_{Phi,Q}
    r, arg = cond11_ratio(IDENTITY, LLogL(1.0), 64, corpus=corpus_signals(64, 0, n_random=4))
    assert 0 < r <= 1 + 1e-9 and "|" in arg


def test_lp_domination_probe():
    f = corpus_signals(64, 0)[6][1]
    r = lp_domination_probe(HILBERT, f, Identity())
    assert 0 < r < math.inf
    assert lp_domination_probe(HILBERT, np.zeros(64), Identity()) == 0.0


def test_tail_growth_probe():
    N = 64
    f = np.abs(corpus_signals(N, 0)[7][1]) + 0.1
    fams = [random_sparse_family(N, s) for s in range(3)]
    c = tail_growth_probe(f, fams, ms=(1, 2, 3))
    assert set(c) == {1, 2, 3}
    assert all(0 < v < math.inf for v in c.values())
    assert tail_growth_probe(np.zeros(N), fams) == dict.fromkeys((1, 2, 3, 4, 5, 6), 0.0)


def test_star_ratio_identity_band():
    # for Psi = t the star function is t log(e+t)-like; the ratio is bounded above and below
    rng = np.random.default_rng(0)
    Q = DyadicInterval(6, 1, 0)
    rs = [star_ratio(rng.lognormal(0, 1, 64), Q, Identity()) for _ in range(10)]
    assert min(rs) > 0.1 and max(rs) < 10
