import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleson_lab._parse import SpecError
from carleson_lab.grid import GridSpec
from carleson_lab.operators import (
    CARLESON,
    HILBERT,
    IDENTITY,
    FrequencyChoice,
    adjoint_linearized,
    carleson,
    carleson_oversampled,
    frequencies,
    hilbert,
    hilbert_adjoint,
    linearized_carleson,
    maximal,
    maximal_r,
    modulate,
    orlicz_maximal,
    parse_operator,
    weighted_centered_orlicz_maximal,
)
from carleson_lab.young import Identity, LLogL, Power, luxemburg_rows

SETTINGS = settings(max_examples=30, deadline=None)


def _pair(f, g):
    return np.mean(f * np.conj(g))


def _dft_hilbert(v):
    # dense matrix version of the multiplier -i sgn(k), Nyquist dropped
    N = v.size
    x = GridSpec.from_n(N).midpoints()
    k = np.arange(-(N // 2) + 1, N // 2)
    E = np.exp(2j * np.pi * np.outer(x, k))
    coef = E.conj().T @ v / N
    return E @ (-1j * np.sign(k) * coef)


def test_hilbert_of_trigonometric_polynomials():
    N = 64
    x = GridSpec.from_n(N).midpoints()
    for k in (1, 5, 31):
        np.testing.assert_allclose(hilbert(np.cos(2 * np.pi * k * x)).values, np.sin(2 * np.pi * k * x), atol=1e-12)
        np.testing.assert_allclose(hilbert(np.sin(2 * np.pi * k * x)).values, -np.cos(2 * np.pi * k * x), atol=1e-12)
    assert np.allclose(hilbert(np.ones(N)).values, 0)


def test_hilbert_matches_dense_dft():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    np.testing.assert_allclose(hilbert(v).values, _dft_hilbert(v), atol=1e-12)


def test_hilbert_adjoint_pairing():
    rng = np.random.default_rng(1)
    f, g = rng.standard_normal((2, 128)) + 1j * rng.standard_normal((2, 128))
    assert _pair(hilbert(f).values, g) == pytest.approx(_pair(f, hilbert_adjoint(g).values), abs=1e-13)


def test_carleson_matches_definition():
    rng = np.random.default_rng(2)
    v = rng.standard_normal(32)
    brute = np.max([np.abs(_dft_hilbert(modulate(v, xi).values)) for xi in frequencies(32)], axis=0)
    C, choice = carleson(v, return_choice=True)
    np.testing.assert_allclose(C.values, brute, atol=1e-12)
    np.testing.assert_allclose(np.abs(linearized_carleson(v, choice).values), C.values, atol=1e-12)


def test_carleson_dominates_hilbert_and_constant():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(64)
    assert np.all(carleson(v).values >= np.abs(hilbert(v).values) - 1e-12)
    # modulating a constant gives a pure exponential; its conjugate has modulus 1 away from DC/Nyquist
    np.testing.assert_allclose(carleson(np.ones(64)).values, 1.0, atol=1e-12)


@SETTINGS
@given(st.integers(-8, 7), st.integers(0, 10_000))
def test_carleson_modulation_invariance(xi, seed):
    # cyclic frequency shifts permute the candidate set, so C(M^xi f) = C f up to roundoff
    v = np.random.default_rng(seed).standard_normal(16)
    np.testing.assert_allclose(carleson(modulate(v, xi)).values, carleson(v).values, atol=1e-11)


def test_carleson_oversampled_dominates():
    v = np.random.default_rng(4).standard_normal(32)
    assert np.all(carleson_oversampled(v, 2).values >= carleson(v).values - 1e-12)


def test_linearized_adjoint_pairing():
    rng = np.random.default_rng(5)
    N = 64
    ch = FrequencyChoice.random(N, 7)
    f, h = rng.standard_normal((2, N)) + 1j * rng.standard_normal((2, N))
    lhs = _pair(linearized_carleson(f, ch).values, h)
    rhs = _pair(f, adjoint_linearized(h, ch).values)
    assert lhs == pytest.approx(rhs, abs=1e-13)
    with pytest.raises(ValueError):
        linearized_carleson(np.ones(32), ch)


def test_frequency_choice(tmp_path):
    ch = FrequencyChoice.random(32, 1)
    ch.write_csv(tmp_path / "xi.csv")
    assert FrequencyChoice.read_csv(tmp_path / "xi.csv") == ch
    constant = FrequencyChoice.constant(3, 32)
    np.testing.assert_allclose(linearized_carleson(np.ones(32), constant).values,
                               hilbert(modulate(np.ones(32), 3)).values, atol=1e-12)
    with pytest.raises(ValueError):
        FrequencyChoice(np.array([0, 1, 99, 0, 0, 0, 0, 0]))
    with pytest.raises(ValueError):
        FrequencyChoice(np.zeros(8))
    (tmp_path / "bad.csv").write_text("cell,xi\n1,0\n0,0\n")
    with pytest.raises(ValueError):
        FrequencyChoice.read_csv(tmp_path / "bad.csv")


def _brute_maximal(a, mode):
    N = a.size
    out = np.zeros(N)
    for x in range(N):
        best = a[x]
        for L in range(1, N + 1):
            starts = range(x - L + 1, x + 1) if mode == "uncentered" else [x - L // 2]
            for s in starts:
                best = max(best, a[np.arange(s, s + L) % N].mean())
        out[x] = best
    return out


@pytest.mark.parametrize("mode", ["uncentered", "centered"])
def test_maximal_matches_brute_force(mode):
    a = np.random.default_rng(6).lognormal(size=16)
    np.testing.assert_allclose(maximal(a, mode).values, _brute_maximal(a, mode), rtol=1e-12)


def test_dyadic_maximal_and_shift():
    a = np.zeros(8)
    a[0] = 8.0
    np.testing.assert_allclose(maximal(a, "dyadic").values, [8, 4, 2, 2, 1, 1, 1, 1])
    sh = maximal(np.roll(a, 3), "dyadic", 3).values
    np.testing.assert_allclose(sh, np.roll([8, 4, 2, 2, 1, 1, 1, 1], 3))
    with pytest.raises(ValueError):
        maximal(a, "diagonal")


def test_maximal_ordering():
    a = np.random.default_rng(7).lognormal(size=64)
    U = maximal(a).values
    assert np.all(U >= maximal(a, "centered").values - 1e-12)
    assert np.all(U >= maximal(a, "dyadic").values - 1e-12)
    assert np.all(maximal_r(a, 2).values >= U - 1e-12)
    np.testing.assert_allclose(maximal_r(a, 1).values, U)


def test_orlicz_maximal_identity_and_power():
    a = np.random.default_rng(8).lognormal(size=32)
    np.testing.assert_allclose(orlicz_maximal(a, Identity()).values, maximal(a).values)
    np.testing.assert_allclose(orlicz_maximal(a, Power(2.0)).values, maximal_r(a, 2).values, rtol=1e-9)


def test_orlicz_maximal_dominates_and_modes():
    a = np.random.default_rng(9).lognormal(size=32)
    phi = LLogL(1.0)
    E = orlicz_maximal(a, phi).values
    assert np.all(E >= maximal(a).values * (1 - 1e-9))
    D = orlicz_maximal(a, phi, "dyadic2").values
    assert np.all(D <= E * (1 + 1e-9))
    assert np.all(orlicz_maximal(a, phi, "centered").values <= E * (1 + 1e-9))
    # pointwise check of one cell against a direct window sweep
    x = 5
    direct = max(
        luxemburg_rows(a[np.arange(s, s + L) % 32][None, :], np.ones((1, L)), phi)[0]
        for L in range(1, 33)
        for s in range(x - L + 1, x + 1)
    )
    assert E[x] == pytest.approx(direct, rel=1e-9)


def test_weighted_centered_identity_fast_path():
    rng = np.random.default_rng(10)
    a, w = rng.lognormal(size=(2, 32))
    fast = weighted_centered_orlicz_maximal(a, Identity(), w).values
    scaled = weighted_centered_orlicz_maximal(a, Power(1.000001), w).values
    np.testing.assert_allclose(fast, scaled, rtol=1e-4)
    one = weighted_centered_orlicz_maximal(a, Identity(), np.ones(32)).values
    np.testing.assert_allclose(one, maximal(a, "centered").values, rtol=1e-12)
    with pytest.raises(ValueError):
        weighted_centered_orlicz_maximal(a, Identity(), np.ones(16))


def test_parse_operator():
    assert parse_operator("id") is IDENTITY
    assert parse_operator(" hilbert ") is HILBERT
    assert parse_operator("carleson") is CARLESON
    a = np.random.default_rng(11).lognormal(size=16)
    np.testing.assert_allclose(parse_operator("max:dyadic@5")(a).values, maximal(a, "dyadic", 5).values)
    np.testing.assert_allclose(parse_operator("maxr:2")(a).values, maximal_r(a, 2).values)
    assert parse_operator("maxphi: llogl:1").spec == "maxphi:llogl:1"
    assert not parse_operator("max").linear and HILBERT.linear


@pytest.mark.parametrize(
    "text, pos",
    [("nope", 0), ("hilbert x", 8), ("max:bad", 4), ("maxr:-1", 5), ("maxphi:foo", 7), ("maxphi: pow:1", 12), ("lincar:", 7)],
)
def test_parse_operator_errors(text, pos):
    with pytest.raises(SpecError) as ei:
        parse_operator(text)
    assert ei.value.pos == pos


def test_lincar_from_file(tmp_path):
    ch = FrequencyChoice.random(16, 2)
    ch.write_csv(tmp_path / "c.csv")
    op = parse_operator(f"lincar:{tmp_path / 'c.csv'}")
    v = np.random.default_rng(12).standard_normal(16)
    np.testing.assert_allclose(op(v).values, linearized_carleson(v, ch).values)
    assert op.linear
