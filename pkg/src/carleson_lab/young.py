"""Young functions, Luxemburg norms and the Orlicz constants built from them.

Catalogue members evaluate on arrays, know their derivative, and can evaluate
``log Phi(e^x)`` directly so that growth integrals never overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate

from ._parse import Cursor, SpecError
from .grid import as_values

E = math.e
EE = math.exp(E)  # e^e
EEE = math.exp(EE)  # e^{e^e}
LOG_MIN, LOG_MAX = -745.0, 709.0
CAP = 1e300

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _num(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _pos(t):
    return np.maximum(np.asarray(t, dtype=float), 0.0)


def _triple_log(t):
    """``log log log(e^{e^e} + t)`` and its derivative."""
    u1 = np.log(EEE + t)
    u2 = np.log(u1)
    g = np.log(u2)
    dg = 1.0 / ((EEE + t) * u1 * u2)
    return g, dg


def _log_triple_log_exp(x):
    """``log G(e^x)`` where ``G`` is the e^{e^e} triple logarithm."""
    u1 = np.logaddexp(EE, x)
    return np.log(np.log(np.log(u1)))


class YoungFn:
    """Base class; subclasses define ``__call__``, ``derivative``, ``log_value``."""

    exponent: float = 1.0

    def __call__(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def derivative(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def log_value(self, x):
        """``log Phi(e^x)``."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.log(self(np.exp(x)))

    @property
    def spec(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def __str__(self):
        return self.spec

    @cached_property
    def inverse_at_one(self) -> float:
        """``Phi^{-1}(1)``: the ``t`` with ``Phi(t) = 1``."""
        lo, hi = -60.0, 60.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.log_value(mid) > 0:
                hi = mid
            else:
                lo = mid
        return math.exp(hi)


@dataclass(frozen=True, eq=True)
class Identity(YoungFn):
    exponent = 1.0

    def __call__(self, t):
        return _pos(t)

    def derivative(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def log_value(self, x):
        return np.asarray(x, dtype=float)

    @property
    def spec(self):
        return "id"


@dataclass(frozen=True, eq=True)
class Power(YoungFn):
    r: float

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError("Power(r) needs r > 1")

    @property
    def exponent(self):
        return self.r

    def __call__(self, t):
        with np.errstate(over="ignore"):
            return _pos(t) ** self.r

    def derivative(self, t):
        with np.errstate(over="ignore"):
            return self.r * _pos(t) ** (self.r - 1)

    def log_value(self, x):
        return self.r * np.asarray(x, dtype=float)

    @property
    def spec(self):
        return f"pow:{_num(self.r)}"


@dataclass(frozen=True, eq=True)
class LLogL(YoungFn):
    lam: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("LLogL(lambda) needs lambda >= 0")

    exponent = 1.0

    def __call__(self, t):
        t = _pos(t)
        return t * np.log(E + t) ** self.lam

    def derivative(self, t):
        t = _pos(t)
        L = np.log(E + t)
        return L**self.lam + self.lam * t * L ** (self.lam - 1) / (E + t)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.lam * np.log(np.logaddexp(1.0, x))

    @property
    def spec(self):
        return f"llogl:{_num(self.lam)}"


@dataclass(frozen=True, eq=True)
class TripleLog(YoungFn):
    """``t log log log(e^{e^e} + t)``."""

    exponent = 1.0

    def __call__(self, t):
        t = _pos(t)
        return t * _triple_log(t)[0]

    def derivative(self, t):
        t = _pos(t)
        g, dg = _triple_log(t)
        return g + t * dg

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        return x + _log_triple_log_exp(x)

    @property
    def spec(self):
        return "triplelog"


@dataclass(frozen=True, eq=True)
class Antonov(YoungFn):
    """``t log(e + t) log log log(e^{e^e} + t)``."""

    exponent = 1.0

    def __call__(self, t):
        t = _pos(t)
        return t * np.log(E + t) * _triple_log(t)[0]

    def derivative(self, t):
        t = _pos(t)
        L = np.log(E + t)
        g, dg = _triple_log(t)
        return L * g + t * g / (E + t) + t * L * dg

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        return x + np.log(np.logaddexp(1.0, x)) + _log_triple_log_exp(x)

    @property
    def spec(self):
        return "antonov"


@dataclass(frozen=True, eq=True)
class Scaled(YoungFn):
    c: float
    base: YoungFn

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("Scaled(c, .) needs c > 0")

    @property
    def exponent(self):
        return self.base.exponent

    def __call__(self, t):
        return self.c * self.base(t)

    def derivative(self, t):
        return self.c * self.base.derivative(t)

    def log_value(self, x):
        return math.log(self.c) + self.base.log_value(x)

    @property
    def spec(self):
        return f"scaled({_num(self.c)},{self.base.spec})"


@dataclass(frozen=True, eq=True)
class PowerOf(YoungFn):
    """``Phi(t)^q``, evaluated through logarithms for non-integer ``q``."""

    base: YoungFn
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("PowerOf(., q) needs q > 0")

    @property
    def exponent(self):
        return self.q * self.base.exponent

    def __call__(self, t):
        b = self.base(t)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.exp(self.q * np.log(b))
        return np.where(b > 0, out, 0.0)

    def derivative(self, t):
        b = self.base(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self.q * np.exp((self.q - 1) * np.log(b)) * self.base.derivative(t)
        return np.where(b > 0, out, 0.0 if self.q > 1 else np.inf)

    def log_value(self, x):
        return self.q * self.base.log_value(x)

    @property
    def spec(self):
        return f"powof({self.base.spec},{_num(self.q)})"


@dataclass(frozen=True, eq=False)
class StarOf(YoungFn):
    """``t`` on ``[0, 1]`` and ``t + t * int_1^t base(u) u^{-2} du`` above.

    The inner integral is tabulated once, in log form, at panel nodes of width
    ``STEP`` in ``log u``; a query adds a 20-point Gauss-Legendre remainder from
    the nearest node below, so the construction is monotone and immutable.
    """

    base: YoungFn
    STEP = 0.25
    LOG_RANGE = 2000.0
    _nodes: np.ndarray = field(init=False, repr=False)
    _log_cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.arange(0.0, self.LOG_RANGE + self.STEP, self.STEP)
        seg = self._log_segment(nodes[:-1], nodes[1:])
        log_cum = np.concatenate([[-np.inf], np.logaddexp.accumulate(seg)])
        for arr in (nodes, log_cum):
            arr.setflags(write=False)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_log_cum", log_cum)

    def __eq__(self, other):
        return isinstance(other, StarOf) and other.base == self.base

    def __hash__(self):
        return hash(("star", self.base))

    @property
    def exponent(self):
        return self.base.exponent

    def _log_segment(self, a, b):
        """``log int_a^b base(e^s) e^{-s} ds`` for arrays of panel endpoints."""
        a, b = np.asarray(a, float), np.asarray(b, float)
        half = 0.5 * (b - a)
        s = 0.5 * (a + b)[..., None] + half[..., None] * _GL_X
        ell = self.base.log_value(s) - s
        m = ell.max(axis=-1)
        with np.errstate(divide="ignore"):
            return m + np.log(np.sum(_GL_W * np.exp(ell - m[..., None]), axis=-1) * half)

    def log_inner(self, x):
        """``log int_1^{e^x} base(u) u^{-2} du`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if np.any(x > self.LOG_RANGE):
            raise ValueError("argument beyond the tabulated range of the star construction")
        k = np.minimum((x / self.STEP).astype(int), self._nodes.size - 1)
        k = np.maximum(k, 0)
        left = self._nodes[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            rem = np.where(x > left, self._log_segment(left, np.maximum(x, left + 1e-300)), -np.inf)
        return np.logaddexp(self._log_cum[k], rem)

    def inner(self, t):
        t = _pos(t)
        out = np.zeros_like(t)
        big = t > 1
        out[big] = np.exp(self.log_inner(np.log(t[big])))
        return out

    def __call__(self, t):
        t = _pos(t)
        with np.errstate(over="ignore"):
            return t + t * self.inner(t)

    def derivative(self, t):
        t = _pos(t)
        out = np.ones_like(t)
        big = t >= 1
        tb = t[big]
        out[big] = 1.0 + self.inner(tb) + self.base(tb) / tb
        return out

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        big = x > 0
        out[big] = x[big] + np.logaddexp(0.0, self.log_inner(x[big]))
        return out

    @property
    def spec(self):
        return f"star({self.base.spec})"


def star(psi: YoungFn) -> StarOf:
    return StarOf(psi)


# -- grammar -----------------------------------------------------------------


def parse_young(text: str) -> YoungFn:
    """Parse ``id | pow:r | llogl:lam | antonov | triplelog | star(S) |
    powof(S,q) | scaled(c,S)``."""
    cur = Cursor(text)
    phi = _parse_young(cur)
    cur.finish()
    return phi


def _parse_young(cur: Cursor) -> YoungFn:
    start = cur.pos
    name = cur.ident()
    try:
        if name == "id":
            return Identity()
        if name == "antonov":
            return Antonov()
        if name == "triplelog":
            return TripleLog()
        if name in ("pow", "llogl"):
            cur.expect(":")
            at = cur.pos
            val = cur.number()
            try:
                return Power(val) if name == "pow" else LLogL(val)
            except ValueError as exc:
                raise cur.error(str(exc), at) from None
        if name == "star":
            cur.expect("(")
            inner = _parse_young(cur)
            cur.expect(")")
            return StarOf(inner)
        if name == "powof":
            cur.expect("(")
            inner = _parse_young(cur)
            cur.expect(",")
            at = cur.pos
            q = cur.number()
            cur.expect(")")
            try:
                return PowerOf(inner, q)
            except ValueError as exc:
                raise cur.error(str(exc), at) from None
        if name == "scaled":
            cur.expect("(")
            at = cur.pos
            c = cur.number()
            cur.expect(",")
            inner = _parse_young(cur)
            cur.expect(")")
            try:
                return Scaled(c, inner)
            except ValueError as exc:
                raise cur.error(str(exc), at) from None
    except SpecError:
        raise
    raise cur.error(f"unknown Young function {name!r}", start)


# -- Luxemburg norms -------------------------------------------------------------


def _luxemburg_newton(v, w, W, phi, lam0, rtol, max_iter=60):
    """Newton on ``h(mu) = sum w Phi(mu v) / W - 1`` with ``mu = 1/lam``.

    ``h`` is convex and increasing, so after the first step the iterates
    decrease monotonically to the root.  Returns the solution nudged to the
    feasible side, and a mask of rows that converged and were verified.
    """
    with np.errstate(divide="ignore", over="ignore"):
        mu = 1.0 / lam0
    mu = np.minimum(mu, np.finfo(float).max)
    done = np.zeros(mu.size, dtype=bool)
    for _ in range(max_iter):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            t = mu[:, None] * v
            hv = (w * phi(t)).sum(axis=1) / W - 1.0
            dh = (w * v * phi.derivative(t)).sum(axis=1) / W
            step = hv / dh
            blown = ~np.isfinite(step)
            step = np.where(blown, 0.5 * mu, step)
            new = np.where(done, mu, np.maximum(mu - step, 0.1 * mu))
        done |= np.abs(step) <= 1e-3 * rtol * mu
        mu = new
        if np.all(done):
            break
    lam = (1.0 / mu) * (1.0 + 0.5 * rtol)
    with np.errstate(over="ignore", invalid="ignore"):
        feasible = (w * phi(v / lam[:, None])).sum(axis=1) <= W
    return lam, done & feasible


def luxemburg_rows(values, weights, phi: YoungFn, rtol: float = 1e-10, method: str = "newton") -> np.ndarray:
    """Row-wise Luxemburg norms.

    ``values`` is ``(R, n)`` of magnitudes, ``weights`` broadcastable positive
    measures.  For each row the smallest ``lam`` with
    ``sum w Phi(v / lam) <= sum w`` is bracketed between ``avg / Phi^{-1}(1)``
    and ``max / Phi^{-1}(1)`` (Jensen and monotonicity) and bisected in
    ``log lam``; the feasible end is returned.
    """
    v = np.abs(np.atleast_2d(np.asarray(values, dtype=float)))
    w = np.broadcast_to(np.asarray(weights, dtype=float), v.shape)
    W = w.sum(axis=1)
    inv1 = phi.inverse_at_one
    lo = (w * v).sum(axis=1) / W / inv1
    hi = v.max(axis=1) / inv1
    out = np.zeros(v.shape[0])
    live = hi > 0
    if not np.any(live):
        return out
    # guard the upper end against rounding in Phi^{-1}(1)
    hi = hi * (1 + 4 * rtol)
    lo, hi, v, w, W = lo[live], hi[live], v[live], w[live], W[live]
    # subnormal rows: keep the bracket strictly positive
    lo = np.clip(lo, np.maximum(hi * 1e-300, np.finfo(float).tiny), hi)
    if method == "newton" and hasattr(phi, "derivative"):
        got, ok = _luxemburg_newton(v, w, W, phi, lo, rtol)
        if np.all(ok):
            out[live] = got
            return out
        res = got.copy()
        bad = ~ok
        res[bad] = luxemburg_rows(v[bad], w[bad], phi, rtol, method="bisect")
        out[live] = res
        return out
    llo, lhi = np.log(lo), np.log(hi)
    step = math.log1p(rtol)
    iters = int(np.ceil(np.log2(np.maximum((lhi - llo).max(), step) / step))) + 1
    for _ in range(iters):
        mid = 0.5 * (llo + lhi)
        with np.errstate(over="ignore", invalid="ignore"):
            s = (w * phi(v / np.exp(mid)[:, None])).sum(axis=1)
        ok = s <= W
        lhi = np.where(ok, mid, lhi)
        llo = np.where(ok, llo, mid)
    out[live] = np.exp(lhi)
    return out


def _interval_data(f, Q):
    v = as_values(f)
    if v.size != Q.N:
        raise ValueError("signal and interval live on different grids")
    idx, wts = Q.cell_weights()
    return v[idx], wts, idx


def luxemburg_norm(f, Q, phi: YoungFn) -> float:
    """Mean Luxemburg norm ``||f||_{Phi,Q}``."""
    v, wts, _ = _interval_data(f, Q)
    return float(luxemburg_rows(np.abs(v)[None, :], wts[None, :], phi)[0])


def weighted_luxemburg(f, Q, phi: YoungFn, w) -> float:
    """Luxemburg norm for the probability measure ``w dx / w(Q)`` on ``Q``."""
    v, wts, idx = _interval_data(f, Q)
    wv = as_values(w.signal if hasattr(w, "signal") else w).real[idx] * wts
    if not np.all(wv > 0):
        raise ValueError("weight must be strictly positive on the interval")
    return float(luxemburg_rows(np.abs(v)[None, :], wv[None, :], phi)[0])


# -- complementary functions -------------------------------------------------------


@dataclass(frozen=True)
class Complementary:
    """``bar Phi(t) = sup_{s > 0} (s t - Phi(s))`` via the stationary point ``Phi'(s) = t``.

    ``Phi'`` is nondecreasing, so it is tabulated once on a grid in ``log s``;
    each ``t`` is bracketed by table lookup and the root polished by Illinois
    regula falsi.  Values over ``CAP``, or ``t`` beyond ``sup Phi'`` on the
    search range, are ``+inf``; ``t <= Phi'(0+)`` gives 0.
    """

    phi: YoungFn
    step: float = 0.5
    iterations: int = 60

    @cached_property
    def _table(self):
        u = np.arange(LOG_MIN, LOG_MAX + self.step, self.step)
        with np.errstate(over="ignore", invalid="ignore"):
            d = np.asarray(self.phi.derivative(np.exp(u)), float)
        d = np.maximum.accumulate(np.where(np.isnan(d), np.inf, d))
        return u, d

    def _obj(self, u, t):
        with np.errstate(over="ignore", invalid="ignore"):
            s = np.exp(u)
            val = s * t - self.phi(s)
        return np.where(np.isnan(val), -np.inf, val)

    def _search(self, t):
        t = _pos(t)
        shape = t.shape
        t = t.ravel()
        ug, dg = self._table
        k = np.searchsorted(dg, t, side="left")
        zero = k == 0
        # the root lies where Phi' overflows: s t is beyond CAP there
        pinned = (k == ug.size) | ~np.isfinite(dg[np.minimum(k, ug.size - 1)])
        inner = ~(zero | pinned)
        ti = t[inner]
        ki = k[inner]
        a, b = ug[ki - 1], ug[ki]
        fa, fb = dg[ki - 1] - ti, dg[ki] - ti
        side = np.zeros(ti.shape, int)
        for _ in range(self.iterations):
            live = (b - a > 1e-13 * np.maximum(1.0, np.abs(b))) & (fb != 0)
            if not live.any():
                break
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                x = b - fb * (b - a) / (fb - fa)
            bad = ~np.isfinite(x) | (x <= a) | (x >= b)
            x = np.where(bad, 0.5 * (a + b), x)
            with np.errstate(over="ignore", invalid="ignore"):
                fx = np.asarray(self.phi.derivative(np.exp(x)), float) - ti
            fx = np.where(np.isnan(fx), np.inf, fx)
            up = fx >= 0
            # Illinois: halve the retained endpoint's residual after two same-side steps
            nfa = np.where(up, np.where(side == 1, 0.5 * fa, fa), fx)
            nfb = np.where(up, fx, np.where(side == -1, 0.5 * fb, fb))
            na = np.where(up, a, x)
            nb = np.where(up, x, b)
            side = np.where(live, np.where(up, 1, -1), side)
            a, b = np.where(live, na, a), np.where(live, nb, b)
            fa, fb = np.where(live, nfa, fa), np.where(live, nfb, fb)
        va, vb = self._obj(a, ti), self._obj(b, ti)
        best = np.zeros(t.shape)
        arg = np.zeros(t.shape)
        best[inner] = np.maximum(np.maximum(va, vb), 0.0)
        with np.errstate(over="ignore"):
            arg[inner] = np.exp(np.where(va >= vb, a, b))
        arg[inner] = np.where(best[inner] > 0, arg[inner], 0.0)
        capped = pinned | (best > CAP)
        capped[inner] |= ~(np.isfinite(va) | np.isfinite(vb))
        out = np.where(capped, np.inf, best)
        arg = np.where(capped, np.inf, arg)
        return out.reshape(shape), capped.reshape(shape), arg.reshape(shape)

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Values and a mask of entries reported as ``+inf`` by the cap."""
        out, capped, _ = self._search(t)
        return out, capped

    def maximiser(self, t):
        """The ``s`` attaining the supremum, equal to ``bar Phi'(t)``."""
        return self._search(t)[2]

    derivative = maximiser

    def __call__(self, t):
        return self.evaluate(t)[0]

    def log_value(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self(np.exp(np.asarray(x, float))))

    @cached_property
    def inverse_at_one(self) -> float:
        lo, hi = -60.0, 60.0
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            if self(math.exp(mid)) > 1:
                hi = mid
            else:
                lo = mid
        return math.exp(hi)

    @property
    def spec(self):
        return f"bar({self.phi.spec})"


@lru_cache(maxsize=64)
def complementary(phi: YoungFn) -> Complementary:
    # cached so that inverse_at_one is computed once per Young function
    return Complementary(phi)


# -- B_p constants ---------------------------------------------------------------


@dataclass(frozen=True)
class BpConstant:
    value: float
    p: float
    error: float
    convergent: bool
    integral: float = math.inf
    note: str = ""

    def __bool__(self):
        return self.convergent


def bp_constant(phi: YoungFn, p: float, rtol: float = 1e-9) -> BpConstant:
    """``C_Phi(p) = (int_1^inf Phi(t) t^{-p} dt/t)^{1/p}`` with ``t = e^u``.

    Convergence is decided by the growth exponent of the catalogue member
    (``Phi(t) = t^a`` times logarithmic factors that never decay): the integral
    converges iff ``a < p``.  The integral is then summed over doubling panels
    in ``u`` until the remaining geometric tail is negligible.
    """
    if not p > 1:
        raise ValueError("B_p constants need p > 1")
    if phi.exponent >= p - 1e-12:
        return BpConstant(math.inf, p, 0.0, False, note=f"growth exponent {phi.exponent:g} >= p")

    def g(u):
        return float(phi.log_value(np.array([u]))[0]) - p * u

    def integrand(u):
        return math.exp(g(u))

    total, err = 0.0, 0.0
    a, b = 0.0, 1.0
    while b < 2.0**62:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(integrand, a, b, epsabs=1e-16 * total, epsrel=1e-12, limit=400)
        total += val
        err += e
        ga, gb = g(a), g(b)
        slope = (gb - ga) / (b - a)
        if slope < 0 and b >= 8:
            tail = math.exp(gb) / -slope
            if tail <= 1e-3 * rtol * total:
                err += tail
                value = total ** (1 / p)
                return BpConstant(value, p, value * err / (p * total), True, total)
        a, b = b, 2 * b
    return BpConstant(math.inf, p, math.inf, False, note="no geometric decay before u = 2^62")


# -- Orlicz-Luxemburg duality -------------------------------------------------------


@dataclass(frozen=True)
class DualityResult:
    norm: float
    pairing: float
    best_pairing: float
    witness: np.ndarray
    witness_norm: float
    cells: np.ndarray
    # entries of the normalised rows where bar Phi hit the +inf cap
    cap_hits: int = 0

    @property
    def kappa(self) -> float:
        return self.pairing / self.norm if self.norm else 1.0

    @property
    def lower(self) -> float:
        return self.pairing

    @property
    def upper(self) -> float:
        return self.best_pairing

    def within(self, low: float = 0.5, high: float = 2.0, slack: float = 1e-6) -> bool:
        return self.pairing >= low * self.norm and self.best_pairing <= (high + slack) * self.norm


def duality_gap(f, Q, phi: YoungFn, n_perturb: int = 8, seed: int = 0) -> DualityResult:
    """Near-extremal dual witness for ``||f||_{Phi,Q}``.

    ``g = Phi'(|f| / ||f||) * conj(sign f)`` normalised to unit ``bar Phi``
    Luxemburg norm; random multiplicative perturbations of ``g`` (each
    renormalised) probe the supremum from below.
    """
    v, wts, idx = _interval_data(f, Q)
    mag = np.abs(v)
    norm = float(luxemburg_rows(mag[None, :], wts[None, :], phi)[0])
    if norm == 0:
        return DualityResult(0.0, 0.0, 0.0, np.zeros(mag.size), 0.0, idx)
    phase = np.where(mag > 0, np.conj(v) / np.where(mag > 0, mag, 1), 0)
    g0 = np.where(mag > 0, phi.derivative(mag / norm), 0.0)
    rng = np.random.default_rng(seed)
    rows = [g0]
    for _ in range(n_perturb):
        rows.append(g0 * np.exp(0.3 * rng.standard_normal(g0.size)) + 0.05 * rng.random(g0.size) * g0.max())
    G = np.array(rows)
    bar = complementary(phi)
    gnorm = luxemburg_rows(G, wts[None, :], bar)
    gnorm = np.where(gnorm > 0, gnorm, 1.0)
    W = wts.sum()
    pair = np.real((G * (v * phase).real[None, :] * wts).sum(axis=1)) / gnorm / W
    witness = g0 / gnorm[0] * phase
    _, capped = bar.evaluate(G / gnorm[:, None])
    return DualityResult(norm, float(pair[0]), float(pair.max()), witness, float(gnorm[0]), idx, int(capped.sum()))


# -- property probes over the catalogue ---------------------------------------------


def sample_grid(lo_exp: int = -20, hi_exp: int = 20, per_octave: int = 8) -> np.ndarray:
    return 2.0 ** np.linspace(lo_exp, hi_exp, (hi_exp - lo_exp) * per_octave + 1)


def check_young(phi: YoungFn, t=None) -> dict:
    """Finite-difference checks of ``Phi(0)=0``, monotonicity, convexity and ``t <= Phi(t)``."""
    t = sample_grid() if t is None else np.asarray(t, float)
    vals = phi(t)
    slopes = np.diff(np.concatenate([[0.0], vals])) / np.diff(np.concatenate([[0.0], t]))
    tol = 1e-9 * np.maximum(1.0, np.abs(slopes[1:]))
    return {
        "zero": float(phi(np.array([0.0]))[0]) == 0.0,
        "nondecreasing": bool(np.all(np.diff(vals) >= -1e-12 * np.abs(vals[1:]))),
        "convex": bool(np.all(np.diff(slopes) >= -tol)),
        "dominates_identity": bool(np.all(vals >= t * (1 - 1e-12))),
    }


CATALOGUE = (Identity(), Power(1.5), Power(2.0), Power(3.0), LLogL(0.5), LLogL(1.0), LLogL(2.0), Antonov(), TripleLog())
