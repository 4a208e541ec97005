"""Weights on the circle and their Muckenhoupt-type constants.

Constants are suprema over *all* cell-aligned arcs by default (``scope="all"``),
computed exactly from prefix sums; ``scope="dyadic"`` restricts to the
standard dyadic grid and is flagged as such by callers.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._parse import Cursor
from .grid import Arc, GridSpec, StepSignal, prefix_sums, read_signal_csv, real_values

MIN_WEIGHT = 1e-300


@dataclass(frozen=True, eq=False)
class WeightProfile:
    """Strictly positive step weight with cached prefix sums of its powers."""

    signal: StepSignal
    label: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        v = real_values(self.signal)
        if not np.all(np.isfinite(v)) or v.min() < MIN_WEIGHT:
            raise ValueError(f"weights must be finite and >= {MIN_WEIGHT:g}")
        if not isinstance(self.signal, StepSignal):
            object.__setattr__(self, "signal", StepSignal(v))

    @classmethod
    def from_values(cls, values, label: str = "") -> "WeightProfile":
        return cls(StepSignal(np.asarray(values, dtype=float)), label)

    @property
    def values(self) -> np.ndarray:
        return self.signal.values.real if np.iscomplexobj(self.signal.values) else self.signal.values

    @property
    def N(self) -> int:
        return self.signal.N

    def power_prefix(self, exponent: float) -> np.ndarray:
        """Prefix sums of ``w**exponent`` over two periods (write-once cache)."""
        key = float(exponent)
        got = self._cache.get(key)
        if got is None:
            with self._lock:
                got = self._cache.get(key)
                if got is None:
                    got = prefix_sums(np.tile(self.values**key, 2))
                    got.setflags(write=False)
                    self._cache[key] = got
        return got

    def average(self, arc: Arc, exponent: float = 1.0) -> float:
        """Average of ``w**exponent`` over a cell-aligned arc."""
        P = self.power_prefix(exponent)
        if arc.full:
            return P[self.N] / self.N
        s = int(arc.start) % self.N
        L = int(arc.length)
        return (P[s + L] - P[s]) / L

    def mass(self, arc) -> float:
        """``w(Q)`` (integral over the arc, fractional end cells allowed)."""
        idx, wts = arc.cell_weights()
        return float(np.dot(self.values[idx], wts)) / self.N

    def __mul__(self, c: float) -> "WeightProfile":
        return WeightProfile(StepSignal(self.values * c), self.label)

    __rmul__ = __mul__


def _as_profile(w) -> WeightProfile:
    return w if isinstance(w, WeightProfile) else WeightProfile.from_values(np.asarray(w, float))


@dataclass(frozen=True)
class ConstantResult:
    value: float
    arc: Arc
    scope: str

    def __float__(self):
        return self.value


def _window_means(P: np.ndarray, N: int, L: int) -> np.ndarray:
    s = np.arange(N)
    return (P[s + L] - P[s]) / L


def _dyadic_arcs(N: int):
    K = GridSpec.from_n(N).K
    for j in range(K + 1):
        L = N >> j
        yield L, np.arange(0, N, L)


def _sweep(N, stat, scope):
    """Maximise ``stat(L, starts) -> values`` over arcs in the scope."""
    best, arg = -math.inf, Arc(N, 0, N)
    if scope == "all":
        gen = ((L, np.arange(N) if L < N else np.array([0])) for L in range(1, N + 1))
    elif scope == "dyadic":
        gen = _dyadic_arcs(N)
    else:
        raise ValueError(f"unknown scope {scope!r}")
    for L, starts in gen:
        vals = stat(L, starts)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), Arc(N, int(starts[i]), L)
    return best, arg


def ap_constant(w, p: float, scope: str = "all") -> ConstantResult:
    """``[w]_{A_p} = sup_Q <w>_Q <w^{-1/(p-1)}>_Q^{p-1}`` with an arg-max arc."""
    if not p > 1:
        raise ValueError("A_p needs p > 1")
    w = _as_profile(w)
    Pw = w.power_prefix(1.0)
    Ps = w.power_prefix(-1.0 / (p - 1))

    def stat(L, s):
        return (Pw[s + L] - Pw[s]) / L * ((Ps[s + L] - Ps[s]) / L) ** (p - 1)

    val, arc = _sweep(w.N, stat, scope)
    return ConstantResult(val, arc, scope)


def a1_constant(w, scope: str = "all") -> ConstantResult:
    """``[w]_{A_1} = sup_Q <w>_Q / min_Q w``."""
    w = _as_profile(w)
    N = w.N
    v2 = np.tile(w.values, 2)
    P = w.power_prefix(1.0)
    if scope == "all":
        best, arg = -math.inf, Arc(N, 0, N)
        run_min = v2[:N].copy()
        s = np.arange(N)
        for L in range(1, N + 1):
            if L > 1:
                np.minimum(run_min, v2[s + L - 1], out=run_min)
            vals = (P[s + L] - P[s]) / L / run_min
            if L == N:
                vals = vals[:1]
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, arg = float(vals[i]), Arc(N, i, L)
        return ConstantResult(best, arg, scope)

    def stat(L, starts):
        mins = v2[: N].reshape(-1, L).min(axis=1)
        return (P[starts + L] - P[starts]) / L / mins

    val, arc = _sweep(N, stat, scope)
    return ConstantResult(val, arc, scope)


def _restricted_maximal_integrals(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For every proper arc ``[a, a+L)``: ``sum_{x in Q} M(w chi_Q)(x)`` in cell units.

    The maximal function over subarcs grows monotonically with ``L``; extending
    the arc by its right cell adds only subarcs ending there, whose averages
    are folded in with a running prefix maximum.  Returns ``(sums, masses)``
    of shape ``(N-1, N)`` indexed ``[L-1, a]``.
    """
    N = v.size
    P = prefix_sums(np.tile(v, 2))
    a = np.arange(N)
    M = np.zeros((N, N))
    sums = np.empty((N - 1, N))
    masses = np.empty((N - 1, N))
    for L in range(1, N):
        S = np.arange(L)
        right = P[a + L]
        R = (right[:, None] - P[a[:, None] + S[None, :]]) / (L - S)[None, :]
        np.maximum.accumulate(R, axis=1, out=R)
        np.maximum(M[:, :L], R, out=M[:, :L])
        sums[L - 1] = M[:, :L].sum(axis=1)
        masses[L - 1] = right - P[a]
    return sums, masses


def ainfty_constant(w, scope: str = "all") -> ConstantResult:
    """Fujii-Wilson ``[w]_{A_inf} = sup_Q w(Q)^{-1} int_Q M(w chi_Q)``."""
    from .operators import maximal

    w = _as_profile(w)
    v = w.values
    N = v.size
    full = float(np.sum(real_values(maximal(v))) / np.sum(v))
    best, arg = full, Arc(N, 0, N)
    if scope == "all":
        sums, masses = _restricted_maximal_integrals(v)
        ratio = sums / masses
        k = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        if ratio[k] > best:
            best, arg = float(ratio[k]), Arc(N, int(k[1]), int(k[0]) + 1)
    elif scope == "dyadic":
        for L, starts in _dyadic_arcs(N):
            if L == N:
                continue
            for s in starts:
                seg = v[s : s + L]
                r = np.sum(real_values(_segment_maximal(seg))) / np.sum(seg)
                if r > best:
                    best, arg = float(r), Arc(N, int(s), L)
    else:
        raise ValueError(f"unknown scope {scope!r}")
    return ConstantResult(best, arg, scope)


def _segment_maximal(seg: np.ndarray) -> np.ndarray:
    """Uncentered maximal function of a non-periodic segment over its subintervals."""
    n = seg.size
    P = prefix_sums(seg)
    out = seg.astype(float).copy()
    for L in range(2, n + 1):
        s = np.arange(n - L + 1)
        avg = (P[s + L] - P[s]) / L
        # arc [s, s+L) covers cells s..s+L-1
        cover = np.full(n, -np.inf)
        for off in range(L):
            np.maximum.at(cover, s + off, avg)
        np.maximum(out, cover, out=out)
    return out


def dual_weight(w, p: float) -> WeightProfile:
    """``sigma = w^{-1/(p-1)}``."""
    if not p > 1:
        raise ValueError("dual weight needs p > 1")
    w = _as_profile(w)
    return WeightProfile(StepSignal(w.values ** (-1.0 / (p - 1))), f"sigma[{w.label}]")


def rw_exponent(w, a1: float | None = None) -> float:
    """``r_w = 1 + 1 / (4 [w]_{A_1})``."""
    if a1 is None:
        a1 = a1_constant(w).value
    return 1.0 + 1.0 / (4.0 * a1)


def conjugate_exponent(p: float) -> float:
    return p / (p - 1)


def openness_probe(w, p: float, kappa: float = 0.25, via: str = "ap") -> dict:
    """Ratio ``[w]_{A_{p - eps}} / [w]_{A_p}`` for ``eps`` tied to the weight.

    ``via="ap"`` uses ``eps = kappa [w]_{A_p}^{1-p'}``; ``via="sigma"`` uses
    ``eps = kappa / [sigma]_{A_inf}``.
    """
    ap = ap_constant(w, p).value
    if via == "ap":
        eps = kappa * ap ** (1 - conjugate_exponent(p))
    elif via == "sigma":
        eps = kappa / ainfty_constant(dual_weight(w, p)).value
    else:
        raise ValueError(f"unknown via {via!r}")
    eps = min(eps, 0.5 * (p - 1))
    lower = ap_constant(w, p - eps).value
    return {"p": p, "kappa": kappa, "eps": eps, "ap": ap, "ap_minus_eps": lower, "ratio": lower / ap}


# -- families --------------------------------------------------------------------


def _distance_power_cell_averages(N: int, alpha: float, x0: float) -> np.ndarray:
    """Exact cell averages of ``d(x, x0)^alpha`` for ``alpha > -1``."""
    if not alpha > -1:
        raise ValueError("power weights need alpha > -1")
    b = alpha + 1.0
    half_mass = 0.5**b / b

    def D(y):
        # antiderivative of min(y, 1-y)^alpha on [0, 1]
        return np.where(y <= 0.5, y**b / b, 2 * half_mass - (1.0 - y) ** b / b)

    def Dunwrapped(y):
        k = np.floor(y)
        return k * 2 * half_mass + D(y - k)

    edges = np.arange(N + 1) / N - x0
    F = Dunwrapped(edges)
    return np.diff(F) * N


@dataclass(frozen=True)
class PowerWeight:
    alpha: float
    x0: float = 0.0

    def instantiate(self, N: int) -> WeightProfile:
        v = _distance_power_cell_averages(N, self.alpha, self.x0)
        return WeightProfile.from_values(np.maximum(v, MIN_WEIGHT), self.spec)

    @property
    def spec(self):
        return f"power:{_num(self.alpha)}" + (f"@{_num(self.x0)}" if self.x0 else "")


@dataclass(frozen=True)
class PiecewisePower:
    """Product of distance powers ``prod_k d(x, x_k)^{alpha_k}`` (cell averages per factor)."""

    factors: tuple[tuple[float, float], ...]

    def instantiate(self, N: int) -> WeightProfile:
        v = np.ones(N)
        for alpha, x0 in self.factors:
            v = v * _distance_power_cell_averages(N, alpha, x0)
        return WeightProfile.from_values(np.maximum(v, MIN_WEIGHT), self.spec)

    @property
    def spec(self):
        return "pwpower:" + ",".join(f"{_num(a)}@{_num(x)}" for a, x in self.factors)


@dataclass(frozen=True)
class TwoValue:
    a: float
    b: float
    split: float = 0.5

    def instantiate(self, N: int) -> WeightProfile:
        x = (np.arange(N) + 0.5) / N
        return WeightProfile.from_values(np.where(x < self.split, self.a, self.b), self.spec)

    @property
    def spec(self):
        tail = f",{_num(self.split)}" if self.split != 0.5 else ""
        return f"twovalue:{_num(self.a)},{_num(self.b)}{tail}"


@dataclass(frozen=True)
class Unit:
    def instantiate(self, N: int) -> WeightProfile:
        return WeightProfile.from_values(np.ones(N), "one")

    @property
    def spec(self):
        return "one"


@dataclass(frozen=True)
class RandomA1:
    """``(M g)^delta`` for a seeded random ``g``, with ``delta`` tuned towards ``[w]_{A_1} = target``."""

    seed: int
    target: float

    def instantiate(self, N: int) -> WeightProfile:
        from .operators import maximal

        if self.target < 1:
            raise ValueError("an A_1 constant is at least 1")
        rng = np.random.default_rng(self.seed)
        blocks = rng.lognormal(0.0, 1.5, size=max(4, N // 16))
        g = np.repeat(blocks, N // blocks.size)[:N]
        spikes = rng.choice(N, size=max(1, N // 64), replace=False)
        g[spikes] *= rng.lognormal(2.0, 1.0, size=spikes.size)
        Mg = real_values(maximal(g))
        Mg = Mg / Mg.mean()
        lo, hi = 0.0, 0.999
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if a1_constant(Mg**mid).value < self.target:
                lo = mid
            else:
                hi = mid
        return WeightProfile.from_values(Mg**lo, self.spec)

    @property
    def spec(self):
        return f"randa1:{self.seed},{_num(self.target)}"


@dataclass(frozen=True)
class FileWeight:
    path: str

    def instantiate(self, N: int) -> WeightProfile:
        sig = read_signal_csv(self.path)
        if sig.N != N:
            raise ValueError(f"{self.path}: weight has {sig.N} cells, grid has {N}")
        return WeightProfile(StepSignal(sig.real()), self.spec)

    @property
    def spec(self):
        return f"csv:{self.path}"


def _num(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def parse_weight(text: str):
    """Parse ``power:a[@x0] | twovalue:a,b[,split] | pwpower:a@x,... | randa1:seed,target | one | csv:path``."""
    cur = Cursor(text)
    start = cur.pos
    name = cur.ident()
    if name == "one":
        cur.finish()
        return Unit()
    if name == "csv":
        cur.expect(":")
        path = text[cur.pos :].strip()
        if not path:
            raise cur.error("expected a file path")
        return FileWeight(path)
    cur.expect(":")
    if name == "power":
        at = cur.pos
        a = cur.number()
        x0 = cur.number() if cur.accept("@") else 0.0
        cur.finish()
        if not a > -1:
            raise cur.error("power exponent must exceed -1", at)
        return PowerWeight(a, x0)
    if name == "twovalue":
        at = cur.pos
        a = cur.number()
        cur.expect(",")
        b = cur.number()
        split = cur.number() if cur.accept(",") else 0.5
        cur.finish()
        if a <= 0 or b <= 0:
            raise cur.error("two-value weights must be positive", at)
        if not 0 < split < 1:
            raise cur.error("split must lie in (0, 1)", at)
        return TwoValue(a, b, split)
    if name == "pwpower":
        factors = []
        while True:
            at = cur.pos
            a = cur.number()
            cur.expect("@")
            x = cur.number()
            if not a > -1:
                raise cur.error("power exponent must exceed -1", at)
            factors.append((a, x))
            if not cur.accept(","):
                break
        cur.finish()
        return PiecewisePower(tuple(factors))
    if name == "randa1":
        seed = cur.number()
        cur.expect(",")
        at = cur.pos
        target = cur.number()
        cur.finish()
        if target < 1:
            raise cur.error("target A_1 constant must be >= 1", at)
        return RandomA1(int(seed), target)
    raise cur.error(f"unknown weight family {name!r}", start)
