"""Periodic dyadic step signals on the unit circle.

Everything in the package is a step function on ``N = 2**K`` equal cells of
``[0, 1)`` with periodic indexing.  Intervals are arcs measured in cell units;
arcs with integer endpoints are *cell-aligned*, dilated arcs may cover cells
fractionally at their ends.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MIN_K = 3
MAX_K = 16
# Prefix sums switch to extended-precision accumulation from this size on.
COMPENSATED_FROM = 2**12


@dataclass(frozen=True)
class GridSpec:
    K: int

    def __post_init__(self):
        if not (MIN_K <= self.K <= MAX_K):
            raise ValueError(f"K must lie in [{MIN_K}, {MAX_K}], got {self.K}")

    @property
    def N(self) -> int:
        return 1 << self.K

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @classmethod
    def from_n(cls, N: int) -> "GridSpec":
        N = int(N)
        if N <= 0 or N & (N - 1):
            raise ValueError(f"cell count must be a power of two, got {N}")
        return cls(N.bit_length() - 1)

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) / self.N


@dataclass(frozen=True, eq=False)
class StepSignal:
    """A function constant on each cell of a :class:`GridSpec`."""

    values: np.ndarray
    grid: GridSpec = field(init=False)

    def __post_init__(self):
        v = np.array(self.values)
        if v.ndim != 1:
            raise ValueError("StepSignal values must be one-dimensional")
        if not np.iscomplexobj(v):
            v = v.astype(float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grid", GridSpec.from_n(v.size))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, StepSignal):
            return NotImplemented
        return self.values.shape == other.values.shape and np.array_equal(self.values, other.values)

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)

    def real(self) -> np.ndarray:
        if not self.is_real:
            raise ValueError("signal has a nonzero imaginary part")
        return np.real(self.values).astype(float)

    def integral(self) -> complex | float:
        v = self.values
        if np.iscomplexobj(v):
            return complex(math.fsum(v.real), math.fsum(v.imag)) / v.size
        return math.fsum(v) / v.size

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], N: int) -> "StepSignal":
        """Sample ``fn`` at cell midpoints."""
        return cls(fn(GridSpec.from_n(N).midpoints()))

    @classmethod
    def constant(cls, c, N: int) -> "StepSignal":
        return cls(np.full(N, c))


def as_values(f) -> np.ndarray:
    return f.values if isinstance(f, StepSignal) else np.asarray(f)


def real_values(f) -> np.ndarray:
    v = as_values(f)
    if np.iscomplexobj(v):
        if np.any(v.imag):
            raise ValueError("operation requires a real-valued signal")
        v = v.real
    return v.astype(float)


def prefix_sums(x: np.ndarray) -> np.ndarray:
    """Prefix sums with a leading zero; extended precision for large grids."""
    x = np.asarray(x)
    out = np.zeros(x.size + 1, dtype=np.result_type(x, float))
    if x.size >= COMPENSATED_FROM and not np.iscomplexobj(x):
        out[1:] = np.cumsum(x.astype(np.longdouble)).astype(float)
    else:
        out[1:] = np.cumsum(x)
    return out


# -- intervals ---------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    """Arc ``[start, start + length)`` in cell units on a circle of ``N`` cells.

    ``length >= N`` means the whole circle.
    """

    N: int
    start: float
    length: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("arc length must be positive")

    @property
    def full(self) -> bool:
        return self.length >= self.N

    @property
    def measure(self) -> float:
        return min(self.length, self.N) / self.N

    @property
    def aligned(self) -> bool:
        return self.full or (float(self.start).is_integer() and float(self.length).is_integer())

    def cell_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell indices met by the arc and the covered fraction of each."""
        N = self.N
        if self.full:
            return np.arange(N), np.ones(N)
        a = self.start
        b = a + self.length
        lo, hi = math.floor(a), math.ceil(b)
        idx = np.arange(lo, hi)
        w = np.minimum(idx + 1, b) - np.maximum(idx, a)
        keep = w > 0
        return np.mod(idx[keep], N), w[keep]

    def cells(self) -> np.ndarray:
        if not self.aligned:
            raise ValueError("arc is not cell-aligned")
        return self.cell_weights()[0]

    def mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.cells()] = True
        return m

    def dilate(self, factor: float) -> "Arc":
        """Concentric dilate; saturates at the whole circle."""
        new_len = self.length * factor
        if new_len >= self.N:
            return Arc(self.N, 0, self.N)
        return Arc(self.N, self.start - (new_len - self.length) / 2, new_len)


@dataclass(frozen=True)
class DyadicInterval:
    """Interval ``index`` of level ``level`` in the grid shifted by ``shift`` cells."""

    K: int
    level: int
    index: int
    shift: int = 0

    def __post_init__(self):
        if not 0 <= self.level <= self.K:
            raise ValueError("level out of range")
        if not 0 <= self.index < (1 << self.level):
            raise ValueError("index out of range")

    @property
    def N(self) -> int:
        return 1 << self.K

    @property
    def ncells(self) -> int:
        return 1 << (self.K - self.level)

    @property
    def start(self) -> int:
        return (self.shift + self.index * self.ncells) % self.N

    @property
    def measure(self) -> float:
        return 2.0**-self.level

    @property
    def arc(self) -> Arc:
        return Arc(self.N, self.start, self.ncells)

    def cells(self) -> np.ndarray:
        return (self.start + np.arange(self.ncells)) % self.N

    def cell_weights(self):
        return self.cells(), np.ones(self.ncells)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.cells()] = True
        return m

    def double(self) -> Arc:
        """The concentric double ``2Q``."""
        return self.arc.dilate(2)

    def dilate(self, factor: float) -> Arc:
        return self.arc.dilate(factor)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        if self.level == self.K:
            return ()
        return tuple(DyadicInterval(self.K, self.level + 1, 2 * self.index + b, self.shift) for b in (0, 1))

    def contains(self, other: "DyadicInterval") -> bool:
        if other.shift != self.shift or other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def __str__(self):
        return f"D[s={self.shift},j={self.level},i={self.index}]"


def grid_shifts(N: int) -> tuple[int, int]:
    """The two supported grid offsets (in cells): 0 and floor(N/3)."""
    return (0, N // 3)


def enumerate_dyadic(grid: GridSpec, shift: int = 0) -> list[DyadicInterval]:
    if shift not in grid_shifts(grid.N):
        raise ValueError(f"unsupported shift {shift}; use one of {grid_shifts(grid.N)}")
    return [DyadicInterval(grid.K, j, i, shift) for j in range(grid.K + 1) for i in range(1 << j)]


def interval_weights(Q) -> tuple[np.ndarray, np.ndarray]:
    return Q.cell_weights()


def _cell_values(f, Q) -> np.ndarray:
    v = real_values(f)
    if v.size != Q.N:
        raise ValueError("signal and interval live on different grids")
    return v[Q.cells()]


# -- order statistics ----------------------------------------------------------


def _count(x: float) -> int:
    """Integer part of a cell count, snapping float noise to the nearest integer."""
    r = round(x)
    return int(r) if abs(x - r) < 1e-9 else math.floor(x)


def median(f, Q, rule: str = "lower") -> float:
    """Median of a real signal over a cell-aligned interval.

    Among the admissible medians the smallest (``rule="lower"``) or largest
    (``"upper"``) cell value is returned.
    """
    v = np.sort(_cell_values(f, Q))
    n = v.size
    if rule == "lower":
        return float(v[(n + 1) // 2 - 1])
    if rule == "upper":
        return float(v[n // 2])
    raise ValueError(f"unknown tie rule {rule!r}")


def rearrangement(f, Q, t: float) -> float:
    """``(f chi_Q)^*(t)`` for ``0 < t <= |Q|``."""
    if Q.N != len(as_values(f)):
        raise ValueError("signal and interval live on different grids")
    if not 0 < t <= Q.measure * (1 + 1e-12):
        raise ValueError(f"t must lie in (0, |Q|], got {t}")
    mag = np.sort(np.abs(as_values(f)[Q.cells()]))[::-1]
    k = _count(t * Q.N)
    return float(mag[k]) if k < mag.size else 0.0


def _oscillation_sorted(v_sorted: np.ndarray, lam: float) -> tuple[float, float]:
    """Exact ``inf_c ((f - c) chi_Q)^*(lam |Q|)`` from sorted cell values.

    At most ``K = floor(lam n)`` values may sit strictly outside ``[c - r, c + r]``,
    so the optimum is half the narrowest window holding ``n - K`` consecutive
    order statistics, attained at its midpoint.  Returns ``(omega, c)``.
    """
    n = v_sorted.size
    keep = n - _count(lam * n)
    if keep <= 1:
        return 0.0, float(v_sorted[0])
    widths = v_sorted[keep - 1 :] - v_sorted[: n - keep + 1]
    i = int(np.argmin(widths))
    lo, hi = v_sorted[i], v_sorted[i + keep - 1]
    return float((hi - lo) / 2), float(lo + (hi - lo) / 2)


def _check_lambda(lam):
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")


def oscillation(f, Q, lam: float = 1 / 8, method: str = "window") -> float:
    """Local mean oscillation ``omega_lambda(f; Q)``.

    ``method="window"`` uses the sorted-window closed form; ``"enumerate"``
    evaluates the objective at every cell value and pairwise midpoint.
    """
    _check_lambda(lam)
    v = _cell_values(f, Q)
    if method == "window":
        return _oscillation_sorted(np.sort(v), lam)[0]
    if method == "enumerate":
        u = np.unique(v)
        cand = np.unique(np.concatenate([u, ((u[:, None] + u[None, :]) / 2).ravel()]))
        k = _count(lam * v.size)
        dev = np.sort(np.abs(v[None, :] - cand[:, None]), axis=1)[:, ::-1]
        vals = dev[:, k] if k < v.size else np.zeros(cand.size)
        return float(vals.min())
    raise ValueError(f"unknown method {method!r}")


def oscillation_objective(f, Q, lam: float, c: float) -> float:
    """``((f - c) chi_Q)^*(lam |Q|)`` for a fixed constant ``c``."""
    _check_lambda(lam)
    v = _cell_values(f, Q) - c
    return rearrangement(_embed(v, Q), Q, lam * Q.measure)


def _embed(v, Q):
    out = np.zeros(Q.N)
    out[Q.cells()] = v
    return out


def oscillation_median_proxy(f, Q, lam: float = 1 / 8) -> float:
    """``((f - m_f(Q)) chi_Q)^*(lam |Q|)`` with the lower median."""
    return oscillation_objective(f, Q, lam, median(f, Q))


# -- Calderon-Zygmund kernels ----------------------------------------------------


def circle_distance(x, y):
    d = np.abs(np.asarray(x) - np.asarray(y)) % 1.0
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class CzKernelSpec:
    """Kernel ``K(x, y)`` on the circle with size constant ``c`` and smoothness ``delta``."""

    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray]
    c: float
    delta: float = 1.0
    name: str = "kernel"

    def size_ratio(self, x, y) -> float:
        """max of ``|K(x,y)| d(x,y) / c`` over the samples (<= 1 when the bound holds)."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        d = circle_distance(x, y)
        ok = d > 0
        return float(np.max(np.abs(self.kernel(x[ok], y[ok])) * d[ok] / self.c))

    def smoothness_constant(self, x, xp, y) -> float:
        """Smallest constant in condition (ii) seen on samples with ``d(x,x') < d(x,y)/2``."""
        x, xp, y = (np.asarray(a, float) for a in (x, xp, y))
        dxy = circle_distance(x, y)
        dxx = circle_distance(x, xp)
        ok = (dxx < dxy / 2) & (dxx > 0)
        x, xp, y, dxy, dxx = x[ok], xp[ok], y[ok], dxy[ok], dxx[ok]
        lhs = np.abs(self.kernel(x, y) - self.kernel(xp, y)) + np.abs(self.kernel(y, x) - self.kernel(y, xp))
        rhs = dxx**self.delta / dxy ** (1 + self.delta)
        return float(np.max(lhs / rhs)) if lhs.size else 0.0


def cot_kernel() -> CzKernelSpec:
    """Periodic Hilbert kernel ``cot(pi (x - y))``; ``|cot(pi d)| <= 1/(pi d)``."""
    return CzKernelSpec(lambda x, y: 1.0 / np.tan(np.pi * (np.asarray(x) - np.asarray(y))), 1 / np.pi, 1.0, "cot")


def cz_apply(kernel: CzKernelSpec, f) -> StepSignal:
    """Midpoint principal-value sum ``h * sum_{j != k} K(x_k, x_j) f_j``."""
    sig = f if isinstance(f, StepSignal) else StepSignal(f)
    x = sig.grid.midpoints()
    out = np.zeros(sig.N, dtype=np.result_type(sig.values, float))
    block = max(1, 2**22 // sig.N)
    for s in range(0, sig.N, block):
        xs = x[s : s + block]
        with np.errstate(divide="ignore", invalid="ignore"):
            Km = kernel.kernel(xs[:, None], x[None, :])
        rows = np.arange(xs.size)
        Km[rows, s + rows] = 0.0
        out[s : s + block] = Km @ sig.values
    return StepSignal(out / sig.N)


# -- serialization --------------------------------------------------------------


def write_signal_csv(path, f) -> None:
    v = as_values(f).astype(complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, z in enumerate(v):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def read_signal_csv(path) -> StepSignal:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or list(rows[0].keys()) != ["index", "re", "im"]:
        raise ValueError(f"{path}: expected header index,re,im")
    idx = [int(r["index"]) for r in rows]
    if idx != list(range(len(rows))):
        raise ValueError(f"{path}: indices must run 0..N-1 in order")
    re = np.array([float(r["re"]) for r in rows])
    im = np.array([float(r["im"]) for r in rows])
    GridSpec.from_n(len(rows))
    return StepSignal(re if not np.any(im) else re + 1j * im)
