"""Hilbert transform, modulations, the Carleson operator and maximal functions."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter1d

from ._parse import Cursor, SpecError
from .grid import GridSpec, StepSignal, as_values
from .young import Identity, YoungFn, luxemburg_rows, parse_young

ORLICZ_EXACT_MAX_N = 2**11
_CHUNK = 2**22  # complex entries per Carleson block


def frequencies(N: int) -> np.ndarray:
    """Integer frequencies ``-N/2 .. N/2-1`` in ascending order."""
    return np.arange(-(N // 2), N - N // 2)


def _signal(f) -> StepSignal:
    return f if isinstance(f, StepSignal) else StepSignal(np.asarray(f))


def hilbert_multiplier(N: int) -> np.ndarray:
    """``-i sgn(k)`` in FFT order with the DC and Nyquist lines zeroed."""
    k = np.fft.fftfreq(N, d=1.0 / N)
    m = -1j * np.sign(k)
    m[N // 2] = 0.0
    return m


def _hilbert_values(v: np.ndarray, axis: int = -1) -> np.ndarray:
    N = v.shape[axis]
    shape = [1] * v.ndim
    shape[axis] = N
    out = np.fft.ifft(np.fft.fft(v, axis=axis) * hilbert_multiplier(N).reshape(shape), axis=axis)
    return out.real if not np.iscomplexobj(v) else out


def hilbert(f) -> StepSignal:
    """Periodic conjugate function as a discrete Fourier multiplier."""
    return StepSignal(_hilbert_values(as_values(f)))


def hilbert_adjoint(f) -> StepSignal:
    return StepSignal(-_hilbert_values(as_values(f)))


def _phases(N: int, xi) -> np.ndarray:
    x = GridSpec.from_n(N).midpoints()
    return np.exp(2j * np.pi * np.multiply.outer(np.asarray(xi, dtype=float), x))


def modulate(f, xi) -> StepSignal:
    """``e^{2 pi i xi x} f(x)`` at cell midpoints."""
    v = as_values(f)
    if xi == 0:
        return StepSignal(v)
    return StepSignal(v * _phases(v.size, xi))


# -- Carleson ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrequencyChoice:
    """A per-cell integer frequency ``xi(x)``."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi)
        if xi.ndim != 1 or not np.issubdtype(xi.dtype, np.integer):
            raise ValueError("frequency choice must be a 1-d integer array")
        N = xi.size
        GridSpec.from_n(N)
        if xi.min() < -(N // 2) or xi.max() > N - N // 2 - 1:
            raise ValueError("frequencies must lie in -N/2 .. N/2-1")
        xi = xi.astype(np.int64)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def N(self) -> int:
        return self.xi.size

    @classmethod
    def constant(cls, xi0: int, N: int) -> "FrequencyChoice":
        return cls(np.full(N, xi0, dtype=np.int64))

    @classmethod
    def random(cls, N: int, seed: int) -> "FrequencyChoice":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(-(N // 2), N - N // 2, size=N))

    def __eq__(self, other):
        return isinstance(other, FrequencyChoice) and np.array_equal(self.xi, other.xi)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cell", "xi"])
            for i, k in enumerate(self.xi):
                w.writerow([i, int(k)])

    @classmethod
    def read_csv(cls, path) -> "FrequencyChoice":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["cell", "xi"]:
            raise ValueError(f"{path}: expected header 'cell,xi'")
        body = rows[1:]
        cells = [int(r[0]) for r in body]
        if cells != list(range(len(body))):
            raise ValueError(f"{path}: cells must be listed 0..N-1 in order")
        return cls(np.array([int(r[1]) for r in body], dtype=np.int64))


def _carleson_rows(F: np.ndarray, m: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """``ifft(F[(k - xi) mod N] m[k])`` for a block of frequencies (rows)."""
    N = F.size
    k = np.arange(N)
    idx = (k[None, :] - xis[:, None]) % N
    return np.fft.ifft(F[idx] * m[None, :], axis=1)


def carleson(f, return_choice: bool = False):
    """``C f(x) = max_xi |H(M^xi f)(x)|`` over all grid frequencies.

    Ties go to the lowest frequency.  With ``return_choice`` the arg-max is
    also returned as a :class:`FrequencyChoice`.
    """
    v = as_values(f)
    N = v.size
    F = np.fft.fft(v)
    m = hilbert_multiplier(N)
    xis = frequencies(N)
    best = np.full(N, -1.0)
    arg = np.zeros(N, dtype=np.int64)
    block = max(1, _CHUNK // N)
    for s in range(0, N, block):
        rows = np.abs(_carleson_rows(F, m, xis[s : s + block]))
        j = np.argmax(rows, axis=0)
        val = rows[j, np.arange(N)]
        better = val > best
        best = np.where(better, val, best)
        arg = np.where(better, xis[s + j], arg)
    out = StepSignal(best)
    return (out, FrequencyChoice(arg)) if return_choice else out


def carleson_oversampled(f, factor: int = 4) -> StepSignal:
    """Carleson supremum over the refined frequency set ``(1/factor) Z`` (small-N probe)."""
    v = as_values(f)
    N = v.size
    xis = np.arange(-(N // 2) * factor, (N - N // 2) * factor) / factor
    best = np.zeros(N)
    block = max(1, _CHUNK // (4 * N))
    for s in range(0, xis.size, block):
        mod = v[None, :] * _phases(N, xis[s : s + block])
        best = np.maximum(best, np.abs(_hilbert_values(mod, axis=1)).max(axis=0))
    return StepSignal(best)


def linearized_carleson(f, choice: FrequencyChoice) -> StepSignal:
    """``C_xi f(x) = H(M^{xi(x)} f)(x)``."""
    v = as_values(f).astype(complex)
    if choice.N != v.size:
        raise ValueError("choice and signal live on different grids")
    out = np.zeros(v.size, dtype=complex)
    for xi in np.unique(choice.xi):
        sel = choice.xi == xi
        out[sel] = _hilbert_values(v * _phases(v.size, xi))[sel]
    return StepSignal(out)


def adjoint_linearized(h, choice: FrequencyChoice) -> StepSignal:
    """Transpose of :func:`linearized_carleson` for ``<f, g> = mean(f conj g)``."""
    v = as_values(h).astype(complex)
    if choice.N != v.size:
        raise ValueError("choice and signal live on different grids")
    out = np.zeros(v.size, dtype=complex)
    for xi in np.unique(choice.xi):
        part = np.where(choice.xi == xi, v, 0)
        out += -_hilbert_values(part) * _phases(v.size, -xi)
    return StepSignal(out)


# -- maximal functions --------------------------------------------------------------

MODES = ("uncentered", "centered", "dyadic")


def _window_means(v: np.ndarray, L: int) -> np.ndarray:
    """Means over ``[s, s+L)`` for every start ``s`` (rows broadcast, periodic)."""
    N = v.shape[-1]
    P = np.cumsum(np.concatenate([np.zeros(v.shape[:-1] + (1,)), v, v], axis=-1), axis=-1)
    s = np.arange(N)
    return (P[..., s + L] - P[..., s]) / L


def _cover_max(a: np.ndarray, L: int) -> np.ndarray:
    """``out[x] = max_{s in [x-L+1, x]} a[s]``: best window of length ``L`` containing ``x``."""
    if L == 1:
        return a
    return maximum_filter1d(a, L, axis=-1, mode="wrap", origin=(L - 1) // 2)


def _centered_arcs(N: int):
    """``(length, offset)`` so the centered arc at ``x`` starts at ``x - offset``."""
    for L in range(1, N + 1):
        yield L, L // 2


def _maximal_rows(v: np.ndarray, mode: str, shift: int = 0) -> np.ndarray:
    a = np.abs(v).astype(float)
    N = a.shape[-1]
    if mode == "uncentered":
        out = a.copy()
        for L in range(2, N):
            np.maximum(out, _cover_max(_window_means(a, L), L), out=out)
        return np.maximum(out, a.mean(axis=-1, keepdims=True))
    if mode == "centered":
        P = np.cumsum(np.concatenate([np.zeros(a.shape[:-1] + (1,)), a, a, a], axis=-1), axis=-1)
        x = np.arange(N) + N
        out = a.copy()
        for L, off in _centered_arcs(N):
            s = x - off
            np.maximum(out, (P[..., s + L] - P[..., s]) / L, out=out)
        return out
    if mode == "dyadic":
        r = np.roll(a, -shift, axis=-1)
        out = r.copy()
        L = 2
        while L <= N:
            blocks = r.reshape(r.shape[:-1] + (N // L, L)).mean(axis=-1)
            np.maximum(out, np.repeat(blocks, L, axis=-1), out=out)
            L *= 2
        return np.roll(out, shift, axis=-1)
    raise ValueError(f"unknown maximal mode {mode!r}")


def maximal(f, mode: str = "uncentered", shift: int = 0) -> StepSignal:
    """Hardy-Littlewood maximal function over cell-aligned arcs.

    ``uncentered``: all arcs containing the cell; ``centered``: arcs centered
    at the cell (left-of-center for even lengths); ``dyadic``: the dyadic grid
    translated by ``shift`` cells.
    """
    return StepSignal(_maximal_rows(as_values(f), mode, shift))


def maximal_rows(V: np.ndarray, mode: str = "uncentered", shift: int = 0) -> np.ndarray:
    """Row-batched :func:`maximal` on an ``(R, N)`` array."""
    return _maximal_rows(np.atleast_2d(np.asarray(V)), mode, shift)


def maximal_r(f, r: float, mode: str = "uncentered", shift: int = 0) -> StepSignal:
    """``M_r f = M(|f|^r)^{1/r}``."""
    if not r > 0:
        raise ValueError("r must be positive")
    a = np.abs(as_values(f)) ** r
    return StepSignal(_maximal_rows(a, mode, shift) ** (1.0 / r))


def _window_norms(a: np.ndarray, L: int, phi: YoungFn, starts: np.ndarray, w: np.ndarray | None = None):
    """Luxemburg norms of ``a`` on the windows ``[s, s+L)``, chunked by rows."""
    N = a.size
    a2 = np.concatenate([a, a])
    win = sliding_window_view(a2, L)
    ww = sliding_window_view(np.concatenate([w, w]), L) if w is not None else None
    out = np.empty(starts.size)
    rows = max(1, (1 << 20) // L)
    for i in range(0, starts.size, rows):
        s = starts[i : i + rows] % N
        wts = ww[s] if ww is not None else np.ones((1, L))
        out[i : i + rows] = luxemburg_rows(win[s], wts, phi)
    return out


def orlicz_maximal(f, phi: YoungFn, mode: str = "uncentered", shift: int = 0) -> StepSignal:
    """``M_Phi f(x) = sup_{Q ∋ x} ||f||_{Phi,Q}``.

    Exact over all arcs up to ``N = 2^11``; beyond that (or with
    ``mode="dyadic2"``) the maximum over the two standard shifted dyadic
    grids is returned and a warning is issued.
    """
    a = np.abs(as_values(f)).astype(float)
    N = a.size
    if isinstance(phi, Identity) and mode in MODES:
        return maximal(a, mode, shift)
    if mode in ("uncentered", "centered") and N > ORLICZ_EXACT_MAX_N:
        warnings.warn(
            f"orlicz_maximal: N={N} exceeds {ORLICZ_EXACT_MAX_N}; using the two-shift dyadic approximation",
            stacklevel=2,
        )
        mode = "dyadic2"
    if mode == "dyadic2":
        from .grid import grid_shifts

        outs = [orlicz_maximal(a, phi, "dyadic", s).values for s in grid_shifts(N)]
        return StepSignal(np.maximum(*outs))
    out = np.zeros(N)
    if mode == "uncentered":
        for L in range(1, N):
            norms = _window_norms(a, L, phi, np.arange(N))
            np.maximum(out, _cover_max(norms, L), out=out)
        full = luxemburg_rows(a[None, :], np.ones((1, N)), phi)[0]
        return StepSignal(np.maximum(out, full))
    if mode == "centered":
        x = np.arange(N)
        for L, off in _centered_arcs(N):
            np.maximum(out, _window_norms(a, L, phi, x - off), out=out)
        return StepSignal(out)
    if mode == "dyadic":
        L = 1
        while L <= N:
            starts = (np.arange(0, N, L) + shift) % N
            norms = _window_norms(a, L, phi, starts)
            cells = (starts[:, None] + np.arange(L)[None, :]) % N
            np.maximum.at(out, cells.ravel(), np.repeat(norms, L))
            L *= 2
        return StepSignal(out)
    raise ValueError(f"unknown maximal mode {mode!r}")


def weighted_centered_orlicz_maximal(f, phi: YoungFn, w) -> StepSignal:
    """``sup`` over arcs centered at the cell of the ``w``-weighted Luxemburg norm."""
    a = np.abs(as_values(f)).astype(float)
    wv = np.asarray(as_values(w.signal if hasattr(w, "signal") else w), dtype=float)
    N = a.size
    if wv.size != N:
        raise ValueError("weight and signal live on different grids")
    x = np.arange(N)
    out = np.zeros(N)
    if isinstance(phi, Identity):
        # weighted averages from prefix sums
        Pa = np.cumsum(np.concatenate([[0.0], np.tile(a * wv, 3)]))
        Pw = np.cumsum(np.concatenate([[0.0], np.tile(wv, 3)]))
        for L, off in _centered_arcs(N):
            s = x + N - off
            np.maximum(out, (Pa[s + L] - Pa[s]) / (Pw[s + L] - Pw[s]), out=out)
        return StepSignal(out)
    for L, off in _centered_arcs(N):
        np.maximum(out, _window_norms(a, L, phi, x - off, wv), out=out)
    return StepSignal(out)


# -- operator handles ---------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    """A named operator with an optional adjoint (linear handles only)."""

    spec: str
    apply: Callable[[StepSignal], StepSignal]
    adjoint: Callable[[StepSignal], StepSignal] | None = None

    @property
    def linear(self) -> bool:
        return self.adjoint is not None

    def __call__(self, f) -> StepSignal:
        return self.apply(_signal(f))


def _identity(f):
    return _signal(f)


IDENTITY = Operator("id", _identity, _identity)
HILBERT = Operator("hilbert", hilbert, hilbert_adjoint)
CARLESON = Operator("carleson", carleson)


def lincar_operator(choice: FrequencyChoice, spec: str | None = None) -> Operator:
    return Operator(
        spec or "lincar",
        lambda f: linearized_carleson(f, choice),
        lambda h: adjoint_linearized(h, choice),
    )


def parse_operator(text: str) -> Operator:
    """``id | hilbert | carleson | lincar:<file> | max[:mode[@shift]] | maxr:r | maxphi:<young>``."""
    cur = Cursor(text)
    start = cur.pos
    name = cur.ident()
    if name in ("id", "hilbert", "carleson"):
        cur.finish()
        return {"id": IDENTITY, "hilbert": HILBERT, "carleson": CARLESON}[name]
    if name == "lincar":
        cur.expect(":")
        path = text[cur.pos :].strip()
        if not path:
            raise cur.error("expected a frequency-choice file")
        return lincar_operator(FrequencyChoice.read_csv(path), text.strip())
    if name == "max":
        mode, shift = "uncentered", 0
        if cur.accept(":"):
            at = cur.pos
            mode = cur.ident()
            if mode not in MODES:
                raise cur.error(f"unknown maximal mode {mode!r}", at)
            if cur.accept("@"):
                if mode != "dyadic":
                    raise cur.error("only the dyadic mode takes a shift")
                shift = int(cur.number())
        cur.finish()
        return Operator(text.strip(), lambda f: maximal(f, mode, shift))
    if name == "maxr":
        cur.expect(":")
        at = cur.pos
        r = cur.number()
        cur.finish()
        if not r > 0:
            raise cur.error("r must be positive", at)
        return Operator(text.strip(), lambda f: maximal_r(f, r))
    if name == "maxphi":
        cur.expect(":")
        try:
            phi = parse_young(text[cur.pos :])
        except SpecError as e:
            raise SpecError(text, cur.pos + e.pos, e.msg) from None
        return Operator(f"maxphi:{phi.spec}", lambda f: orlicz_maximal(f, phi))
    raise cur.error(f"unknown operator {name!r}", start)
