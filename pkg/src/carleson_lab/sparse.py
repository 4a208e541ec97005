"""Sparse decomposition by local mean oscillations and the associated sparse operators.

Stopping rule used by :func:`sparse_decompose`.  For a cube ``Q`` with
median ``m_Q`` and oscillation ``w_Q = omega_lam(f; Q)`` put
``Omega_Q = {x in Q : |f(x) - m_Q| > t w_Q}`` (``t = 2`` by default) and
select the maximal dyadic ``P`` strictly inside ``Q`` with
``|Omega_Q ∩ P| >= |P| / 4``.  If ``c`` attains the oscillation then more
than half of ``Q`` lies within ``w_Q`` of ``c``, so ``|m_Q - c| <= w_Q`` and
``|Omega_Q| <= lam |Q|``.  Hence for ``lam <= 1/8`` the selected cubes cover
at most half of ``Q``.  The unselected parent of a selected ``P`` has
``|Omega_Q ∩ P| < |P| / 2``, which forces ``|m_P - m_Q| <= 2 w_Q``; so a
median jump beyond ``2 w_Q`` always triggers the mass condition and the
telescoped bound holds with constant 2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Arc, DyadicInterval, GridSpec, _oscillation_sorted, as_values, real_values
from .young import YoungFn, duality_gap, luxemburg_rows

CERT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SparseFamily:
    """Cubes of one dyadic grid with disjoint witness sets ``E(Q)`` (boolean cell masks)."""

    K: int
    shift: int
    cubes: tuple[DyadicInterval, ...]
    emasks: tuple[np.ndarray, ...]
    lam: float = 1 / 8
    omegas: tuple[float, ...] = ()
    medians: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.cubes) != len(self.emasks):
            raise ValueError("one witness mask per cube")
        for m in self.emasks:
            m.setflags(write=False)

    @property
    def N(self) -> int:
        return 1 << self.K

    def __len__(self):
        return len(self.cubes)

    def __eq__(self, other):
        return (
            isinstance(other, SparseFamily)
            and (self.K, self.shift, self.cubes) == (other.K, other.shift, other.cubes)
            and all(np.array_equal(a, b) for a, b in zip(self.emasks, other.emasks))
        )

    def depth(self) -> np.ndarray:
        """``sum_Q chi_Q`` per cell."""
        out = np.zeros(self.N, dtype=np.int64)
        for Q in self.cubes:
            out[Q.cells()] += 1
        return out

    def check(self) -> dict:
        """Exact sparseness, containment and disjointness checks."""
        cover = np.zeros(self.N, dtype=np.int64)
        sparse_ok = contained = True
        worst = None
        for Q, E in zip(self.cubes, self.emasks):
            cover += E
            if Q.ncells > 2 * int(E.sum()):
                sparse_ok = False
                worst = worst or Q
            if np.any(E & ~Q.mask()):
                contained = False
        return {
            "sparse": sparse_ok,
            "contained": contained,
            "disjoint": bool(cover.max(initial=0) <= 1),
            "offender": None if worst is None else str(worst),
        }

    # -- serialization -------------------------------------------------------------

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["shift", "level", "index", "emask_hex"])
            for Q, E in zip(self.cubes, self.emasks):
                w.writerow([self.shift, Q.level, Q.index, _mask_hex(E)])

    @classmethod
    def read_csv(cls, path, N: int, lam: float = 1 / 8) -> "SparseFamily":
        K = GridSpec.from_n(N).K
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["shift", "level", "index", "emask_hex"]:
            raise ValueError(f"{path}: expected header 'shift,level,index,emask_hex'")
        shifts = {int(r[0]) for r in rows[1:]}
        if len(shifts) > 1:
            raise ValueError(f"{path}: a family lives on a single grid")
        shift = shifts.pop() if shifts else 0
        cubes = tuple(DyadicInterval(K, int(r[1]), int(r[2]), shift) for r in rows[1:])
        masks = tuple(_hex_mask(r[3], N) for r in rows[1:])
        return cls(K, shift, cubes, masks, lam)


def _mask_hex(mask: np.ndarray) -> str:
    bits = np.packbits(mask.astype(np.uint8), bitorder="little")
    return int.from_bytes(bits.tobytes(), "little").to_bytes(len(bits), "big").hex() or "0"


def _hex_mask(text: str, N: int) -> np.ndarray:
    val = int(text, 16)
    if val >> N:
        raise ValueError("mask has bits beyond the grid")
    raw = np.frombuffer(val.to_bytes((N + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:N].astype(bool)


# -- decomposition ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Certificate:
    """Per-cell verification of ``|f - m_f(Q0)| <= 2 sum_Q omega_Q chi_Q`` plus sparseness."""

    residual: np.ndarray
    majorant: np.ndarray
    cells: np.ndarray
    checks: dict
    threshold: float
    lam: float
    failures: tuple = field(default=())

    @property
    def passed(self) -> bool:
        c = self.checks
        return not self.failures and c["sparse"] and c["disjoint"] and c["contained"]

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAILED"

    @property
    def max_ratio(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(self.residual > 0, self.residual / self.majorant, 0.0)
        return float(r.max(initial=0.0))

    def summary(self) -> str:
        c = self.checks
        off = f" first_failure={self.failures[0]}" if self.failures else ""
        return (
            f"status={self.status} cells={self.cells.size} lambda={self.lam!r} threshold={self.threshold!r} "
            f"sparse={c['sparse']} disjoint={c['disjoint']} contained={c['contained']} "
            f"max_ratio={self.max_ratio!r}{off}"
        )

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cell", "residual", "majorant", "ok"])
            bad = {f[0] for f in self.failures}
            for c, r, m in zip(self.cells, self.residual, self.majorant):
                w.writerow([int(c), repr(float(r)), repr(float(m)), int(int(c) not in bad)])
            fh.write("# " + self.summary() + "\n")


def _lower_median_sorted(s: np.ndarray) -> float:
    return float(s[(s.size + 1) // 2 - 1])


def sparse_decompose(f, Q0: DyadicInterval, lam: float = 1 / 8, threshold: float = 2.0):
    """Stopping-time decomposition of real ``f`` on ``Q0``; returns ``(family, certificate)``."""
    if not 0 < lam < 0.5:
        raise ValueError("lambda must lie in (0, 1/2)")
    v = real_values(f)
    if v.size != Q0.N:
        raise ValueError("signal and cube live on different grids")
    cells = Q0.cells()
    g = v[cells]
    n = g.size
    K = Q0.K
    cubes, masks, omegas, medians = [], [], [], []
    majorant = np.zeros(n)
    stack = [(0, n)]
    m0 = None
    while stack:
        o, s = stack.pop()
        u = g[o : o + s]
        srt = np.sort(u)
        omega, _ = _oscillation_sorted(srt, lam)
        med = _lower_median_sorted(srt)
        if m0 is None:
            m0 = med
        omega_mask = np.abs(u - med) > threshold * omega
        selected = _maximal_selected(omega_mask)
        if omega == 0 and not selected:
            continue
        E = np.ones(s, dtype=bool)
        for a, b in selected:
            E[a:b] = False
            stack.append((o + a, b - a))
        gm = np.zeros(Q0.N, dtype=bool)
        gm[cells[o : o + s][E]] = True
        level = K - int(math.log2(s))
        index = (Q0.index << (level - Q0.level)) + o // s
        cubes.append(DyadicInterval(K, level, index, Q0.shift))
        masks.append(gm)
        omegas.append(float(omega))
        medians.append(med)
        majorant[o : o + s] += 2.0 * omega
    order = np.lexsort((np.array([c.index for c in cubes]), np.array([c.level for c in cubes])))
    fam = SparseFamily(
        K,
        Q0.shift,
        tuple(cubes[i] for i in order),
        tuple(masks[i] for i in order),
        lam,
        tuple(omegas[i] for i in order),
        tuple(medians[i] for i in order),
    )
    residual = np.abs(g - m0)
    scale = float(np.abs(g).max(initial=0.0))
    slack = CERT_RTOL * (majorant + scale)
    bad = np.nonzero(residual > majorant + slack)[0]
    failures = tuple((int(cells[i]), _deepest(fam, int(cells[i]))) for i in bad)
    cert = Certificate(residual, majorant, cells, fam.check(), threshold, lam, failures)
    return fam, cert


def _maximal_selected(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal dyadic blocks strictly inside the cube with ``4 |mask ∩ P| >= |P|``."""
    n = mask.size
    out = []
    if n == 1 or not mask.any():
        return out
    counts = [mask.astype(np.int64)]
    while counts[-1].size > 1:
        counts.append(counts[-1].reshape(-1, 2).sum(axis=1))
    covered = np.zeros(2, dtype=bool)
    for lev in range(len(counts) - 2, -1, -1):
        c = counts[lev]
        size = n // c.size
        hit = (4 * c >= size) & ~covered
        for j in np.nonzero(hit)[0]:
            out.append((int(j) * size, (int(j) + 1) * size))
        if lev:
            covered = np.repeat(covered | hit, 2)
    return out


def _deepest(fam: SparseFamily, cell: int) -> str:
    best = None
    for Q in fam.cubes:
        if Q.mask()[cell] and (best is None or Q.level > best.level):
            best = Q
    return str(best) if best is not None else "-"


# -- sparse operators ---------------------------------------------------------------


def _by_level(fam: SparseFamily):
    levels: dict[int, list[int]] = {}
    for i, Q in enumerate(fam.cubes):
        levels.setdefault(Q.level, []).append(i)
    return levels


def _spread(fam: SparseFamily, coeffs) -> np.ndarray:
    out = np.zeros(fam.N, dtype=np.result_type(np.asarray(coeffs), float))
    for Q, c in zip(fam.cubes, coeffs):
        out[Q.cells()] += c
    return out


def _arc_rows(v: np.ndarray, arcs: list[Arc]):
    idx, wts = zip(*(a.cell_weights() for a in arcs))
    return v[np.array(idx)], np.array(wts)


def sparse_operator_phi(f, fam: SparseFamily, phi: YoungFn) -> np.ndarray:
    """``A_{Phi,S} f = sum_Q ||f||_{Phi, bar Q} chi_Q``."""
    a = np.abs(as_values(f)).astype(float)
    coeffs = np.zeros(len(fam))
    for _, ids in sorted(_by_level(fam).items()):
        vals, wts = _arc_rows(a, [fam.cubes[i].double() for i in ids])
        coeffs[ids] = luxemburg_rows(vals, wts, phi)
    return _spread(fam, coeffs)


def _dilate_averages(a: np.ndarray, fam: SparseFamily, factor: float) -> np.ndarray:
    coeffs = np.zeros(len(fam), dtype=a.dtype)
    for i, Q in enumerate(fam.cubes):
        idx, wts = Q.dilate(factor).cell_weights()
        coeffs[i] = np.dot(a[idx], wts) / wts.sum()
    return coeffs


def sparse_operator_avg(f, fam: SparseFamily, m: int) -> np.ndarray:
    """``T_{S,m} f = sum_Q |f|_{2^m Q} chi_Q`` (dilates saturate at the circle)."""
    if m < 0 or int(m) != m:
        raise ValueError("m must be a nonnegative integer")
    a = np.abs(as_values(f)).astype(float)
    return _spread(fam, _dilate_averages(a, fam, 2.0**m))


def averaging_operator(f, fam: SparseFamily) -> np.ndarray:
    """``T f = sum_Q (f)_{bar Q} chi_Q`` (linear)."""
    v = as_values(f)
    return _spread(fam, _dilate_averages(v, fam, 2.0))


def saturation_level(Q: DyadicInterval) -> int:
    """Smallest ``m`` with ``2^m Q`` the whole circle (``|Q| = 2^-level``)."""
    return Q.level


def tail_operator(f, fam: SparseFamily, delta: float = 1.0) -> np.ndarray:
    """``sum_{m >= 1} 2^{-m delta} T_{S,m} f`` with the saturated part summed in closed form."""
    a = np.abs(as_values(f)).astype(float)
    mean = a.mean()
    q = 2.0**-delta
    coeffs = np.zeros(len(fam))
    for i, Q in enumerate(fam.cubes):
        ms = max(1, saturation_level(Q))
        total = 0.0
        for m in range(1, ms):
            idx, wts = Q.dilate(2.0**m).cell_weights()
            total += q**m * np.dot(a[idx], wts) / wts.sum()
        coeffs[i] = total + mean * q**ms / (1 - q)
    return _spread(fam, coeffs)


# -- domination -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DominationReport:
    lhs: np.ndarray
    rhs: np.ndarray
    cells: np.ndarray
    families: tuple
    certificates: tuple
    complex_split: bool

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.lhs > 0, self.lhs / self.rhs, 0.0)

    @property
    def sup_ratio(self) -> float:
        return float(self.ratio.max(initial=0.0))


def domination_check(f, Q0: DyadicInterval, phi: YoungFn, delta: float = 1.0, T=None, lam: float = 1 / 8):
    """Per-cell ratio ``|Tf - m_{Tf}(Q0)| / (A_{Phi,S} f + tail)`` on ``Q0``."""
    from .operators import HILBERT

    T = HILBERT if T is None else T
    Tf = as_values(T(f))
    parts = [Tf.real, Tf.imag] if np.iscomplexobj(Tf) and np.any(Tf.imag) else [np.real(Tf)]
    cells = Q0.cells()
    lhs = np.zeros(cells.size)
    rhs = np.zeros(cells.size)
    fams, certs = [], []
    for part in parts:
        fam, cert = sparse_decompose(part, Q0, lam)
        lhs += cert.residual
        rhs += (sparse_operator_phi(f, fam, phi) + tail_operator(f, fam, delta))[cells]
        fams.append(fam)
        certs.append(cert)
    return DominationReport(lhs, rhs, cells, tuple(fams), tuple(certs), len(parts) > 1)


# -- duality linearizer -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Linearizer:
    """``L h = sum_Q (h g_Q)_{bar Q} chi_Q`` with its transpose."""

    fam: SparseFamily
    witnesses: tuple
    kappas: np.ndarray
    norms: np.ndarray
    pairings: np.ndarray
    real: bool = True

    @property
    def kappa_min(self) -> float:
        return float(self.kappas.min(initial=1.0))

    @property
    def flagged(self) -> bool:
        return self.kappa_min < 0.25

    def apply(self, h) -> np.ndarray:
        v = as_values(h)
        coeffs = []
        for Q, (idx, wts, g) in zip(self.fam.cubes, self.witnesses):
            coeffs.append(np.sum(v[idx] * g * wts) / wts.sum())
        return _spread(self.fam, np.array(coeffs)) if coeffs else np.zeros(self.fam.N)

    def adjoint(self, eta) -> np.ndarray:
        v = as_values(eta)
        out = np.zeros(self.fam.N, dtype=complex)
        for Q, (idx, wts, g) in zip(self.fam.cubes, self.witnesses):
            avg = v[Q.cells()].mean()
            np.add.at(out, idx, wts * np.conj(g) * avg * Q.ncells / wts.sum())
        return out.real if self.real and not np.iscomplexobj(v) else out

    __call__ = apply


def build_linearizer(f, fam: SparseFamily, phi: YoungFn, seed: int = 0) -> Linearizer:
    """Dual witnesses ``g_Q`` on ``bar Q`` for nonnegative ``f``."""
    v = real_values(f)
    if np.any(v < 0):
        raise ValueError("the linearizer is built for nonnegative f")
    wit, kap, nrm, pair = [], [], [], []
    for i, Q in enumerate(fam.cubes):
        arc = Q.double()
        res = duality_gap(v, arc, phi, n_perturb=0, seed=seed + i)
        _, wts = arc.cell_weights()
        g = np.real_if_close(res.witness)
        wit.append((res.cells, wts, g))
        kap.append(res.kappa)
        nrm.append(res.norm)
        pair.append(res.pairing)
    real = all(np.isrealobj(g) for *_, g in wit)
    return Linearizer(fam, tuple(wit), np.array(kap), np.array(nrm), np.array(pair), real)


def random_sparse_family(N: int, seed: int, shift: int = 0, density: float = 0.5) -> SparseFamily:
    """Random sparse family: each cube keeps at least half of itself as ``E(Q)``."""
    rng = np.random.default_rng(seed)
    K = GridSpec.from_n(N).K
    cubes, masks = [], []
    stack = [DyadicInterval(K, 0, 0, shift)]
    while stack:
        Q = stack.pop()
        E = Q.mask().copy()
        if Q.ncells > 1:
            kids = [c for c in Q.children()]
            grand = [g for c in kids for g in (c.children() if c.ncells > 1 else (c,))]
            pick = [g for g in grand if rng.random() < density]
            # keep total selected measure at most half of Q
            budget = Q.ncells // 2
            chosen = []
            for g in pick:
                if g.ncells <= budget:
                    chosen.append(g)
                    budget -= g.ncells
            for g in chosen:
                E &= ~g.mask()
                stack.append(g)
        cubes.append(Q)
        masks.append(E)
    order = np.lexsort((np.array([c.index for c in cubes]), np.array([c.level for c in cubes])))
    return SparseFamily(K, shift, tuple(cubes[i] for i in order), tuple(masks[i] for i in order))
