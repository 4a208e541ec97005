"""``carlab``: weighted-norm experiments from the command line.

Every subcommand needs ``--seed`` (directly or through ``--config``).  The
output directory is ``--out``, else ``$CARLAB_OUTPUT_DIR``, else the config
file's ``out``, else the current directory.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import harness
from ._parse import SpecError
from .grid import DyadicInterval, GridSpec, StepSignal, read_signal_csv, write_signal_csv
from .operators import parse_operator
from .sparse import domination_check, sparse_decompose
from .weights import (
    PowerWeight,
    RandomA1,
    TwoValue,
    a1_constant,
    ainfty_constant,
    ap_constant,
    conjugate_exponent,
    dual_weight,
    parse_weight,
    rw_exponent,
)
from .young import bp_constant, parse_young

ENV_OUT = "CARLAB_OUTPUT_DIR"
FAMILIES = {
    "power": lambda a: PowerWeight(a),
    "twovalue": lambda b: TwoValue(1.0, b),
    "randa1": lambda t: RandomA1(0, t),
}

DEFAULTS = {
    "N": 256,
    "jobs": 1,
    "svg": False,
    "weight": ["power:-0.5"],
    "p": [2.0],
    "phi": "antonov",
    "scope": "all",
    "op": "hilbert",
    "lam": 0.125,
    "delta": 1.0,
    "signal": "random",
    "family": "power",
    "params": [],
    "strategy": "",
    "constant": "ap",
    "suite": [],
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    N: int
    seed: int
    out: Path
    jobs: int = 1
    svg: bool = False
    weight: list = field(default_factory=list)
    p: list = field(default_factory=list)
    phi: str = "antonov"
    scope: str = "all"
    op: str = "hilbert"
    lam: float = 0.125
    delta: float = 1.0
    signal: str = "random"
    input: str | None = None
    family: str = "power"
    params: list = field(default_factory=list)
    strategy: str = ""
    constant: str = "ap"
    suite: list = field(default_factory=list)

    def __post_init__(self):
        GridSpec.from_n(self.N)
        if self.scope not in ("all", "dyadic"):
            raise UsageError(f"scope must be 'all' or 'dyadic', not {self.scope!r}")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        # fail early on malformed specs
        for w in self.weight:
            parse_weight(w)
        parse_young(self.phi)


# -- configuration ---------------------------------------------------------------------


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {text!r}")


CONVERT = {
    "N": int,
    "seed": int,
    "jobs": int,
    "svg": _bool,
    "lam": float,
    "delta": float,
    "p": _floats,
    "params": _floats,
    "weight": lambda t: t if isinstance(t, list) else [s.strip() for s in str(t).split(";") if s.strip()],
    "suite": lambda t: t if isinstance(t, list) else str(t).split(),
}


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in RunConfig.__dataclass_fields__:
            raise UsageError(f"{path}:{lineno}: unknown key {k!r}")
        out[k] = v
    return out


def build_config(ns: argparse.Namespace) -> RunConfig:
    file_vals = read_config(ns.config) if getattr(ns, "config", None) else {}
    merged = {}
    for k in RunConfig.__dataclass_fields__:
        flag = getattr(ns, k, None)
        if flag is not None and flag != []:
            merged[k] = flag
        elif k in file_vals:
            merged[k] = file_vals[k]
        elif k in DEFAULTS:
            merged[k] = DEFAULTS[k]
    if getattr(ns, "out", None):
        merged["out"] = ns.out
    elif os.environ.get(ENV_OUT):
        merged["out"] = os.environ[ENV_OUT]
    else:
        merged.setdefault("out", ".")
    if "seed" not in merged:
        raise UsageError("a seed is required (--seed or 'seed = ...' in the config file)")
    try:
        for k, conv in CONVERT.items():
            if k in merged:
                merged[k] = conv(merged[k])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    merged["out"] = Path(merged["out"])
    return RunConfig(**merged)


# -- helpers ---------------------------------------------------------------------------


def _writer(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _num(v):
    return repr(float(v))


def _load_signal(cfg: RunConfig) -> StepSignal:
    if cfg.input:
        f = read_signal_csv(cfg.input)
        if f.N != cfg.N:
            cfg.N = f.N
        return f
    rng = np.random.default_rng(cfg.seed)
    if cfg.signal == "random":
        return StepSignal(rng.standard_normal(cfg.N))
    if cfg.signal == "randpos":
        return StepSignal(rng.lognormal(0.0, 1.0, cfg.N))
    for it in harness.base_corpus(cfg.seed):
        if it.tag == cfg.signal:
            return it.sample(cfg.N)
    raise UsageError(f"unknown signal {cfg.signal!r}; use random, randpos, a corpus tag or --input")


def _pool_map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(*a) for a in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_star, [(fn, a) for a in items]))


def _star(arg):
    fn, a = arg
    return fn(*a)


# -- commands --------------------------------------------------------------------------

CONSTANT_FIELDS = [
    "weight", "N", "p", "scope", "a1", "ap", "ainf", "sigma_ainf", "r_w",
    "sigma_apprime", "duality_residual", "phi", "c_phi", "c_phi_convergent",
]


def cmd_constants(cfg: RunConfig) -> int:
    phi = parse_young(cfg.phi)
    path = cfg.out / "constants.csv"
    fh, wr = _writer(path)
    with fh:
        wr.writerow(CONSTANT_FIELDS)
        for spec in cfg.weight:
            w = parse_weight(spec).instantiate(cfg.N)
            a1 = a1_constant(w, cfg.scope).value
            ainf = ainfty_constant(w, cfg.scope).value
            for p in cfg.p:
                ap = ap_constant(w, p, cfg.scope).value
                sigma = dual_weight(w, p)
                q = conjugate_exponent(p)
                sq = ap_constant(sigma, q, cfg.scope).value
                c = bp_constant(phi, p)
                wr.writerow([
                    spec, cfg.N, _num(p), cfg.scope, _num(a1), _num(ap), _num(ainf),
                    _num(ainfty_constant(sigma, cfg.scope).value), _num(rw_exponent(w, a1)),
                    _num(sq), _num(abs(sq / ap ** (q - 1) - 1)), phi.spec, _num(c.value), int(c.convergent),
                ])
    print(path)
    return 0


def _top_cube(N):
    return DyadicInterval(GridSpec.from_n(N).K, 0, 0)


def cmd_decompose(cfg: RunConfig) -> int:
    f = _load_signal(cfg)
    fam, cert = sparse_decompose(f.real(), _top_cube(f.N), cfg.lam)
    fam.write_csv(cfg.out / "family.csv")
    cert.write_csv(cfg.out / "certificate.csv")
    write_signal_csv(cfg.out / "signal.csv", f)
    if cfg.svg:
        from .plotting import profile_figure

        profile_figure(cfg.out / "certificate.svg", {"|f - m|": cert.residual, "majorant": cert.majorant},
                       title=f"{len(fam)} cubes, {cert.status}")
    print(cert.summary())
    return 0 if cert.passed else 1


def cmd_dominate(cfg: RunConfig) -> int:
    f = _load_signal(cfg)
    T = parse_operator(cfg.op)
    phi = parse_young(cfg.phi)
    rep = domination_check(f.values, _top_cube(f.N), phi, cfg.delta, T, cfg.lam)
    path = cfg.out / "domination.csv"
    fh, wr = _writer(path)
    with fh:
        wr.writerow(["cell", "lhs", "rhs", "ratio"])
        for c, l, r, q in zip(rep.cells, rep.lhs, rep.rhs, rep.ratio):
            wr.writerow([int(c), _num(l), _num(r), _num(q)])
        fh.write(f"# summary,op={T.spec},phi={phi.spec},delta={cfg.delta!r},sup_ratio={rep.sup_ratio!r},"
                 f"complex_split={int(rep.complex_split)}\n")
    if cfg.svg:
        from .plotting import profile_figure

        profile_figure(cfg.out / "domination.svg", {"|Tf - m|": rep.lhs, "A f + tail": rep.rhs},
                       title=f"{T.spec}: sup ratio {rep.sup_ratio:.3g}")
    ok = all(c.passed for c in rep.certificates)
    print(f"sup_ratio={rep.sup_ratio!r}")
    return 0 if ok else 1


def _run_suite(name, N, seed):
    return harness.suite(name, N=N, seed=seed)


def cmd_suite(cfg: RunConfig) -> int:
    names = cfg.suite or list(harness.SUITES)
    if names == ["all"]:
        names = list(harness.SUITES)
    for n in names:
        if n not in harness.SUITES:
            raise UsageError(f"unknown suite {n!r}; choose from {', '.join(harness.SUITES)}")
    reports = _pool_map(_run_suite, [(n, cfg.N, cfg.seed) for n in names], cfg.jobs)
    path = cfg.out / "report.csv"
    harness.write_report_csv(path, reports)
    if cfg.svg:
        from .plotting import fit_figure

        for rep in reports:
            for label, fit in rep.fits:
                fit_figure(fit, cfg.out / f"fit_{label}.svg", title=label)
    failed = [r.name for r in reports if r.exact_failed]
    print(path)
    if failed:
        print("exact checks failed in: " + ", ".join(failed), file=sys.stderr)
    return 1 if failed else 0


def _sweep_one(family, param, N, p, op_spec, seed, strategy, with_ainf):
    T = parse_operator(op_spec)
    return harness.sweep_point(FAMILIES[family](param), param, N, p, T, seed, with_ainf, strategy or None)


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.family not in FAMILIES:
        raise UsageError(f"unknown family {cfg.family!r}; choose from {', '.join(FAMILIES)}")
    params = cfg.params or list(harness.AP_ALPHAS)
    parse_operator(cfg.op)
    items = [(cfg.family, a, cfg.N, p, cfg.op, cfg.seed, cfg.strategy, True) for p in cfg.p for a in params]
    recs = _pool_map(_sweep_one, items, cfg.jobs)
    path = cfg.out / "sweep.csv"
    harness.write_sweep_csv(path, recs)
    print(path)
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    if not cfg.input:
        raise UsageError("fit needs --input <sweep.csv>")
    recs = harness.read_sweep_csv(cfg.input)
    if cfg.constant not in ("a1", "ap", "ainf", "sigma_ainf"):
        raise UsageError(f"unknown constant {cfg.constant!r}")
    fit = harness.fit_sweep(recs, cfg.constant)
    path = cfg.out / "fit.csv"
    harness.write_fit_csv(path, fit, cfg.constant)
    if cfg.svg:
        from .plotting import fit_figure

        fit_figure(fit, cfg.out / "fit.svg", title=f"{recs[0].operator}, p={recs[0].p:g}",
                   xlabel=cfg.constant)
    print(f"slope={fit.slope!r} residual={fit.residual!r}")
    return 0


def cmd_demo(cfg: RunConfig) -> int:
    """A small tour: constants, one decomposition, one domination check and a Hilbert sweep with its fit."""
    base = cfg.out
    codes = []
    for sub, fn, extra in (
        ("constants", cmd_constants, {"weight": ["power:-0.5", "power:0.8", "twovalue:1,4"], "p": [1.5, 2.0, 3.0]}),
        ("decompose", cmd_decompose, {"signal": "random"}),
        ("dominate", cmd_dominate, {"signal": "bump:0.3:0.2", "op": "carleson"}),
        ("sweep", cmd_sweep, {"op": "hilbert", "params": list(harness.AP_ALPHAS[::2]) + [0.95], "p": [2.0]}),
    ):
        d = base / sub
        d.mkdir(parents=True, exist_ok=True)
        sub_cfg = RunConfig(**{**cfg.__dict__, **extra, "out": d, "svg": True})
        codes.append(fn(sub_cfg))
    fit_cfg = RunConfig(**{**cfg.__dict__, "out": base / "sweep", "input": str(base / "sweep" / "sweep.csv"),
                           "constant": "ap", "svg": True})
    codes.append(cmd_fit(fit_cfg))
    return max(codes)


COMMANDS = {
    "constants": cmd_constants,
    "decompose": cmd_decompose,
    "dominate": cmd_dominate,
    "suite": cmd_suite,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "demo": cmd_demo,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags take precedence")
    common.add_argument("--seed", type=int, help="RNG seed (required)")
    common.add_argument("--N", type=int, help="number of cells (power of two)")
    common.add_argument("--out", help=f"output directory (else ${ENV_OUT}, else config, else .)")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--svg", action="store_const", const=True, help="also write SVG figures")
    common.add_argument("--phi", help="Young function spec, e.g. antonov, llogl:1, pow:2")
    helps = {
        "constants": "tabulate weight constants and C_Phi(p)",
        "decompose": "sparse decomposition with its certificate",
        "dominate": "per-cell sparse domination ratio of T f",
        "suite": "run inequality suites",
        "sweep": "operator-norm lower bounds over a weight family",
        "fit": "exponent fit of a sweep CSV",
        "demo": "small end-to-end run",
    }
    parsers = {name: sub.add_parser(name, parents=[common], help=h) for name, h in helps.items()}
    for name in ("constants", "sweep"):
        parsers[name].add_argument("--p", type=float, action="append", help="exponent (repeatable)")
    parsers["constants"].add_argument("--weight", action="append", help="weight spec (repeatable)")
    parsers["constants"].add_argument("--scope", choices=("all", "dyadic"))
    for name in ("decompose", "dominate"):
        parsers[name].add_argument("--input", help="signal CSV (index,re,im)")
        parsers[name].add_argument("--signal", help="random | randpos | corpus tag")
        parsers[name].add_argument("--lam", type=float, help="oscillation parameter")
    parsers["dominate"].add_argument("--op", help="hilbert | carleson | lincar:<file> | ...")
    parsers["dominate"].add_argument("--delta", type=float)
    parsers["suite"].add_argument("suite", nargs="*", help=f"suite names ({', '.join(harness.SUITES)}) or all")
    parsers["sweep"].add_argument("--op")
    parsers["sweep"].add_argument("--family", help=", ".join(FAMILIES))
    parsers["sweep"].add_argument("--params", help="comma-separated family parameters")
    parsers["sweep"].add_argument("--strategy", choices=("corpus-max", "ratio-ascent", "linearized-ascent"))
    parsers["fit"].add_argument("--input", help="sweep CSV")
    parsers["fit"].add_argument("--constant", help="a1 | ap | ainf | sigma_ainf")
    parsers["demo"].add_argument("--op")
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = build_config(ns)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[ns.command](cfg)
    except SpecError as exc:
        print(f"carlab: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"carlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
