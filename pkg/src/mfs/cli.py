"""Command-line interface: ``mfs <command> [options]``.

Commands: ``pressure``, ``free-energy``, ``spectrum``, ``exhaust``, ``rho``
and ``lambda-check``. Options may also come from a JSON config file
(``--config``) whose keys are the long option names with dashes replaced by
underscores; flags given on the command line override it.

Exit codes: 0 on success, 1 when some point is indeterminate, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import potential as pot
from . import system as sy
from .exhaust import ConvergenceReport, exhaust_run, lambda_ratio_check, rho_distance
from .free_energy import FreeEnergyCurve, free_energy_curve, slopes
from .legendre import spectrum
from .pressure import DepthPolicy, pressure

COMMANDS = ("pressure", "free-energy", "spectrum", "exhaust", "rho", "lambda-check")
DEFAULT_BETA = "-5:5:0.1"


class UsageError(ValueError):
    pass


# -- parsing -------------------------------------------------------------------
def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma list; must be strictly increasing."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if not step > 0 or b < a:
                raise UsageError(f"bad grid {text!r}")
            k = int(math.floor((b - a) / step + 1e-9))
            vals = [round(a + i * step, 12) for i in range(k + 1)]
        else:
            vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed grid {text!r}") from exc
    if not vals:
        raise UsageError(f"empty grid {text!r}")
    if any(x >= y for x, y in zip(vals, vals[1:])):
        raise UsageError(f"grid {text!r} is not strictly increasing")
    return vals


def _fields(parts: list[str]) -> dict:
    """``["a=1,p=2", "ratios=0.5,0.3"]`` -> ``{"a": ["1"], "p": ["2"], "ratios": [...]}``."""
    out: dict = {}
    for part in parts:
        key = None
        for tok in part.split(","):
            if "=" in tok:
                key, val = tok.split("=", 1)
                key = key.strip()
                if key in out:
                    raise UsageError(f"repeated key {key!r}")
                out[key] = [val] if val else []
            elif key is None:
                raise UsageError(f"expected key=value in {part!r}")
            else:
                out[key].append(tok)
    return out


def _floats(vals, name):
    try:
        return [float(v) for v in vals]
    except ValueError as exc:
        raise UsageError(f"{name} must be numeric") from exc


def parse_system(text: str) -> sy.SystemSpec:
    """Parse descriptors such as ``gauss``, ``powerlaw:a=0.5,p=2:trunc=8``."""
    name, *parts = str(text).split(":")
    f = _fields(parts)
    trunc = f.pop("trunc", None)
    try:
        if name in ("gauss", "pgauss", "lueroth", "glueroth"):
            s = {"gauss": sy.gauss, "pgauss": sy.perturbed_gauss,
                 "lueroth": sy.lueroth, "glueroth": sy.generalized_lueroth}[name]()
            allowed = set()
        elif name == "powerlaw":
            s = sy.power_law(_floats(f["a"], "a")[0], _floats(f["p"], "p")[0])
            allowed = {"a", "p"}
        elif name == "logpower":
            s = sy.log_power(_floats(f["a"], "a")[0])
            allowed = {"a"}
        elif name == "finite":
            offs = f.get("offsets")
            s = sy.finite(_floats(f["ratios"], "ratios"),
                          None if offs is None else _floats(offs, "offsets"))
            allowed = {"ratios", "offsets"}
        else:
            raise UsageError(f"unknown system {name!r}")
    except KeyError as exc:
        raise UsageError(f"system {name!r} needs parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"invalid system {text!r}: {exc}") from None
    extra = set(f) - allowed
    if extra:
        raise UsageError(f"unknown parameters {sorted(extra)} for system {name!r}")
    if trunc is not None:
        try:
            s = sy.truncate(s, int(trunc[0]))
        except (ValueError, IndexError) as exc:
            raise UsageError(f"bad truncation in {text!r}") from exc
    return s


def parse_potential(text: str) -> pot.PotentialSpec:
    name, *parts = str(text).split(":")
    f = _fields(parts)
    if name == "negid" and not f:
        return pot.neg_identity()
    if name == "neg2log" and not f:
        return pot.neg_two_log()
    if name == "geometric" and not f:
        return pot.geometric()
    if name == "const" and set(f) == {"c"}:
        return pot.constant(_floats(f["c"], "c")[0])
    if name == "list" and set(f) == {"values"}:
        return pot.explicit(_floats(f["values"], "values"))
    raise UsageError(f"unknown potential {text!r}")


@dataclass
class RunConfig:
    command: str
    system: str | None = None
    psi: str | None = None
    beta: list = field(default_factory=lambda: parse_grid(DEFAULT_BETA))
    alpha: list | None = None
    t: list | None = None
    n: list | None = None
    tol: float = 1e-3
    policy: DepthPolicy = field(default_factory=DepthPolicy)
    system_a: str | None = None
    system_b: str | None = None
    depth: int = 12
    R: float = 2.0
    cap: int = 4096
    output: str | None = None
    format: str = "csv"
    threads: int = 1


_POLICY_KEYS = ("max_depth", "symbol_cap", "target_width", "max_states", "enum_budget")
_GRID_KEYS = ("beta", "alpha", "t", "n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--tol", type=float, help="free-energy enclosure width (default 1e-3)")
    common.add_argument("--max-depth", type=int)
    common.add_argument("--symbol-cap", type=int)
    common.add_argument("--target-width", type=float, help="pressure enclosure width")
    common.add_argument("--max-states", type=int)
    common.add_argument("--enum-budget", type=int)
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, help="worker cap (fallback: MFS_THREADS)")

    p = argparse.ArgumentParser(prog="mfs", description="Pressure, free energy and multifractal "
                                "spectra of conformal iterated function systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, *opts):
        sp = sub.add_parser(name, parents=[common], help=help_, argument_default=argparse.SUPPRESS)
        for o in opts:
            sp.add_argument(*o[0], **o[1])
        return sp

    system = (("--system",), {"help": "system descriptor, e.g. gauss, powerlaw:a=0.5,p=2:trunc=8"})
    psi = (("--psi",), {"help": "potential: negid, neg2log, const:c=.., geometric"})
    beta = (("--beta",), {"help": f"beta grid (default {DEFAULT_BETA})"})
    alpha = (("--alpha",), {"help": "alpha grid"})
    add("pressure", "pressure enclosures on a (t, beta) grid", system, psi,
        (("--t",), {"help": "t grid"}), beta)
    add("free-energy", "free energy t(beta) on a beta grid", system, psi, beta)
    add("spectrum", "Legendre spectrum f(alpha)", system, psi, beta, alpha)
    add("exhaust", "truncation (exhaustion) report", system, psi, beta, alpha,
        (("--n",), {"help": "increasing list of truncation sizes"}))
    add("rho", "distance between two systems", (("--system-a",), {}), (("--system-b",), {}),
        (("--depth",), {"type": int}))
    add("lambda-check", "single-symbol derivative ratio check", (("--system-a",), {"help": "the approximating system"}),
        (("--system-b",), {"help": "the limit system"}), (("--R",), {"type": float}), (("--cap",), {"type": int}))
    return p


_GRID_FLAGS = ("--beta", "--alpha", "--t", "--n")


def _glue_negative_grids(argv: list) -> list:
    """``--beta -1,0,1`` -> ``--beta=-1,0,1``; argparse would read ``-1,0,1`` as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _GRID_FLAGS and nxt and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _config_keys(command: str) -> set:
    base = {"tol", "output", "format", "threads", *_POLICY_KEYS}
    extra = {
        "pressure": {"system", "psi", "t", "beta"},
        "free-energy": {"system", "psi", "beta"},
        "spectrum": {"system", "psi", "beta", "alpha"},
        "exhaust": {"system", "psi", "beta", "alpha", "n"},
        "rho": {"system_a", "system_b", "depth"},
        "lambda-check": {"system_a", "system_b", "R", "cap"},
    }[command]
    return base | extra


def parse_config(argv=None, env=None) -> RunConfig:
    """Merge defaults, an optional JSON config file and command-line flags."""
    env = os.environ if env is None else env
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = vars(build_parser().parse_args(_glue_negative_grids(argv)))
    command = ns.pop("command")
    values: dict = {}
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        if "command" in data:
            if data.pop("command") != command:
                raise UsageError("config command differs from the command line")
        unknown = set(data) - _config_keys(command)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    values.update(ns)

    cfg = RunConfig(command)
    pol = {}
    for key, val in values.items():
        if key in _POLICY_KEYS:
            pol[key] = val
        elif key in _GRID_KEYS:
            if isinstance(val, list):
                val = ",".join(repr(float(v)) for v in val)
            grid = parse_grid(val)
            if key == "n":
                if any(v != int(v) or v < 2 for v in grid):
                    raise UsageError("--n must list integers >= 2")
                grid = [int(v) for v in grid]
            setattr(cfg, key, grid)
        else:
            setattr(cfg, key, val)
    if not cfg.tol > 0:
        raise UsageError("--tol must be positive")
    pol.setdefault("target_width", cfg.tol)
    try:
        cfg.policy = DepthPolicy(**pol)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid depth policy: {exc}") from exc
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if "threads" not in values:
        try:
            cfg.threads = int(env.get("MFS_THREADS", 1))
        except ValueError as exc:
            raise UsageError("MFS_THREADS must be an integer") from exc
    if cfg.threads < 1:
        raise UsageError("--threads must be positive")
    needs = {"pressure": ("system", "psi", "t"), "free-energy": ("system", "psi"),
             "spectrum": ("system", "psi", "alpha"), "exhaust": ("system", "psi", "n", "alpha"),
             "rho": ("system_a", "system_b"), "lambda-check": ("system_a", "system_b")}[command]
    for key in needs:
        if getattr(cfg, key) is None:
            raise UsageError(f"--{key.replace('_', '-')} is required for {command}")
    # validate descriptors early so bad names are usage errors
    for key in ("system", "system_a", "system_b"):
        if getattr(cfg, key) is not None:
            parse_system(getattr(cfg, key))
    if cfg.psi is not None:
        parse_potential(cfg.psi)
    return cfg


# -- running -------------------------------------------------------------------
@dataclass
class Table:
    columns: list
    rows: list
    report: dict
    indeterminate: bool = False


def _num(x):
    """Python float (or int/bool/str) for JSON."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _curve_points(curve: FreeEnergyCurve) -> list:
    return [{"beta": p.beta, "t_lo": p.lo, "t_hi": p.hi, "infinite": p.infinite,
             "zero_exists": p.zero_exists, "warnings": list(p.warnings)} for p in curve.points]


def _undetermined(curve: FreeEnergyCurve) -> bool:
    return any(not p.infinite and not p.is_finite for p in curve.points)


def _slope_dict(curve: FreeEnergyCurve) -> dict | None:
    if len(curve.finite) < 2:
        return None
    sr = slopes(curve)
    return {k: _num(getattr(sr, k)) for k in (
        "alpha_minus", "alpha_plus", "alpha_minus_err", "alpha_plus_err",
        "alpha_minus_extrapolated", "alpha_plus_extrapolated", "flat_from", "alpha_kink")}


def _run_pressure(cfg: RunConfig) -> Table:
    s, psi = parse_system(cfg.system), parse_potential(cfg.psi)
    rows, pts, bad = [], [], False
    for b in cfg.beta:
        for t in cfg.t:
            pv = pressure(pot.WeightedPotential(t, b, s, psi), cfg.policy)
            bad |= pv.kind == "indeterminate"
            rows.append([t, b, pv.kind, pv.lo, pv.hi, pv.converged])
            pts.append({"t": t, "beta": b, "kind": pv.kind, "p_lo": pv.lo, "p_hi": pv.hi,
                        "converged": pv.converged, "note": pv.note})
    return Table(["t", "beta", "kind", "p_lo", "p_hi", "converged"], rows, {"points": pts}, bad)


def _run_free_energy(cfg: RunConfig) -> Table:
    s, psi = parse_system(cfg.system), parse_potential(cfg.psi)
    curve = free_energy_curve(s, psi, cfg.beta, cfg.tol, cfg.policy, cfg.threads, min_points=1)
    rows = [[p.beta, p.lo, p.hi, p.infinite, p.zero_exists] for p in curve.points]
    rep = {"points": _curve_points(curve), "dom_lo": curve.dom_lo, "dom_hi": curve.dom_hi,
           "convexity_defect": curve.convexity_defect, "slopes": _slope_dict(curve),
           "warnings": list(curve.warnings)}
    return Table(["beta", "t_lo", "t_hi", "infinite", "zero_exists"], rows, rep, _undetermined(curve))


def _run_spectrum(cfg: RunConfig) -> Table:
    s, psi = parse_system(cfg.system), parse_potential(cfg.psi)
    curve = free_energy_curve(s, psi, cfg.beta, cfg.tol, cfg.policy, cfg.threads)
    sp = spectrum(curve, cfg.alpha)
    rows = [[p.alpha, p.value, p.region, p.clamped] for p in sp.points]
    rep = {"spectrum": [{"alpha": p.alpha, "f": p.value, "raw": p.raw, "region": p.region,
                         "clamped": p.clamped, "sentinel": p.sentinel, "anomaly": p.anomaly}
                        for p in sp.points],
           "alpha_minus": sp.alpha_minus, "alpha_plus": sp.alpha_plus,
           "anomalies": list(sp.anomalies), "free_energy": _curve_points(curve),
           "slopes": _slope_dict(curve), "warnings": list(curve.warnings)}
    return Table(["alpha", "f", "region", "clamped"], rows, rep, _undetermined(curve))


def report_dict(rep: ConvergenceReport) -> dict:
    recs = []
    for r in rep.records:
        recs.append({
            "n": r.n, "t_lo": r.t_lo, "t_hi": r.t_hi,
            "infinite": [p.infinite for p in r.curve.points],
            "f": r.f, "f_regions": r.f_regions,
            "alpha_minus": r.alpha_minus, "alpha_plus": r.alpha_plus,
            "f_at_alpha_plus": r.f_at_alpha_plus, "interior_max": r.interior_max,
            "rho_to_full": [r.rho_to_full.lo, r.rho_to_full.hi],
            "boundary_collapse": r.boundary_collapse, "kink": r.kink,
            "max_slope_jump": r.max_slope_jump})
    return {
        "system": rep.system, "potential": rep.potential, "betas": rep.betas, "alphas": rep.alphas,
        "records": recs, "t_increments": rep.t_increments, "f_increments": rep.f_increments,
        "flags_heuristic": {"boundary_collapse": rep.boundary_collapse,
                            "escaping_boundary": rep.escaping_boundary, "kink": rep.kink},
        "certificate": rep.certificate.to_dict(), "tol": rep.tol, "warnings": rep.warnings}


def _run_exhaust(cfg: RunConfig) -> Table:
    s, psi = parse_system(cfg.system), parse_potential(cfg.psi)
    rep = exhaust_run(s, psi, cfg.n, cfg.beta, cfg.alpha, cfg.tol, cfg.policy, cfg.threads)
    cols = ["n", "alpha_minus", "alpha_plus", "f_at_alpha_plus", "interior_max", "rho_lo",
            "rho_hi", "boundary_collapse", "kink"] + [f"f@{a!r}" for a in cfg.alpha]
    rows = [[r.n, r.alpha_minus, r.alpha_plus, r.f_at_alpha_plus, r.interior_max,
             r.rho_to_full.lo, r.rho_to_full.hi, r.boundary_collapse, r.kink] + list(r.f)
            for r in rep.records]
    bad = any(_undetermined(r.curve) for r in rep.records)
    return Table(cols, rows, report_dict(rep), bad)


def _run_rho(cfg: RunConfig) -> Table:
    enc = rho_distance(parse_system(cfg.system_a), parse_system(cfg.system_b), cfg.depth)
    return Table(["depth", "rho_lo", "rho_hi"], [[cfg.depth, enc.lo, enc.hi]],
                 {"rho": [enc.lo, enc.hi]})


def _run_lambda(cfg: RunConfig) -> Table:
    chk = lambda_ratio_check(parse_system(cfg.system_a), parse_system(cfg.system_b), cfg.R, cfg.cap)
    row = [chk.passed, chk.worst_ratio, chk.worst_symbol if chk.worst_symbol is not None else "tail",
           chk.checked]
    return Table(["passed", "worst_ratio", "worst_symbol", "checked"], [row],
                 {"check": {"passed": chk.passed, "worst_ratio": chk.worst_ratio,
                            "worst_symbol": chk.worst_symbol, "checked": chk.checked,
                            "tail_ratio": None if chk.tail_ratio is None else list(chk.tail_ratio)}})


_RUNNERS = {"pressure": _run_pressure, "free-energy": _run_free_energy, "spectrum": _run_spectrum,
            "exhaust": _run_exhaust, "rho": _run_rho, "lambda-check": _run_lambda}


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def render(cfg: RunConfig, table: Table) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()
    cfgd = asdict(cfg)
    cfgd.pop("output")
    cfgd.pop("threads")
    doc = {"command": cfg.command, "config": cfgd, "policy": asdict(cfg.policy), **table.report}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return _num(x)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"mfs: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    try:
        table = _RUNNERS[cfg.command](cfg)
    except ValueError as exc:
        print(f"mfs: error: {exc}", file=sys.stderr)
        return 2
    text = render(cfg, table)
    if cfg.output:
        try:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"mfs: error: cannot write {cfg.output!r}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 1 if table.indeterminate else 0


if __name__ == "__main__":
    sys.exit(main())
