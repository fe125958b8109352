"""Command-line interface: ``contactskyrme <subcommand> [options]``.

Every subcommand writes one JSON report (stdout, or ``--out``) with a
``"schema": 1`` field and floats printed to 17 significant digits.  Profile
data goes to CSV side files.  Exit codes: 0 success, 1 a failed check or
selftest invariant, 2 a usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import kernels
from .analysis import (BOUND_UNIT, bound_report, check_properties, convergence_study,
                       pointwise_coupling, resolve_coupling, suspension_coupling,
                       suspension_profile_table)
from .curlspec import spectrum
from .errors import ClusterAmbiguityError, ContactSkyrmeError, ConfigurationError, InputError
from .flow import FlowOptions, Profile, minimize
from .maps import ArctanProfile, make_map
from .s3geom import build_grid
from .selftest import run_selftest

SCHEMA_VERSION = 1
DEFAULT_RESOLUTION = (32, 24, 24)
DEFAULT_LEVELS = ((8, 6, 6), (16, 12, 12), (32, 24, 24))
SUSPENSION_FAMILIES = ("suspension", "profile_suspension")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 2 with the usage line, as argparse does
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# JSON output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(ch in "-0123456789" for ch in text):
        text += ".0"  # keep integral floats typed as floats
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits; NaN and inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_csv(path: Path, columns: Dict[str, Sequence[float]]) -> None:
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Everything that determines a run; serialised into each report."""

    subcommand: str
    resolution: List[int] = field(default_factory=lambda: list(DEFAULT_RESOLUTION))
    map: str = "identity"
    map_params: Dict[str, Any] = field(default_factory=dict)
    coupling: Any = 2.0
    tolerances: Dict[str, float] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = 0
    threads: Optional[int] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _parse_coupling(text):
    if isinstance(text, (int, float)):
        return float(text)
    if text in ("pointwise", "suspension"):
        return text
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--coupling must be a number, 'pointwise' or 'suspension', got {text!r}")


def _map_params(args) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    if args.map == "suspension":
        params["a"] = args.a
    elif args.map == "fourier_test":
        params["seed"] = args.seed
        params["amplitude"] = args.amplitude
    elif args.map == "right_translate":
        if args.u is None:
            raise UsageError("--map right_translate needs --u W I J K")
        params["u"] = list(args.u)
    elif args.map == "profile_suspension":
        if args.profile_csv is None:
            raise UsageError("--map profile_suspension needs --profile-csv PATH")
        params["csv"] = args.profile_csv
    return params


def _coupling_object(cfg: RunConfig, phi):
    if cfg.coupling == "suspension":
        if cfg.map != "suspension":
            raise UsageError("--coupling suspension is only defined for --map suspension")
        return suspension_coupling(cfg.map_params["a"])
    return resolve_coupling(cfg.coupling, phi)


def _side_path(cfg: RunConfig, suffix: str) -> Optional[Path]:
    if cfg.out is None:
        return None
    out = Path(cfg.out)
    return out.with_name(f"{out.stem}_{suffix}.csv")


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, exit code)


def _cmd_spectrum(cfg: RunConfig):
    o = cfg.options
    try:
        rep = spectrum(o["max_degree"], tol=o["tol"], cluster_tol=o["cluster_tol"])
    except ClusterAmbiguityError as exc:
        return {"error": str(exc), "raw_eigenvalues": exc.raw_eigenvalues}, 1
    out = rep.as_dict()
    total = sum(m for _, m in rep.clusters)
    out["total_multiplicity"] = total
    out["integer_check"] = rep.max_integer_deviation <= rep.integer_tol
    ok = out["integer_check"] and total == rep.rank_G
    return out, 0 if ok else 1


# relative spread below which a measured coupling is treated as constant
CONSTANT_COUPLING_RTOL = 1e-6


def _cmd_check(cfg: RunConfig):
    phi = make_map(cfg.map, **cfg.map_params)
    grid = build_grid(*cfg.resolution)
    pc = pointwise_coupling(phi, grid.points)
    vals = pc.c_pt[~pc.critical]
    c_info = {"min": float(np.min(vals)) if vals.size else None,
              "max": float(np.max(vals)) if vals.size else None,
              "critical_nodes": int(np.sum(pc.critical)),
              "constant": False}
    c = _coupling_object(cfg, phi)
    if cfg.coupling == "pointwise" and vals.size == pc.c_pt.size and vals.size:
        mean = float(np.mean(vals))
        if mean > 0 and float(np.max(np.abs(vals - mean))) <= CONSTANT_COUPLING_RTOL * mean:
            # a measured coupling that is constant is checked as a constant coupling
            c_info["constant"] = True
            c = resolve_coupling(mean)
    rep = check_properties(phi, c, grid, cfg.tolerances or None)
    out = rep.as_dict()
    out["c_pt"] = c_info
    if cfg.map in SUSPENSION_FAMILIES:
        path = _side_path(cfg, "profile")
        if path is not None:
            write_csv(path, suspension_profile_table(phi, grid))
            out["profile_csv"] = str(path)
    return out, 0 if rep.passed else 1


def _cmd_energy(cfg: RunConfig):
    phi = make_map(cfg.map, **cfg.map_params)
    grid = build_grid(*cfg.resolution)
    c = _coupling_object(cfg, phi)
    rep = bound_report(phi, c, grid)
    return rep.as_dict(), 0


def _cmd_flow(cfg: RunConfig):
    o = cfg.options
    B = o["B"]
    if B < 1:
        raise UsageError("--B must be at least 1")
    init = o["init"]
    if init == "perturbed":
        amp = o["perturbation"]
        fn = lambda s: B * s + amp * np.sin(2 * s)  # noqa: E731
    elif init == "linear":
        fn = lambda s: B * s  # noqa: E731
    elif init == "suspension":
        if B != 1:
            raise UsageError("--init suspension is a degree-one profile; use --B 1")
        fn = ArctanProfile(cfg.map_params.get("a", 3.0))
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown --init {init!r}")
    prof0 = Profile.from_function(fn, B, o["n_nodes"])
    opts = FlowOptions(step=o["step"], max_iter=o["max_iter"], grad_tol=o["grad_tol"],
                       sobolev_length=o["sobolev_length"], workers=cfg.threads or 1)
    if not isinstance(cfg.coupling, float):
        raise UsageError("flow needs a constant --c")
    res = minimize(prof0, cfg.coupling, opts)
    out = res.as_dict()
    out["E_over_bound"] = res.E / (BOUND_UNIT * B)
    out["sup_distance_to_linear"] = res.profile.sup_distance(lambda s: B * s)
    p_path, t_path = _side_path(cfg, "profile"), _side_path(cfg, "trace")
    if p_path is not None:
        s, a = res.profile.full_table()
        write_csv(p_path, {"s": s, "alpha": a})
        write_csv(t_path, {"iteration": list(range(len(res.energy_trace))), "E": res.energy_trace})
        out["profile_csv"], out["trace_csv"] = str(p_path), str(t_path)
    return out, 0


def _cmd_convergence(cfg: RunConfig):
    phi = make_map(cfg.map, **cfg.map_params)
    c = _coupling_object(cfg, phi)
    levels = cfg.options["levels"]
    ref = None
    if cfg.map == "identity" and isinstance(cfg.coupling, float):
        cval = cfg.coupling
        ref = math.pi**2 * (cval + 4.0 / cval)  # |beta|^2 = 1, |d beta|^2 = 4
    return convergence_study(phi, c, levels, ref), 0


def _cmd_selftest(cfg: RunConfig):
    results = run_selftest(cfg.seed)
    failed = [r.name for r in results if not r.passed]
    out = {"invariants": [r.as_dict() for r in results], "failed": failed, "passed": not failed}
    for name in failed:
        print(f"selftest: invariant {name} FAILED", file=sys.stderr)
    return out, 1 if failed else 0


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "check": _cmd_check,
    "energy": _cmd_energy,
    "flow": _cmd_flow,
    "convergence": _cmd_convergence,
    "selftest": _cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--config", help="JSON file of option defaults (flag names with underscores)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS and worker threads")


def _map_flags(p: argparse.ArgumentParser, default_map: str = "identity") -> None:
    p.add_argument("--map", default=default_map,
                   choices=["identity", "conjugation", "constant", "suspension", "right_translate",
                            "profile_suspension", "fourier_test"])
    p.add_argument("--a", type=float, default=1.0, help="suspension parameter")
    p.add_argument("--u", type=float, nargs=4, default=None, help="unit quaternion for right_translate")
    p.add_argument("--amplitude", type=float, default=0.2, help="fourier_test perturbation size")
    p.add_argument("--profile-csv", default=None, help="(s, alpha) table for profile_suspension")
    p.add_argument("--resolution", type=int, nargs=3, default=list(DEFAULT_RESOLUTION),
                   metavar=("N_S", "N_THETA", "N_PSI"))


def _coupling_flags(p: argparse.ArgumentParser, default="2") -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--c", type=float, default=None, help="constant coupling")
    g.add_argument("--coupling", default=None,
                   help="number, 'pointwise' (measured from the map) or 'suspension' (closed form)")
    p.set_defaults(_coupling_default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contactskyrme",
                     description="Contact-geometric BPS Skyrme model on the 3-sphere.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="curl spectrum on polynomial vector fields")
    _common(p)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-9, help="integrality tolerance")
    p.add_argument("--cluster-tol", type=float, default=1e-6)

    p = sub.add_parser("check", help="Beltrami-map property checks")
    _common(p)
    _map_flags(p)
    _coupling_flags(p, "pointwise")
    p.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                   help="override one check tolerance")

    p = sub.add_parser("energy", help="energy, degree and the Bogomol'nyi bound")
    _common(p)
    _map_flags(p)
    _coupling_flags(p)

    p = sub.add_parser("flow", help="gradient flow within the suspension ansatz")
    _common(p)
    p.add_argument("--B", type=int, default=1, help="target degree")
    _coupling_flags(p)
    p.add_argument("--init", choices=["perturbed", "linear", "suspension"], default="perturbed")
    p.add_argument("--perturbation", type=float, default=0.3, help="amplitude of the sin 2s term")
    p.add_argument("--a", type=float, default=3.0, help="parameter of --init suspension")
    p.add_argument("--n-nodes", type=int, default=64)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=60)
    p.add_argument("--grad-tol", type=float, default=1e-7)
    p.add_argument("--sobolev-length", type=float, default=0.5)

    p = sub.add_parser("convergence", help="energy and degree at three resolutions")
    _common(p)
    _map_flags(p)
    _coupling_flags(p)
    p.add_argument("--levels", type=int, nargs="+", default=None,
                   help="n_s values; theta and psi scale as 3/4 n_s")

    p = sub.add_parser("selftest", help="exact symbolic invariants")
    _common(p)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    """Parse twice: config-file values replace defaults, explicit flags win."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read --config: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    known = set(vars(args))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    subparser = parser._subparsers._group_actions[0].choices[args.subcommand]
    subparser.set_defaults(**cfg)
    return parser.parse_args(argv)


def _run_config(args: argparse.Namespace) -> RunConfig:
    cmd = args.subcommand
    cfg = RunConfig(subcommand=cmd, out=args.out, seed=args.seed, threads=args.threads)
    if hasattr(args, "map"):
        cfg.map = args.map
        cfg.map_params = _map_params(args)
        cfg.resolution = list(args.resolution)
    if hasattr(args, "_coupling_default"):
        if args.c is not None:
            cfg.coupling = float(args.c)
        else:
            cfg.coupling = _parse_coupling(args.coupling if args.coupling is not None
                                           else args._coupling_default)
    if cmd == "spectrum":
        cfg.options = {"max_degree": args.max_degree, "tol": args.tol, "cluster_tol": args.cluster_tol}
    elif cmd == "check":
        tol = {}
        for item in args.tolerance:
            name, _, value = item.partition("=")
            try:
                tol[name] = float(value)
            except ValueError:
                raise UsageError(f"bad --tolerance {item!r}")
        cfg.tolerances = tol
    elif cmd == "flow":
        cfg.map = "profile_suspension"
        cfg.map_params = {"a": args.a} if args.init == "suspension" else {}
        cfg.options = {"B": args.B, "init": args.init, "perturbation": args.perturbation,
                       "n_nodes": args.n_nodes, "step": args.step, "max_iter": args.max_iter,
                       "grad_tol": args.grad_tol, "sobolev_length": args.sobolev_length}
    elif cmd == "convergence":
        if args.levels is None:
            levels = [list(r) for r in DEFAULT_LEVELS]
        else:
            levels = [[n, max(4, 3 * n // 4), max(4, 3 * n // 4)] for n in args.levels]
        cfg.options = {"levels": levels}
    return cfg


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        cfg = _run_config(args)
        with threadpool_limits(limits=cfg.threads):
            result, code = COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"contactskyrme: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ConfigurationError, InputError) as exc:
        print(f"contactskyrme: error: {exc}", file=sys.stderr)
        return 2
    except ContactSkyrmeError as exc:
        print(f"contactskyrme: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    report = {
        "schema": SCHEMA_VERSION,
        "command": cfg.subcommand,
        "config": cfg.as_dict(),
        "backend": kernels.BACKEND,
        "result": result,
        "exit_code": code,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    text = dumps(report) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
