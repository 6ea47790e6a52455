"""georough command line: one subcommand per library module.

Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as gio
from .controls import parse_control
from .errors import GeoRoughError
from .paths import PiecewisePath

FIXTURES = ("pure-area", "monotone", "lacunary", "chirp", "brownian")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for all randomness (default 0)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker cap for the harness (default: all cores)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="directory for output files (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS, help="output format where both exist")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="georough", description="Computations with paths in free nilpotent groups.", parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sig", parents=[common], help="signature of a piecewise-linear path")
    s.add_argument("--path", required=True, help="path CSV (t,x1..xd)")
    s.add_argument("--m", type=int, required=True, help="truncation step")
    s.add_argument("--s", type=float, default=0.0)
    s.add_argument("--t", type=float, default=1.0)

    s = sub.add_parser("norm", parents=[common], help="homogeneous norms and CC bounds of a group element")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--element", help="tensor JSON")
    src.add_argument("--path", help="path CSV; its signature is used")
    s.add_argument("--m", type=int, default=2, help="step when --path is given")
    s.add_argument("--norm", choices=("l", "t"), default="l")
    s.add_argument("--cc", action="store_true", help="also report CC lower/upper bounds (m <= 3)")

    s = sub.add_parser("dist", parents=[common], help="invariant distance between two group elements")
    s.add_argument("--a", required=True, help="tensor JSON")
    s.add_argument("--b", required=True, help="tensor JSON")
    s.add_argument("--side", choices=("left", "right"), default="left")
    s.add_argument("--norm", choices=("l", "t"), default="l")

    s = sub.add_parser("pvar", parents=[common], help="p-variation norm or distance on the sample grid")
    s.add_argument("--path", required=True, help="path CSV or group-path JSON")
    s.add_argument("--against", help="second path on the same grid (distance mode)")
    s.add_argument("--m", type=int, default=2, help="lift step for CSV input")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--norm", choices=("l", "t"), default="l")

    s = sub.add_parser("approx", parents=[common], help="grid interpolant y(D) and its report")
    s.add_argument("--grid", required=True, help="path CSV or group-path JSON")
    s.add_argument("--mesh", type=int, required=True, help="target mesh 2^-k")
    s.add_argument("--m", type=int, default=2, help="lift step for CSV input")
    s.add_argument("--p", type=float, default=2.1, help="exponent of the reported p-variation ratio")

    s = sub.add_parser("classify", parents=[common], help="Wiener / Ciesielski verdict on a delta ladder")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--path", help="path CSV or group-path JSON")
    src.add_argument("--fixture", choices=FIXTURES)
    s.add_argument("--m", type=int, default=2, help="lift step for CSV input")
    s.add_argument("--n", type=int, default=None, help="fixture sample count")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--mode", choices=("pvar", "modulus"), default="pvar")
    s.add_argument("--omega", default=None, help="control spec: ts^q, table:<file>, omegaD:<file>,p=<p>,mesh=<k>")
    s.add_argument("--ladder", type=_floats, required=True, help="comma-separated deltas")
    s.add_argument("--norm", choices=("l", "t"), default="l")

    s = sub.add_parser("fixtures", parents=[common], help="emit a generated fixture")
    s.add_argument("--kind", choices=FIXTURES, required=True)
    s.add_argument("--n", type=int, default=None, help="samples (brownian: fine steps, a power of two)")
    s.add_argument("--a", type=float, default=1.0, help="pure-area coefficient")
    s.add_argument("--p", type=float, default=2.0, help="lacunary / chirp exponent")
    s.add_argument("--terms", type=int, default=8, help="lacunary terms N")
    s.add_argument("--d", type=int, default=2, help="brownian dimension")

    s = sub.add_parser("converge", parents=[common], help="strong-convergence experiment")
    s.add_argument("--config", required=True, help="JSON {system, n_ladder, fine_n, M, seed, schemes}")
    return ap


# -- helpers -----------------------------------------------------------------


def _emit(args, name: str, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text)
        print(str(d / name))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(args, default: str) -> str:
    return getattr(args, "format", default)


def _omega_loader(path: str, p: float, mesh: int):
    from .metrics import smallest_control
    from .realizer import mesh_subdivision, omega_d_control

    Y = gio.load_sampled(path)
    D = mesh_subdivision(Y.times, mesh)
    return omega_d_control(D, smallest_control(Y, p), p)


def _fixture(args) -> object:
    from . import corpus

    kind = args.fixture if hasattr(args, "fixture") and args.fixture else args.kind
    n = args.n
    if kind == "pure-area":
        return corpus.pure_area_path(getattr(args, "a", 1.0), n or 33)
    if kind == "monotone":
        t = np.linspace(0.0, 1.0, n or 65)
        return PiecewisePath(t, t[:, None])
    if kind == "lacunary":
        return corpus.lacunary_series(getattr(args, "terms", 8), args.p, n)
    if kind == "chirp":
        return corpus.chirp_path(args.p, n or 257)
    if kind == "brownian":
        return corpus.brownian_lift(n or 1024, getattr(args, "d", 2), getattr(args, "seed", 0))
    raise AssertionError(kind)


def _as_sampled(obj, m: int):
    from .signature import lift

    if isinstance(obj, PiecewisePath):
        return lift(obj, m if obj.dim > 1 else 1)
    return obj


# -- commands ----------------------------------------------------------------


def cmd_sig(args):
    from .signature import path_signature

    x = gio.load_piecewise(args.path)
    g = path_signature(x, args.s, args.t, args.m)
    _emit(args, "sig.json", g.to_json())


def cmd_norm(args):
    from .metrics import cc_bounds, lnorm, tnorm
    from .signature import path_signature

    if args.element:
        g = gio.load_tensor(args.element)
    else:
        g = path_signature(gio.load_piecewise(args.path), 0.0, 1.0, args.m)
    out = {"norm": args.norm, "value": lnorm(g) if args.norm == "l" else tnorm(g)}
    if args.cc:
        lo, up = cc_bounds(g)
        out.update(cc_lower=lo, cc_upper=up)
    _emit(args, "norm.json", gio.dumps(out))


def cmd_dist(args):
    from .metrics import dist

    a, b = gio.load_tensor(args.a), gio.load_tensor(args.b)
    _emit(args, "dist.json", gio.dumps({"side": args.side, "norm": args.norm, "value": dist(a, b, args.side, args.norm)}))


def cmd_pvar(args):
    from .metrics import pvar_distance, pvar_norm

    X = gio.load_sampled(args.path, args.m)
    if args.against:
        Y = gio.load_sampled(args.against, args.m)
        val = pvar_distance(X, Y, args.p, args.norm)
    else:
        val = pvar_norm(X, args.p, args.norm)
    _emit(args, "pvar.json", gio.dumps({"p": args.p, "norm": args.norm, "value": val}))


def cmd_approx(args):
    from .realizer import interpolant, interpolant_report, mesh_subdivision

    Y = gio.load_sampled(args.grid, args.m)
    D = mesh_subdivision(Y.times, args.mesh)
    y = interpolant(Y, D)
    rep = interpolant_report(Y, D, args.p, y)
    rep["mesh"] = args.mesh
    if getattr(args, "out", None):
        _emit(args, "interpolant.csv", y.to_csv())
        _emit(args, "approx_report.json", gio.dumps(rep))
    elif _fmt(args, "csv") == "json":
        _emit(args, "approx_report.json", gio.dumps(rep))
    else:
        sys.stdout.write(y.to_csv())
        sys.stderr.write(gio.dumps(rep) + "\n")


def cmd_classify(args):
    from .membership import classify

    if args.fixture:
        Y = _as_sampled(_fixture(args), args.m)
    else:
        Y = gio.load_sampled(args.path, args.m)
    omega = parse_control(args.omega, loader=_omega_loader) if args.omega else None
    rec = classify(Y, args.p, args.mode, args.ladder, omega, args.norm)
    if args.fixture:
        rec["input"] = args.fixture
    _emit(args, "classify.json", gio.dumps(rec))


def cmd_fixtures(args):
    obj = _fixture(args)
    fmt = _fmt(args, "csv" if isinstance(obj, PiecewisePath) else "json")
    name = args.kind.replace("-", "_")
    if isinstance(obj, PiecewisePath):
        if fmt == "json":
            _emit(args, f"{name}.json", gio.dumps(_as_sampled(obj, 2 if obj.dim > 1 else 1).to_json_obj()))
        else:
            _emit(args, f"{name}.csv", obj.to_csv())
    else:
        if fmt == "csv":
            raise GeoRoughError(f"fixture {args.kind} is group-valued; use --format json")
        _emit(args, f"{name}.json", obj.to_json())


def cmd_converge(args):
    from .harness import convergence_experiment, summary_json, table_csv

    cfg = gio.read_json(args.config)
    if hasattr(args, "seed"):
        cfg["seed"] = args.seed
    res = convergence_experiment(cfg, threads=getattr(args, "threads", None))
    if getattr(args, "out", None):
        _emit(args, "converge.csv", table_csv(res))
        _emit(args, "converge.json", summary_json(res))
    elif _fmt(args, "csv") == "json":
        _emit(args, "converge.json", summary_json(res))
    else:
        sys.stdout.write(table_csv(res))


COMMANDS = {
    "sig": cmd_sig,
    "norm": cmd_norm,
    "dist": cmd_dist,
    "pvar": cmd_pvar,
    "approx": cmd_approx,
    "classify": cmd_classify,
    "fixtures": cmd_fixtures,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "threads") and args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](args)
    except (GeoRoughError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
