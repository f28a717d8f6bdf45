"""Command line entry point: ``vdl run|validate|sample|euler-arnold``.

Exit codes: 0 when every verdict passes, 2 when an experiment ran but a
verdict failed, 1 on usage or execution errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import constructions as C
from . import euler_arnold as EA
from . import experiments as X
from . import gridio
from .errors import VDLError
from .spectral import Grid1D, Grid2D, GridFunction1D, GridFunction2D

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

SAMPLERS = {
    "xi_n": (1, lambda a: (lambda x: C.xi_n(a.n, x))),
    "psi": (1, lambda a: C.psi),
    "f2d": (2, lambda a: C.hamiltonian_f),
    "fn2d": (2, lambda a: (lambda x, y: C.f_n_2d(a.n, a.t, x, y))),
}


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _load(args):
    raw = X.load_toml(args.config) if args.config else {}
    return X.apply_overrides(raw, args.set or [])


def cmd_run(args):
    raw = _load(args)
    diags = X.validate(raw)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_ERROR
    config = X.parse_config(raw)
    result, err, secs = X.execute(config)
    report = X.build_report(config, result, err, secs)
    X.write_outputs(args.out, report, result)
    for v in report["verdicts"]:
        print(f"{'PASS' if v['pass'] else 'FAIL'} {v['name']}: {v['value']} ({v['threshold']})")
    print(f"{config.experiment}: {report['status']} -> {Path(args.out) / 'report.json'}")
    if err:
        print(err, file=sys.stderr)
        return EXIT_ERROR
    return EXIT_PASS if result.passed else EXIT_FAIL


def cmd_validate(args):
    diags = X.validate(_load(args))
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_ERROR if diags else EXIT_PASS


def cmd_sample(args):
    dims, make = SAMPLERS[args.function]
    period = args.period
    offset = -0.5 * period if args.offset is None else args.offset
    func = make(args)
    if dims == 1:
        f = GridFunction1D.sample(Grid1D(args.grid, period, offset), func)
    else:
        f = GridFunction2D.sample(Grid2D.square(args.grid, period, offset), func)
    if args.format == "binary":
        if not args.out:
            return _err("--format binary needs --out")
        gridio.write_binary(f, args.out)
    elif args.out:
        gridio.write_csv(f, args.out)
    else:
        gridio.write_csv(f, sys.stdout)
    return EXIT_PASS


def _read_grid_file(path):
    data = Path(path).read_bytes()
    if data[:8] == gridio.MAGIC:
        return gridio.from_bytes(data)
    return gridio.read_csv(path)


def cmd_euler_arnold(args):
    eq = args.equation
    if args.init is None:
        args.init = "two-mode" if eq == "sqg" else "sine"
    if Path(args.init).exists():
        init = _read_grid_file(args.init)
    elif eq == "sqg":
        init = EA.preset_2d(args.init, args.n)
    else:
        init = EA.preset_1d(args.init, args.n)
    if eq == "burgers":
        traj = EA.burgers_solve(init, args.t_end, args.dt, args.snapshot_every)
    elif eq == "epdiff":
        traj = EA.epdiff1d_solve(init, args.s, args.t_end, args.dt, args.snapshot_every)
    else:
        traj = EA.sqg_solve(init, args.t_end, args.dt, args.snapshot_every)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj.diagnostics.to_csv(out / "diagnostics.csv")
    for i, snap in enumerate(traj.snapshots):
        gridio.write_binary(snap.theta if eq == "sqg" else snap.u, out / f"snapshot_{i:04d}.vdlgrid")
    summary = X._jsonable({"equation": eq, "s": args.s, "n": args.n, "dt": args.dt,
                           "t_end": args.t_end, "init": args.init,
                           "snapshot_times": [snap.t for snap in traj.snapshots],
                           **traj.diagnostics.summary()})
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary))
    return EXIT_PASS


def build_parser():
    p = argparse.ArgumentParser(prog="vdl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a named experiment")
    r.add_argument("--config", help="TOML config file")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("--config", help="TOML config file")
    v.add_argument("--set", action="append", metavar="KEY=VALUE")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("sample", help="sample a construction on a grid")
    s.add_argument("--function", required=True, choices=sorted(SAMPLERS))
    s.add_argument("--n", type=int, default=1, help="family index")
    s.add_argument("--t", type=float, default=0.0, help="time (fn2d)")
    s.add_argument("--grid", type=int, default=1024, help="points per axis (power of two)")
    s.add_argument("--period", type=float, default=8.0)
    s.add_argument("--offset", type=float, default=None, help="left endpoint (default -period/2)")
    s.add_argument("--format", choices=("csv", "binary"), default="csv")
    s.add_argument("--out", help="output file (CSV to stdout when omitted)")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("euler-arnold", help="integrate an Euler-Arnold equation")
    e.add_argument("--equation", required=True, choices=("burgers", "epdiff", "sqg"))
    e.add_argument("--s", type=float, default=1.0, help="metric order (epdiff)")
    e.add_argument("--n", type=int, default=256, help="grid points per axis")
    e.add_argument("--dt", type=float, default=1e-3)
    e.add_argument("--t-end", type=float, default=1.0)
    e.add_argument("--init", default=None,
                   help="preset name or grid file (CSV or binary); default sine, or two-mode for sqg")
    e.add_argument("--snapshot-every", type=int, default=0)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_euler_arnold)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (VDLError, OSError) as exc:
        return _err(f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        return _err(str(exc))


if __name__ == "__main__":
    sys.exit(main())
