"""Command-line entry point.

Subcommands:
    run <config|builtin>   execute a scenario; exit 0/2/3/4 per the contract
    report <dir>           render plots and a summary table from artifacts
    kernel-check           heat-kernel dual-series and semigroup self-test
    norms <trajectory>     parabolic norm report for a stored trajectory

The worker count for multi-resolution sweeps comes from TORUSFLOW_WORKERS.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import scenarios, storage
from .errors import ConfigInvalid, ManifestMissing, TorusflowError


def _cmd_run(args):
    builtin = scenarios.built_in_scenarios()
    raw = None
    if args.config in builtin:
        raw = dict(builtin[args.config])
    else:
        path = Path(args.config)
        if not path.is_file():
            print(f"error: {args.config!r} is neither a builtin scenario nor a config file",
                  file=sys.stderr)
            print("builtin scenarios: " + ", ".join(sorted(builtin)), file=sys.stderr)
            return scenarios.EXIT_CONFIG_ERROR
        try:
            raw = storage.read_keyvalues(path)
        except (ValueError, ManifestMissing) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return scenarios.EXIT_CONFIG_ERROR
    if args.resolution:
        raw["resolutions"] = ",".join(str(r) for r in args.resolution)
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    try:
        config = scenarios.validate_config(raw)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return scenarios.EXIT_CONFIG_ERROR
    out = Path(args.out) if args.out else Path("runs") / config["name"]
    code, path = scenarios.run_scenario(config, out, emit_plots=not args.no_plots)
    status = {0: "pass", 2: "gate failure", 4: "numerical abort"}.get(code, "?")
    print(f"{config['name']}: {status} (artifacts in {path})")
    return code


def _cmd_report(args):
    from . import plots
    root = Path(args.directory)
    try:
        manifest = storage.read_keyvalues(root / "manifest.txt")
    except ManifestMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return scenarios.EXIT_CONFIG_ERROR
    made = plots.render_artifacts(root)
    print(f"scenario: {manifest.get('name', '?')}   status: {manifest.get('status', '?')}")
    gates = {k: v for k, v in manifest.items() if k.startswith("gate.")}
    if gates:
        width = max(len(k) for k in gates)
        for key in sorted(gates):
            print(f"  {key:<{width}}  {gates[key]}")
    scalars = {k: v for k, v in manifest.items() if k.startswith("scalar.")}
    for key in sorted(scalars):
        print(f"  {key} = {scalars[key]}")
    print(f"rendered {len(made)} plot(s)")
    return 0


def _cmd_kernel_check(args):
    from .grid import TorusGrid
    from .heatkernel import (KernelQuery, gaussian_bound_report, heat_convolve,
                             kernel_value_dual)
    from .grid import TensorField
    rows = []
    worst_dual = 0.0
    for dim in (1, 2):
        for t in np.geomspace(1e-3, 1.0, 10):
            for d in np.linspace(0.0, math.pi, 6):
                f, g = kernel_value_dual(KernelQuery.isotropic(d, float(t), dim=dim))
                rows.append([dim, d, float(t), f, g, abs(f - g)])
                worst_dual = max(worst_dual, abs(f - g))
    grid = TorusGrid(2, 64)
    x = grid.coordinates()
    fld = TensorField(grid, np.cos(3 * x[0]) + np.sin(2 * x[1]), (0, 0))
    semi = np.max(np.abs(heat_convolve(heat_convolve(fld, 0.03), 0.07).components
                         - heat_convolve(fld, 0.10).components))
    report = gaussian_bound_report(grid, np.geomspace(0.01, 1.0, 8))
    out = Path(args.out) if args.out else Path("runs") / "kernel-check"
    out.mkdir(parents=True, exist_ok=True)
    storage.write_csv(out / "dual_series.csv",
                      ["dim", "d", "t", "fourier", "images", "abs_diff"], rows)
    storage.write_csv(out / "gaussian_bound.csv",
                      ["d", "t", "kernel"],
                      [[r[0], r[1], r[2]] for r in report["samples"]])
    summary = {
        "dual_series_worst": worst_dual,
        "semigroup_error": float(semi),
        "C_fit": report["C_fit"],
        "D_fit": report["D_fit"],
        "C_sup": report["C_sup"],
        "worst_slack": report["worst_slack"],
        "C_tail": report["C_tail"],
        "pass": bool(worst_dual <= 1e-10 and semi <= 1e-12),
    }
    storage.write_keyvalues(out / "summary.txt", summary, header="kernel check")
    print(f"dual series worst: {worst_dual:.3e}  semigroup: {semi:.3e}  "
          f"fitted D: {report['D_fit']:.3f}")
    return scenarios.EXIT_PASS if summary["pass"] else scenarios.EXIT_GATE_FAILURE


def _cmd_norms(args):
    from .norms import x_norm
    try:
        traj = storage.load_trajectory(args.trajectory)
    except ManifestMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return scenarios.EXIT_CONFIG_ERROR
    report = x_norm(traj.h_fields())
    out = Path(args.out) if args.out else Path(args.trajectory)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = report.rows()
    storage.write_csv(Path(out) / "x_norm_balls.csv", header, rows)
    storage.write_keyvalues(Path(out) / "x_norm_summary.txt", {
        "aggregate": report.aggregate,
        "sup_term": report.sup_term,
        "census_size": report.census_size,
        "radii": list(report.radii),
    })
    print(f"X norm aggregate: {report.aggregate:.6e} (census {report.census_size})")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="torusflow",
                                     description="Ricci-DeTurck flow laboratory on flat tori")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config or builtin")
    p_run.add_argument("config", help="path to a config file or a builtin name")
    p_run.add_argument("--resolution", type=int, action="append",
                       help="override the resolution sweep (repeatable)")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--no-plots", action="store_true", help="skip plot rendering")
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("report", help="summarize artifacts and render plots")
    p_rep.add_argument("directory")
    p_rep.set_defaults(func=_cmd_report)

    p_ker = sub.add_parser("kernel-check", help="heat-kernel self-test")
    p_ker.add_argument("--out", default=None)
    p_ker.set_defaults(func=_cmd_kernel_check)

    p_nrm = sub.add_parser("norms", help="norm report for a stored trajectory")
    p_nrm.add_argument("trajectory")
    p_nrm.add_argument("--out", default=None)
    p_nrm.set_defaults(func=_cmd_norms)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TorusflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return scenarios.EXIT_NUMERICAL_ABORT


if __name__ == "__main__":
    sys.exit(main())
