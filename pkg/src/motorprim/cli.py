"""Command-line front end.

Subcommands:

    run <config.json>                     run a scenario config
    scan-singularity <model> <threshold>  workspace singularity scan
    learn <demo.csv> <space> <out.json>   fit a DMP to a demonstration file
    rollout <model.json>                  integrate a saved DMP to CSV
    plot <trace.csv>                      render a trace as SVG

Exit codes: 0 success, 2 configuration error, 3 numerical abort,
64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

USAGE = __doc__


def _cmd_run(argv):
    from . import scenarios
    from .dynamics import NumericalInstability

    ap = argparse.ArgumentParser(prog="motorprim run", add_help=True)
    ap.add_argument("config")
    ap.add_argument("--out", help="override the config's output directory")
    args = ap.parse_args(argv)
    cfg = scenarios.ScenarioConfig.from_file(args.config)
    if args.out:
        cfg.output_dir = args.out
    try:
        result = scenarios.run_scenario(cfg)
    except NumericalInstability as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    metrics = result.get("metrics", {})
    print(f"scenario {cfg.scenario}: wrote outputs to {cfg.output_dir}")
    for k, v in metrics.items():
        if isinstance(v, (int, float, bool, str)):
            print(f"  {k}: {v}")
    return EXIT_OK


def _cmd_scan(argv):
    from . import energy
    from .model import load_model

    ap = argparse.ArgumentParser(prog="motorprim scan-singularity")
    ap.add_argument("model")
    ap.add_argument("threshold", type=float)
    ap.add_argument("--samples", type=int, default=9,
                    help="grid points per free joint")
    ap.add_argument("--fix", action="append", default=[],
                    metavar="JOINT=VALUE",
                    help="freeze a joint, e.g. --fix 0=0 --fix 6=0")
    ap.add_argument("--task-dims", default=None,
                    help="comma-separated task rows, e.g. 0,1 for a planar arm")
    ap.add_argument("--out", default="pointcloud.csv")
    args = ap.parse_args(argv)
    model = load_model(args.model)
    fixed = {}
    for item in args.fix:
        j, v = item.split("=")
        fixed[int(j)] = float(v)
    dims = None
    if args.task_dims:
        dims = tuple(int(x) for x in args.task_dims.split(","))
    scan = energy.singularity_scan(model, args.threshold, args.samples,
                                   fixed=fixed, task_dims=dims)
    energy.write_pointcloud_csv(scan, args.out)
    print(f"singular fraction: {scan.fraction:.4f} "
          f"({scan.flagged}/{scan.total} states at threshold "
          f"{args.threshold:g}); point cloud: {args.out}")
    return EXIT_OK


def _cmd_learn(argv):
    from . import dmp

    ap = argparse.ArgumentParser(prog="motorprim learn")
    ap.add_argument("demo")
    ap.add_argument("space", choices=dmp.SPACES)
    ap.add_argument("out")
    ap.add_argument("--kind", choices=("discrete", "rhythmic"),
                    default="discrete")
    ap.add_argument("--basis", type=int, default=dmp.DEFAULT_N_BASIS)
    args = ap.parse_args(argv)
    demo = dmp.load_demo_csv(args.demo)
    model = dmp.imitation_learn(demo, space=args.space, kind=args.kind,
                                N=args.basis)
    dmp.save_dmp(model, args.out)
    print(f"learned {args.kind} {args.space} model "
          f"({model.basis.N} basis functions) -> {args.out}")
    return EXIT_OK


def _cmd_rollout(argv):
    from . import dmp

    ap = argparse.ArgumentParser(prog="motorprim rollout")
    ap.add_argument("model")
    ap.add_argument("--duration", type=float, default=None)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--out", default="rollout.csv")
    args = ap.parse_args(argv)
    model = dmp.load_dmp(args.model)
    duration = args.duration
    if duration is None:
        duration = model.tau if model.canonical.kind == "discrete" \
            else 2 * np.pi * model.tau
    ro = dmp.rollout(model, duration, args.dt)
    n = ro.y.shape[1]
    header = ["t"] + [f"y{i+1}" for i in range(n)] \
        + [f"yd{i+1}" for i in range(n)]
    with open(args.out, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for i in range(len(ro.t)):
            row = [ro.t[i], *ro.y[i], *ro.yd[i]]
            f.write(",".join(repr(float(x)) for x in row) + "\n")
    print(f"rollout of {args.model}: {len(ro.t)} samples -> {args.out}")
    return EXIT_OK


def _cmd_plot(argv):
    from . import svgplot

    ap = argparse.ArgumentParser(prog="motorprim plot")
    ap.add_argument("trace")
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    with open(args.trace) as f:
        header = f.readline().strip().split(",")
        rows = np.array([[float(x) for x in line.split(",")]
                         for line in f if line.strip()])
    if header[0] != "t" or rows.ndim != 2:
        raise ValueError("not a trace CSV (expected a 't' first column)")
    out = args.out or (args.trace.rsplit(".", 1)[0] + ".svg")
    series = [(rows[:, 0], rows[:, j], header[j])
              for j in range(1, len(header))
              if header[j].startswith(("q", "V"))]
    svgplot.line_plot(out, series, title=args.trace.split("/")[-1])
    print(f"plot -> {out}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "scan-singularity": _cmd_scan,
    "learn": _cmd_learn,
    "rollout": _cmd_rollout,
    "plot": _cmd_plot,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return EXIT_OK if argv else EXIT_USAGE
    cmd = argv[0]
    handler = _COMMANDS.get(cmd)
    if handler is None:
        print(f"unknown subcommand {cmd!r}\n{USAGE}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return handler(argv[1:])
    except SystemExit as e:  # argparse errors on bad per-command flags
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    except Exception as e:
        from .dynamics import NumericalInstability
        if isinstance(e, NumericalInstability):
            print(f"numerical abort: {e}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
