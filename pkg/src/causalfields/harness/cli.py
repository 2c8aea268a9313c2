"""Command line interface.

Exit codes: 0 all requested checks passed, 1 at least one check failed,
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..errors import CausalFieldsError
from ..scalarfield import bump
from .config import default_config, load_config, write_config
from .report import canonical_json, load_report, recheck, render_text, write_report
from .spinstat import run_spinstat

_STAGES_FOR = {
    "causal": ("geometry", "causal"),
    "deform": ("geometry", "deformation"),
    "ccr-check": ("geometry", "scalar", "ccr"),
    "car-check": ("geometry", "car"),
    "functor-check": ("geometry", "deformation", "scalar", "car", "covariance"),
    "spinstat": None,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="causalfields",
        description=(
            "Lattice checks for covariant field theory on 1+1 cylinders: "
            "causal structure, metric deformation certificates, CCR/CAR "
            "quantization, net covariance, and the statistics verdict."
        ),
    )
    parser.add_argument("--config", help="INI config file (defaults built in)")
    parser.add_argument("--out", help="output directory for reports and figures")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument(
        "--tol-scale", type=float, help="scale factor applied to loose tolerances"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("causal", help="causal-order checks (duality, complements, domains)")
    sub.add_parser("deform", help="build the flattening deformation and certify it")

    p = sub.add_parser("propagate", help="propagate a bump source and report stats")
    p.add_argument("--t-center", type=float, default=None)
    p.add_argument("--x-center", type=float, default=None)
    p.add_argument("--t-half", type=float, default=None)
    p.add_argument("--x-half", type=float, default=None)

    sub.add_parser("ccr-check", help="scalar quantization checks (state, commutators)")
    sub.add_parser("car-check", help="spinor quantization checks (anticommutators)")
    sub.add_parser(
        "functor-check", help="net functor laws and isometry transport checks"
    )
    sub.add_parser("spinstat", help="run every stage and emit the full report")

    p = sub.add_parser("report", help="render or re-audit an existing report")
    p.add_argument("input", help="path to a report.json")
    p.add_argument(
        "--recheck",
        action="store_true",
        help="recompute all pass flags from stored values",
    )

    p = sub.add_parser("write-config", help="write the effective config to a file")
    p.add_argument("output", help="destination path")
    return parser


def _load_config(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol_scale is not None:
        cfg.tol_scale = args.tol_scale
    return cfg


def _emit_outputs(args, cfg, report, ctx):
    if not args.out:
        return
    from . import plots

    os.makedirs(args.out, exist_ok=True)
    write_report(report, os.path.join(args.out, "report.json"))
    with open(os.path.join(args.out, "report.txt"), "w") as fh:
        fh.write(render_text(report))
    seed = cfg.seed
    if "model" in ctx:
        plots.plot_metric(
            ctx["model"], ctx["lattice"], os.path.join(args.out, "metric.svg"), seed
        )
    if "deformation" in ctx:
        plots.plot_deformation(
            ctx["deformation"], os.path.join(args.out, "deformation.svg"), seed
        )
    if "atlas" in ctx:
        atlas = ctx["atlas"]
        dfm = ctx["deformation"]
        plots.plot_regions(
            dfm.source_lattice,
            {"U1": atlas.U[0], "U2": atlas.U[1], "G": atlas.G},
            os.path.join(args.out, "atlas_source.svg"),
            seed,
            title="source-side regions",
        )
        plots.plot_regions(
            dfm.lattice,
            {
                "Uhat1": atlas.Uhat[0],
                "Uhat2": atlas.Uhat[1],
                "Utilde1": atlas.Utilde[0],
                "Utilde2": atlas.Utilde[1],
                "Ghat": atlas.Ghat,
            },
            os.path.join(args.out, "atlas_deformed.svg"),
            seed,
            title="deformed-side regions",
        )
    if "scalar_space" in ctx:
        space = ctx["scalar_space"]
        plots.plot_field(
            ctx["lattice"],
            space.solutions[0],
            os.path.join(args.out, "solution.svg"),
            seed,
            title="causal propagator of the first basis function",
        )
    plots.plot_report_margins(report, os.path.join(args.out, "margins.svg"), seed)


def _cmd_stages(args, stages):
    cfg = _load_config(args)
    report, ctx = run_spinstat(cfg, stages=stages)
    sys.stdout.write(render_text(report))
    _emit_outputs(args, cfg, report, ctx)
    return 0 if report["verdict"] == "mechanism-confirmed" else 1


def _cmd_propagate(args):
    cfg = _load_config(args)
    model = cfg.model()
    lattice = cfg.lattice(model)
    from ..scalarfield import WaveKernel

    span = (cfg.t_past if cfg.model_kind != "minkowski" else cfg.t_max) - cfg.t_min
    t_center = args.t_center if args.t_center is not None else cfg.t_min + 0.45 * span
    x_center = args.x_center if args.x_center is not None else 0.25 * cfg.length
    t_half = args.t_half if args.t_half is not None else 0.31 * span
    x_half = args.x_half if args.x_half is not None else cfg.basis_width

    kernel = WaveKernel(model, lattice, cfg.mass)
    f = bump(lattice, t_center, x_center, t_half, x_half)
    u = kernel.causal_propagator(f.values)
    stats = {
        "tool": "causalfields-propagate",
        "model": model.name,
        "mass": cfg.mass,
        "source_center": [t_center, x_center],
        "max_amplitude": float(np.abs(u).max()),
        "support_sites": int(np.count_nonzero(u)),
        "residual": float(
            np.abs(kernel.apply_operator(u)[2:-2]).max() / max(np.abs(f.values).max(), 1e-300)
        ),
    }
    sys.stdout.write(canonical_json(stats))
    if args.out:
        from . import plots

        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "propagate.json"), "w") as fh:
            fh.write(canonical_json(stats))
        plots.plot_field(
            lattice,
            u,
            os.path.join(args.out, "propagate.svg"),
            cfg.seed,
            title="causal propagator",
        )
    return 0 if stats["residual"] < 1e-10 else 1


def _cmd_report(args):
    report = load_report(args.input)
    sys.stdout.write(render_text(report))
    if args.recheck:
        consistent, verdict = recheck(report)
        if not consistent:
            sys.stdout.write("recheck: stored flags contradict stored values\n")
            return 2
        sys.stdout.write("recheck: consistent\n")
        return 0 if verdict == "mechanism-confirmed" else 1
    return 0 if report.get("verdict") == "mechanism-confirmed" else 1


def _cmd_write_config(args):
    cfg = _load_config(args)
    write_config(cfg, args.output)
    sys.stdout.write(f"wrote {args.output}\n")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _STAGES_FOR:
            return _cmd_stages(args, _STAGES_FOR[args.command])
        if args.command == "propagate":
            return _cmd_propagate(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "write-config":
            return _cmd_write_config(args)
        parser.error(f"unknown command {args.command!r}")
    except CausalFieldsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
