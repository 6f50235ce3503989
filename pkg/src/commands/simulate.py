# File: src/commands/simulate.py

"""simulate: contention run over one trace file, or an FMM vs RWP comparison."""

import logging

from src.commands.common import Outputs, parse_grid, read_tracked, resolve_settings
from src.mobility.trace_io import parse_traces
from src.simulation.contention import (
    SIM_KEYS,
    SimConfig,
    compare_models,
    comparison_frame,
    format_summary,
    grid_heatmap_export,
    report_frame,
    run_simulation,
)
from src.utils.errors import UsageError
from src.utils.files import RunManifest

logger = logging.getLogger(__name__)


def configure(parser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--traces", help="Trace file (ns-2 or CSV) to simulate")
    source.add_argument("--compare", nargs=2, metavar=("FMM", "RWP"), help="Compare two trace files")
    parser.add_argument("--duration", type=float, help="Simulated seconds")
    parser.add_argument("--width", type=float, help="Field width in metres")
    parser.add_argument("--height", type=float, help="Field height in metres")
    parser.add_argument("--nodes", type=int, help="Expected node count (default: nodes in the trace file)")
    parser.add_argument("--radio-range", type=float, help="Radio range in metres")
    parser.add_argument("--tick", type=float, help="Tick length in seconds")
    parser.add_argument("--grid", help="Congestion grid as ROWSxCOLS, e.g. 10x10")
    parser.add_argument("--contention", choices=("components", "pairwise"), help="Contention rule")


def _load(path, manifest, duration):
    text = read_tracked(path, manifest).decode("utf-8")
    return parse_traces(text, duration)


def run(args) -> None:
    grid = parse_grid(args.grid)
    settings = resolve_settings(args, {
        "seed": args.seed,
        "simulation_time": args.duration,
        "width": args.width,
        "length": args.height,
        "nodes": args.nodes,
        "radio_range": args.radio_range,
        "tick": args.tick,
        "grid_rows": grid[0] if grid else None,
        "grid_cols": grid[1] if grid else None,
        "contention": args.contention,
    })
    manifest = RunManifest("simulate", seeds={"seed": settings["seed"]})
    outputs = Outputs(args.out_dir, manifest)
    duration = settings["simulation_time"]

    if args.traces:
        trace_sets = {"run": _load(args.traces, manifest, duration)}
    else:
        trace_sets = {"fmm": _load(args.compare[0], manifest, duration),
                      "rwp": _load(args.compare[1], manifest, duration)}
    counts = {len(traces) for traces in trace_sets.values()}
    if settings["nodes"] is None:
        if len(counts) != 1:
            raise UsageError(f"Trace files hold different node counts {sorted(counts)}; pass --nodes")
        settings["nodes"] = counts.pop()
    cfg = SimConfig.from_mapping({key: settings[key] for key in SIM_KEYS})
    manifest.config = cfg.to_mapping()

    if args.traces:
        report = run_simulation(trace_sets["run"], cfg, label="run")
        outputs.write_frame("sim_report.csv", report_frame(report))
        outputs.write_text("heatmap.csv", grid_heatmap_export(report.grid))
        outputs.write_text("sim_summary.txt", format_summary(report))
        if args.plot:
            from src.reports import figures
            outputs.record(figures.plot_heatmap(report.grid, outputs.path("fig_heatmap.png")))
        outputs.finish()
        return

    comparison = compare_models(trace_sets["fmm"], trace_sets["rwp"], cfg)
    for label, report in (("fmm", comparison.fmm), ("rwp", comparison.rwp)):
        outputs.write_frame(f"sim_report_{label}.csv", report_frame(report))
        outputs.write_text(f"heatmap_{label}.csv", grid_heatmap_export(report.grid))
    outputs.write_frame("comparison.csv", comparison_frame(comparison))
    summary = (format_summary(comparison.fmm) + "\n" + format_summary(comparison.rwp)
               + f"\nfmm/rwp backoff ratio: {comparison.ratio:.6g}\n")
    outputs.write_text("sim_summary.txt", summary)
    logger.info("FMM/RWP backoff ratio %.3f", comparison.ratio)
    if args.plot:
        from src.reports import figures
        for label, report in (("fmm", comparison.fmm), ("rwp", comparison.rwp)):
            outputs.record(figures.plot_heatmap(report.grid, outputs.path(f"fig_heatmap_{label}.png"),
                                                title=label.upper()))
        outputs.record(figures.plot_congestion_points(comparison, outputs.path("fig_congestion_points.png")))
        outputs.record(figures.plot_traces({"FMM": trace_sets["fmm"], "RWP": trace_sets["rwp"]},
                                           cfg.width, cfg.height, outputs.path("fig_traces.png")))
    outputs.finish()
