# File: src/commands/gen.py

"""gen: FMM traces from a model dump, or RWP traces, as an ns-2 scenario or CSV."""

import logging

import src.config as config
from src.commands.common import Outputs, read_tracked, resolve_settings
from src.mobility.markov_model import load_models
from src.mobility.trace_io import format_traces
from src.mobility.traces import RwpConfig, SpeedPolicy, generate_fmm_traces, generate_rwp_traces
from src.utils.errors import DataError, UsageError
from src.utils.files import RunManifest
from src.utils.rng import derive_seed

logger = logging.getLogger(__name__)

EXTENSIONS = {"ns2": "trc", "csv": "csv"}


def configure(parser) -> None:
    parser.add_argument("--model", choices=("fmm", "rwp"), default="fmm", help="Mobility model")
    parser.add_argument("--models", help="Model dump written by build-models (FMM)")
    parser.add_argument("--duration", type=float, help="Trace length in seconds")
    parser.add_argument("--width", type=float, help="Field width in metres")
    parser.add_argument("--height", type=float, help="Field height in metres")
    parser.add_argument("--nodes", type=int, help="Node count (RWP; for FMM the first N models)")
    parser.add_argument("--format", choices=tuple(EXTENSIONS), default="ns2", help="Trace file format")
    parser.add_argument("--speed-policy", choices=("fixed", "temporal"), help="FMM leg speeds")
    parser.add_argument("--start", choices=("uniform", "weighted"), help="FMM start state choice")


def run(args) -> None:
    settings = resolve_settings(args, {
        "seed": args.seed,
        "simulation_time": args.duration,
        "width": args.width,
        "length": args.height,
        "nodes": args.nodes,
        "speed_policy": args.speed_policy,
        "start": args.start,
    })
    seeds = {"seed": settings["seed"], "traces": derive_seed(settings["seed"], f"gen-{args.model}")}
    manifest = RunManifest("gen", config=dict(settings, model=args.model, format=args.format), seeds=seeds)
    outputs = Outputs(args.out_dir, manifest)
    duration = settings["simulation_time"]

    if args.model == "fmm":
        if not args.models:
            raise UsageError("gen --model fmm needs --models")
        read_tracked(args.models, manifest)
        models = load_models(args.models)
        width, height = settings["width"], settings["length"]
        if models and models[0].transform is not None:
            width, height = models[0].transform.width, models[0].transform.height
        if settings["nodes"] is not None:
            if settings["nodes"] > len(models):
                raise DataError(f"Asked for {settings['nodes']} nodes but the dump has {len(models)} models")
            models = models[:settings["nodes"]]
        policy = SpeedPolicy(
            mode=settings["speed_policy"],
            speed=settings["fmm_speed"],
            min_speed=settings["fmm_min_speed"],
            max_speed=settings["fmm_max_speed"],
            max_gap_s=settings["max_gap"],
            dwell_s=settings["dwell"],
        )
        traces = generate_fmm_traces(models, duration, policy, seeds["traces"], settings["start"])
    else:
        width, height = settings["width"], settings["length"]
        cfg = RwpConfig(width, height, settings["min_speed"], settings["max_speed"],
                        settings["pause_time"], duration)
        nodes = settings["nodes"] if settings["nodes"] is not None else config.SIM_NODES
        traces = generate_rwp_traces(cfg, nodes, seeds["traces"])

    name = f"traces_{args.model}.{EXTENSIONS[args.format]}"
    outputs.write_text(name, format_traces(traces, args.format, width, height))
    logger.info("Wrote %d %s traces to %s", len(traces), args.model.upper(), name)
    outputs.finish()
