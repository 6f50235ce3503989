# File: src/commands/estimate.py

"""estimate: collision-counting population estimate with repeat spread and a sampling check."""

from dataclasses import asdict

from src.analysis.population import (
    bfs_degree_bias,
    bfs_sample,
    degree_sampling_fit_test,
    draw_sample_run,
    estimate_population,
    estimate_spread,
    repeated_estimates,
)
from src.commands.common import Outputs, load_graph, resolve_settings
from src.utils.files import RunManifest
from src.utils.rng import derive_seed


def configure(parser) -> None:
    parser.add_argument("--snapshot", required=True, help="Snapshot written by ingest")
    parser.add_argument("--samples", type=int, help="Number of independent samples r")
    parser.add_argument("--sample-size", type=int, help="Degree-weighted draws per sample")
    parser.add_argument("--repeats", type=int, help="Repeated estimates for the spread report")
    parser.add_argument("--bfs-user", help="Also crawl from this user and report the crawl's degree bias")
    parser.add_argument("--bfs-budget", type=int, default=100, help="Users visited by the BFS crawl")


def run(args) -> None:
    settings = resolve_settings(args, {
        "seed": args.seed,
        "samples": args.samples,
        "sample_size": args.sample_size,
        "repeats": args.repeats,
    })
    seeds = {
        "seed": settings["seed"],
        "estimate": derive_seed(settings["seed"], "estimate"),
        "repeats": derive_seed(settings["seed"], "estimate-repeats"),
        "fit_test": derive_seed(settings["seed"], "estimate-fit-test"),
        "bfs": derive_seed(settings["seed"], "estimate-bfs"),
    }
    manifest = RunManifest("estimate", config=dict(settings), seeds=seeds)
    outputs = Outputs(args.out_dir, manifest)
    graph = load_graph(args.snapshot, manifest)

    run_ = draw_sample_run(graph, settings["samples"], settings["sample_size"], seeds["estimate"])
    estimate = estimate_population(run_)
    report = {
        "users_in_snapshot": len(graph.users),
        "estimate": asdict(estimate),
        "degree_sampling": degree_sampling_fit_test(
            graph, settings["samples"] * settings["sample_size"], seeds["fit_test"]),
    }

    if settings["repeats"] > 0:
        repeats = repeated_estimates(graph, settings["repeats"], settings["samples"],
                                     settings["sample_size"], seeds["repeats"])
        outputs.write_frame("population_repeats.csv", repeats)
        report["spread"] = estimate_spread(repeats)

    if args.bfs_user:
        crawl = bfs_sample(graph, args.bfs_user, args.bfs_budget, seeds["bfs"])
        report["bfs"] = {"seed_user": args.bfs_user, "visited": len(crawl),
                         "degree_bias": bfs_degree_bias(graph, crawl)}

    outputs.write_json("population.json", report)
    outputs.finish()
