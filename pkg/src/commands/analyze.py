# File: src/commands/analyze.py

"""analyze: friend / non-friend pair features, kNN check and the friendship-distance curve."""

import logging

from src.analysis.social import (
    KnnFriendClassifier,
    MatchWindow,
    friendship_decay_rate,
    friendship_distance_curve,
    knn_holdout_accuracy,
    pair_feature_frame,
    pair_features,
    sample_labelled_pairs,
)
from src.commands.common import Outputs, load_graph, parse_bins, resolve_settings
from src.utils.errors import DataError
from src.utils.files import RunManifest
from src.utils.rng import derive_seed

logger = logging.getLogger(__name__)


def configure(parser) -> None:
    parser.add_argument("--snapshot", required=True, help="Snapshot written by ingest")
    parser.add_argument("--pair-count", type=int, help="Pairs sampled per class")
    parser.add_argument("--bins", help="Comma-separated distance bin edges in km")
    parser.add_argument("--time-epsilon", type=float, help="Checkin match window, seconds")
    parser.add_argument("--space-epsilon", type=float, help="Checkin match window, km")
    parser.add_argument("--max-span-km", type=float, help="Drop users whose checkins spread further than this")
    parser.add_argument("--knn-k", type=int, help="Neighbours for the friend classifier")


def run(args) -> None:
    settings = resolve_settings(args, {
        "seed": args.seed,
        "pair_count": args.pair_count,
        "bins": args.bins,
        "time_epsilon": args.time_epsilon,
        "space_epsilon": args.space_epsilon,
        "max_span_km": args.max_span_km,
        "knn_k": args.knn_k,
    })
    seeds = {
        "seed": settings["seed"],
        "pairs": derive_seed(settings["seed"], "analyze-pairs"),
        "curve": derive_seed(settings["seed"], "analyze-curve"),
        "knn": derive_seed(settings["seed"], "analyze-knn"),
    }
    manifest = RunManifest("analyze", config=dict(settings), seeds=seeds)
    outputs = Outputs(args.out_dir, manifest)
    graph = load_graph(args.snapshot, manifest)

    window = MatchWindow(settings["time_epsilon"], settings["space_epsilon"])
    curve = friendship_distance_curve(graph, settings["pair_count"], parse_bins(settings["bins"]),
                                      seeds["curve"], settings["max_span_km"])
    outputs.write_frame("distance_curve.csv", curve.to_frame())

    friends, strangers = sample_labelled_pairs(graph, settings["pair_count"], seeds["pairs"],
                                               settings["max_span_km"])
    features = pair_features(graph, friends + strangers, window)
    classifier = KnnFriendClassifier(settings["knn_k"]).fit(features)
    frame = pair_feature_frame(features, classifier)
    outputs.write_frame("pair_features.csv", frame)

    summary = {"pair_count": settings["pair_count"], "decay": None, "knn_holdout_accuracy": None}
    try:
        fit = friendship_decay_rate(curve)
        summary["decay"] = {"slope_per_km": fit.slope_per_km, "intercept": fit.intercept,
                            "bins_used": fit.bins_used, "decay_length_km": fit.decay_length_km}
    except DataError as exc:
        logger.warning("Decay rate not fitted: %s", exc)
    if len(features) >= 4 * settings["knn_k"]:
        summary["knn_holdout_accuracy"] = knn_holdout_accuracy(features, settings["knn_k"], rng_seed=seeds["knn"])
    outputs.write_json("analysis_summary.json", summary)

    if args.plot:
        from src.reports import figures
        outputs.record(figures.plot_pair_features(frame, outputs.path("fig_pair_features.png")))
        outputs.record(figures.plot_distance_curve(curve, outputs.path("fig_distance_curve.png")))
    outputs.finish()
