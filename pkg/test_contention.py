#!/usr/bin/env python3
"""
Tests for the tick-based contention simulation, the congestion grid and the
FMM/RWP comparison.
"""

import numpy as np
import pytest

from src.analysis.geo import FieldPoint
from src.mobility.traces import RwpConfig, Waypoint, generate_rwp_traces
from src.simulation.contention import (
    CongestionGrid,
    SimConfig,
    compare_models,
    comparison_frame,
    congestion_points,
    format_summary,
    grid_heatmap_export,
    run_simulation,
)
from src.utils.errors import ContractViolation, DataError, UsageError


def parked(x, y, until=100.0):
    return [Waypoint(0.0, FieldPoint(x, y), 0.0), Waypoint(until, FieldPoint(x, y), 0.0)]


def small_config(nodes, **overrides):
    values = dict(duration=100.0, width=1000.0, height=1000.0, node_count=nodes, radio_range=250.0,
                  tick=1.0, grid_rows=10, grid_cols=10, rng_seed=7)
    values.update(overrides)
    return SimConfig(**values)


def test_single_node_never_backs_off():
    report = run_simulation([parked(500, 500)], small_config(1))
    assert report.total_backoffs == 0
    assert report.ticks == 100
    assert grid_heatmap_export(report.grid).count(",0,0.0\n") == 100


def test_two_nodes_in_range_one_loser_per_tick():
    report = run_simulation([parked(500, 500), parked(600, 500)], small_config(2))
    assert report.total_backoffs == 100
    assert report.per_node_backoffs.sum() == 100
    assert report.per_node_backoffs.min() > 20
    again = run_simulation([parked(500, 500), parked(600, 500)], small_config(2))
    assert np.array_equal(again.per_node_backoffs, report.per_node_backoffs)


def test_three_mutually_in_range_nodes():
    traces = [parked(500, 500), parked(600, 500), parked(550, 580)]
    assert run_simulation(traces, small_config(3)).total_backoffs == 200
    assert run_simulation(traces, small_config(3, contention="pairwise")).total_backoffs == 300


def test_chain_is_one_contention_set():
    # a-b and b-c in range, a-c out of range
    traces = [parked(100, 500), parked(300, 500), parked(500, 500)]
    assert run_simulation(traces, small_config(3)).total_backoffs == 200
    assert run_simulation(traces, small_config(3, contention="pairwise")).total_backoffs == 200


def test_out_of_range_nodes_transmit_freely():
    assert run_simulation([parked(0, 0), parked(900, 900)], small_config(2)).total_backoffs == 0


def test_backoffs_land_in_the_losers_cell():
    report = run_simulation([parked(50, 50), parked(150, 50)], small_config(2))
    frame = report.grid.to_frame()
    assert list(frame.columns) == ["row", "col", "backoffs", "pause_seconds"]
    assert list(frame[["row", "col"]].iloc[:3].itertuples(index=False, name=None)) == [(0, 0), (0, 1), (0, 2)]
    busy = frame[frame["backoffs"] > 0]
    assert set(zip(busy["row"], busy["col"])) <= {(0, 0), (0, 1)}
    assert frame["backoffs"].sum() == report.total_backoffs
    assert frame["pause_seconds"].sum() == pytest.approx(report.total_backoffs * 1.0)
    assert len(congestion_points(report.grid)) == len(busy)
    assert "total backoffs: 100" in format_summary(report)


def test_grid_cells_clamp_on_far_edges():
    grid = CongestionGrid(10, 10, 1000.0, 1000.0)
    assert grid.cell_of(1000.0, 1000.0) == (9, 9)
    assert grid.cell_of(0.0, 999.0) == (9, 0)


def test_traces_must_cover_the_run():
    with pytest.raises(ContractViolation):
        run_simulation([parked(0, 0, until=50.0)], small_config(1))
    with pytest.raises(ContractViolation):
        run_simulation([parked(0, 0)], small_config(2))
    with pytest.raises(ContractViolation):
        run_simulation([parked(1500, 0)], small_config(1))


def test_traces_must_reach_the_duration_not_just_the_last_tick():
    cfg = small_config(1, duration=10.5)
    assert cfg.tick_count == 11
    # covers the last tick at t=10 but stops short of the 10.5 s run
    with pytest.raises(ContractViolation):
        run_simulation([parked(500, 500, until=10.2)], cfg)
    assert run_simulation([parked(500, 500, until=10.5)], cfg).ticks == 11


def test_config_validation_and_mapping():
    with pytest.raises(DataError):
        small_config(1, tick=200.0)
    cfg = SimConfig.from_mapping({"simulation_time": "50", "nodes": "4", "min_speed": "1"})
    assert (cfg.duration, cfg.node_count) == (50.0, 4)
    assert cfg.to_mapping()["simulation_time"] == 50.0
    with pytest.raises(UsageError):
        SimConfig.from_mapping({"warp_factor": "9"})
    assert small_config(1, duration=10.5).tick_count == 11


def test_adding_a_node_never_lowers_backoffs():
    cfg = RwpConfig(width=1000.0, height=1000.0, min_speed=1.0, max_speed=5.0, duration=300.0)
    for seed in range(5):
        traces = generate_rwp_traces(cfg, 8, rng_seed=seed)
        totals = [run_simulation(traces[:n], small_config(n, duration=300.0)).total_backoffs
                  for n in range(1, 9)]
        assert all(a <= b for a, b in zip(totals, totals[1:]))


def test_same_inputs_and_seed_give_the_same_report():
    cfg = RwpConfig(width=1000.0, height=1000.0, min_speed=1.0, max_speed=5.0, duration=300.0)
    traces = generate_rwp_traces(cfg, 6, rng_seed=4)
    first = run_simulation(traces, small_config(6, duration=300.0))
    second = run_simulation(generate_rwp_traces(cfg, 6, rng_seed=4), small_config(6, duration=300.0))
    assert first.total_backoffs == second.total_backoffs
    assert np.array_equal(first.per_node_backoffs, second.per_node_backoffs)
    assert np.array_equal(first.grid.backoffs, second.grid.backoffs)
    assert grid_heatmap_export(first.grid) == grid_heatmap_export(second.grid)


def test_identical_trace_sets_compare_equal():
    traces = [parked(500, 500), parked(600, 500), parked(900, 100)]
    comparison = compare_models(traces, traces, small_config(3))
    assert comparison.ratio == 1.0
    assert not comparison.cell_difference.any()
    assert comparison_frame(comparison)["backoff_difference"].eq(0).all()


def test_clustered_nodes_congest_more_than_rwp():
    cfg = RwpConfig(width=2000.0, height=2000.0, min_speed=1.0, max_speed=5.0, duration=500.0)
    meeting_point = [parked(1000, 1000, until=500.0) for _ in range(15)]
    for seed in range(10):
        sim = SimConfig(duration=500.0, width=2000.0, height=2000.0, node_count=15, rng_seed=seed)
        comparison = compare_models(meeting_point, generate_rwp_traces(cfg, 15, rng_seed=seed), sim)
        assert comparison.fmm.total_backoffs == 14 * 500
        assert comparison.ratio > 1.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
