# File: src/mobility/trace_io.py

"""
Trace export and import: ns-2 movement scenarios and a plain CSV
(node, t, x, y, speed). Floats are written with repr so values round-trip.
"""

import io
import re
from typing import Dict, List, Optional, Sequence

import pandas as pd

from src.analysis.geo import FieldPoint
from src.mobility.traces import Trace, Waypoint, leg_duration
from src.utils.errors import ContractViolation, DataError

TRACE_CSV_COLUMNS = ["node", "t", "x", "y", "speed"]

_NUMBER = r"([-+0-9.eEinfa]+)"
_SET_PATTERN = re.compile(r'^\$node_\((\d+)\) set ([XYZ])_ ' + _NUMBER + r'$')
_SETDEST_PATTERN = re.compile(
    r'^\$ns_ at ' + _NUMBER + r' "\$node_\((\d+)\) setdest ' + _NUMBER + ' ' + _NUMBER + ' ' + _NUMBER + r'"$'
)


def check_bounds(traces: Sequence[Trace], width: float, height: float) -> None:
    for node, trace in enumerate(traces):
        if not trace:
            raise ContractViolation(f"Node {node} has an empty trace")
        for waypoint in trace:
            if not (0.0 <= waypoint.x <= width and 0.0 <= waypoint.y <= height):
                raise ContractViolation(
                    f"Node {node} waypoint ({waypoint.x}, {waypoint.y}) at t={waypoint.t} "
                    f"lies outside the {width} x {height} field"
                )


def format_ns2(traces: Sequence[Trace], width: float, height: float) -> str:
    """
    Initial `set X_/Y_/Z_` lines for every node, then one `setdest` line per
    moving leg, node by node.
    """
    if not traces:
        raise DataError("No traces to export")
    check_bounds(traces, width, height)
    lines = []
    for node, trace in enumerate(traces):
        start = trace[0]
        lines.append(f"$node_({node}) set X_ {start.x!r}")
        lines.append(f"$node_({node}) set Y_ {start.y!r}")
        lines.append(f"$node_({node}) set Z_ 0.0")
    for node, trace in enumerate(traces):
        for waypoint, following in zip(trace[:-1], trace[1:]):
            if waypoint.speed_to_next > 0:
                lines.append(
                    f'$ns_ at {waypoint.t!r} "$node_({node}) setdest '
                    f'{following.x!r} {following.y!r} {waypoint.speed_to_next!r}"'
                )
    return "\n".join(lines) + "\n"


def parse_ns2(text: str, duration: Optional[float] = None) -> List[Trace]:
    """
    Rebuild waypoint lists; gaps between an arrival and the next setdest
    become waits. An ns-2 node holds its last position forever, so with a
    duration a final wait is added up to that time.
    """
    starts: Dict[int, Dict[str, float]] = {}
    legs: Dict[int, list] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        match = _SET_PATTERN.match(line)
        if match:
            starts.setdefault(int(match.group(1)), {})[match.group(2)] = float(match.group(3))
            continue
        match = _SETDEST_PATTERN.match(line)
        if match:
            t, node, x, y, speed = match.groups()
            legs.setdefault(int(node), []).append((float(t), float(x), float(y), float(speed)))
            continue
        raise DataError(f"Unrecognised ns-2 line {number}: {line!r}")

    if sorted(starts) != list(range(len(starts))):
        raise DataError("ns-2 nodes must be numbered 0..n-1 with initial positions")
    traces = []
    for node in range(len(starts)):
        here = FieldPoint(starts[node]["X"], starts[node]["Y"])
        t = 0.0
        trace: Trace = []
        for leg_t, x, y, speed in sorted(legs.get(node, []), key=lambda leg: leg[0]):
            if leg_t > t:
                trace.append(Waypoint(t, here, 0.0))
            there = FieldPoint(x, y)
            trace.append(Waypoint(leg_t, here, speed))
            t = leg_t + leg_duration(here, there, speed)
            here = there
        trace.append(Waypoint(t, here, 0.0))
        if duration is not None and t < duration:
            trace.append(Waypoint(float(duration), here, 0.0))
        traces.append(trace)
    return traces


def trace_frame(traces: Sequence[Trace]) -> pd.DataFrame:
    rows = [
        {"node": node, "t": w.t, "x": w.x, "y": w.y, "speed": w.speed_to_next}
        for node, trace in enumerate(traces) for w in trace
    ]
    return pd.DataFrame(rows, columns=TRACE_CSV_COLUMNS)


def format_trace_csv(traces: Sequence[Trace], width: float, height: float) -> str:
    if not traces:
        raise DataError("No traces to export")
    check_bounds(traces, width, height)
    buffer = io.StringIO()
    trace_frame(traces).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def parse_trace_csv(text: str) -> List[Trace]:
    frame = pd.read_csv(io.StringIO(text), float_precision="round_trip")
    missing = [column for column in TRACE_CSV_COLUMNS if column not in frame.columns]
    if missing:
        raise DataError(f"Trace CSV lacks columns: {', '.join(missing)}")
    nodes = sorted(frame["node"].unique())
    if nodes != list(range(len(nodes))):
        raise DataError("Trace CSV nodes must be numbered 0..n-1")
    traces = []
    for node in nodes:
        rows = frame[frame["node"] == node]
        traces.append([
            Waypoint(float(t), FieldPoint(float(x), float(y)), float(speed))
            for t, x, y, speed in zip(rows["t"], rows["x"], rows["y"], rows["speed"])
        ])
    return traces


def format_traces(traces: Sequence[Trace], fmt: str, width: float, height: float) -> str:
    if fmt == "ns2":
        return format_ns2(traces, width, height)
    if fmt == "csv":
        return format_trace_csv(traces, width, height)
    raise DataError(f"Unknown trace format {fmt!r}")


def parse_traces(text: str, duration: Optional[float] = None) -> List[Trace]:
    """Sniff the format: CSV traces start with their header line."""
    first = text.lstrip().split("\n", 1)[0]
    if first.replace(" ", "") == ",".join(TRACE_CSV_COLUMNS):
        return parse_trace_csv(text)
    return parse_ns2(text, duration)
