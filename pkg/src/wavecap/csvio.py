"""CSV serialization for weights and trial records.

Plain text, diffable, stable column order; floats use repr so values
round-trip exactly and repeated runs are byte-identical.  Every file
starts with a `# wavecap-<kind> format_version=N` line.
"""

from __future__ import annotations

import csv
import io
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .propagate import ComponentWeights
from .reduction import TrialRecord

FORMAT_VERSION = 1

WEIGHTS_COLUMNS = ("time", "p_no_capture", "p_capture", "current")
TRIALS_COLUMNS = ("seed", "rule", "collapse_time", "chosen",
                  "p_capture_at_collapse", "current_at_collapse", "flags")


def _header(kind: str) -> str:
    return f"# wavecap-{kind} format_version={FORMAT_VERSION}\n"


def _num(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def weights_to_csv(weights: ComponentWeights) -> str:
    out = io.StringIO()
    out.write(_header("weights"))
    out.write(",".join(WEIGHTS_COLUMNS) + "\n")
    for i in range(len(weights.times)):
        out.write(f"{weights.times[i]!r},{weights.p_no_capture[i]!r},"
                  f"{weights.p_capture[i]!r},{weights.current[i]!r}\n")
    return out.getvalue()


def weights_from_csv(text: str) -> ComponentWeights:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# wavecap-weights"):
        raise ValidationError("not a wavecap weights CSV (missing header line)")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if tuple(header or ()) != WEIGHTS_COLUMNS:
        raise ValidationError(f"unexpected weights columns: {header}")
    rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValidationError("weights CSV has no samples")
    data = np.array(rows)
    return ComponentWeights(times=data[:, 0], p_no_capture=data[:, 1],
                            p_capture=data[:, 2], current=data[:, 3])


def trials_to_csv(records: Sequence[TrialRecord]) -> str:
    out = io.StringIO()
    out.write(_header("trials"))
    out.write(",".join(TRIALS_COLUMNS) + "\n")
    for r in records:
        flags = "|".join(sorted(r.flags))
        out.write(f"{r.seed},{r.rule},{_num(r.collapse_time)},"
                  f"{r.chosen_component},{_num(r.p_capture_at_collapse)},"
                  f"{_num(r.current_at_collapse)},{flags}\n")
    return out.getvalue()


def trials_from_csv(text: str) -> list[TrialRecord]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# wavecap-trials"):
        raise ValidationError("not a wavecap trials CSV (missing header line)")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    if tuple(header or ()) != TRIALS_COLUMNS:
        raise ValidationError(f"unexpected trials columns: {header}")
    records = []
    for row in reader:
        if not row:
            continue
        seed, rule, t_c, chosen, p1, cur, flags = row
        records.append(TrialRecord(
            rule=rule, seed=int(seed),
            collapse_time=float(t_c) if t_c else None,
            chosen_component=chosen,
            p_capture_at_collapse=float(p1) if p1 else None,
            current_at_collapse=float(cur) if cur else None,
            flags=frozenset(flags.split("|")) if flags else frozenset()))
    return records


def snapshots_to_csv(snapshots, grid) -> str:
    """Wide layout: one row per snapshot time, one column per grid point."""
    out = io.StringIO()
    out.write(_header("snapshots"))
    coords = ",".join(repr(float(x)) for x in grid.coordinates())
    out.write("time," + coords + "\n")
    for t, density in snapshots:
        out.write(repr(float(t)) + "," +
                  ",".join(repr(float(d)) for d in density) + "\n")
    return out.getvalue()
