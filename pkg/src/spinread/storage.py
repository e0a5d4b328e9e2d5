"""Trace-set persistence and canonical JSON output.

Two on-disk forms: a compact binary container (.npz plus a .json sidecar
holding the generation provenance) with bit-exact round-trip, and a
columnar CSV (trace_id, t, y, true_state) for interchange. JSON files are
written canonically (sorted keys, fixed separators) so byte-identical
reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import TraceSet

__all__ = [
    "canonical_json",
    "write_json",
    "save_traceset",
    "load_traceset",
    "save_traceset_csv",
    "load_traceset_csv",
]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(canonical_json(obj))


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def save_traceset(traces: TraceSet, path, created_at: str | None = None) -> None:
    """Write the binary container and its JSON sidecar.

    ``created_at`` is an optional provenance timestamp; it defaults to
    None so that reruns of the same generation command produce
    byte-identical files.
    """
    path = Path(path)
    arrays = {"samples": traces.samples, "trace_ids": traces.trace_ids}
    if traces.true_states is not None:
        arrays["true_states"] = traces.true_states
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    sidecar = {
        "n_traces": int(traces.n_traces),
        "trace_length": int(traces.length),
        "has_true_states": traces.true_states is not None,
        "sample_interval": traces.sample_interval,
        "metadata": _jsonable(traces.metadata),
        "created_at": created_at,
    }
    write_json(sidecar, _sidecar_path(path))


def load_traceset(path) -> TraceSet:
    """Read a binary container written by ``save_traceset``."""
    path = Path(path)
    with np.load(path) as data:
        samples = data["samples"]
        trace_ids = data["trace_ids"]
        true_states = data["true_states"] if "true_states" in data.files else None
    sidecar_file = _sidecar_path(path)
    sample_interval = None
    metadata: dict = {}
    if sidecar_file.exists():
        sidecar = json.loads(sidecar_file.read_text())
        sample_interval = sidecar.get("sample_interval")
        metadata = sidecar.get("metadata", {})
    return TraceSet(samples=samples, true_states=true_states,
                    trace_ids=trace_ids, sample_interval=sample_interval,
                    metadata=metadata)


def save_traceset_csv(traces: TraceSet, path) -> None:
    """Write the columnar text form: trace_id, t, y, true_state."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trace_id", "t", "y", "true_state"])
        has_states = traces.true_states is not None
        for i in range(traces.n_traces):
            tid = int(traces.trace_ids[i])
            for t in range(traces.length):
                state = int(traces.true_states[i, t]) if has_states else ""
                writer.writerow([tid, t, repr(float(traces.samples[i, t])), state])


def load_traceset_csv(path) -> TraceSet:
    """Read the columnar text form back into a TraceSet."""
    rows_by_id: dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows_by_id.setdefault(int(row["trace_id"]), []).append(row)
    if not rows_by_id:
        raise ValueError("empty trace file")
    ids = sorted(rows_by_id)
    lengths = {len(v) for v in rows_by_id.values()}
    if len(lengths) != 1:
        raise ValueError("traces have inconsistent lengths")
    t_len = lengths.pop()
    n = len(ids)
    samples = np.empty((n, t_len))
    has_states = all(r["true_state"] != "" for r in rows_by_id[ids[0]])
    states = np.empty((n, t_len), dtype=np.int64) if has_states else None
    for k, tid in enumerate(ids):
        rows = sorted(rows_by_id[tid], key=lambda r: int(r["t"]))
        samples[k] = [float(r["y"]) for r in rows]
        if has_states:
            states[k] = [int(r["true_state"]) for r in rows]
    return TraceSet(samples=samples, true_states=states,
                    trace_ids=np.asarray(ids, dtype=np.int64))
