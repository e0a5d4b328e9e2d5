"""Trace persistence: binary container, CSV, canonical JSON."""

import numpy as np
import pytest

from spinread.model import TraceSet
from spinread.storage import (
    canonical_json,
    load_traceset,
    load_traceset_csv,
    save_traceset,
    save_traceset_csv,
)


@pytest.fixture
def traces():
    rng = np.random.default_rng(0)
    return TraceSet(
        samples=rng.normal(0.5, 1.0, size=(6, 11)),
        true_states=rng.integers(1, 3, size=(6, 11)),
        metadata={"seed": 7, "note": "fixture"},
    )


class TestBinaryContainer:
    def test_bit_exact_roundtrip(self, tmp_path, traces):
        path = tmp_path / "traces.npz"
        save_traceset(traces, path)
        again = load_traceset(path)
        assert np.array_equal(again.samples, traces.samples)
        assert again.samples.dtype == traces.samples.dtype
        assert np.array_equal(again.true_states, traces.true_states)
        assert np.array_equal(again.trace_ids, traces.trace_ids)
        assert again.metadata["seed"] == 7

    def test_missing_states_roundtrip(self, tmp_path):
        ts = TraceSet(samples=np.ones((2, 3)))
        path = tmp_path / "t.npz"
        save_traceset(ts, path)
        assert load_traceset(path).true_states is None

    def test_sidecar_written_deterministically(self, tmp_path, traces):
        p1, p2 = tmp_path / "a.npz", tmp_path / "b.npz"
        save_traceset(traces, p1)
        save_traceset(traces, p2)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


class TestCsv:
    def test_roundtrip_exact_floats(self, tmp_path, traces):
        path = tmp_path / "traces.csv"
        save_traceset_csv(traces, path)
        again = load_traceset_csv(path)
        assert np.array_equal(again.samples, traces.samples)
        assert np.array_equal(again.true_states, traces.true_states)

    def test_header(self, tmp_path, traces):
        path = tmp_path / "traces.csv"
        save_traceset_csv(traces, path)
        assert path.read_text().splitlines()[0] == "trace_id,t,y,true_state"


class TestCanonicalJson:
    def test_sorted_and_stable(self):
        a = canonical_json({"b": 1, "a": np.float64(0.25)})
        b = canonical_json({"a": 0.25, "b": 1})
        assert a == b
        assert a.index('"a"') < a.index('"b"')

    def test_numpy_types_converted(self):
        text = canonical_json({"x": np.int64(3), "y": np.bool_(True),
                               "z": np.arange(2.0)})
        assert '"x": 3' in text
        assert '"y": true' in text
