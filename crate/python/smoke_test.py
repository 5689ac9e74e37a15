"""Smoke test for the canet extension module.

Build and install it first:  pip install --no-build-isolation ./crates/py
Then run:  python python/smoke_test.py   (or pytest python/)
"""

import json
import tempfile
from pathlib import Path

import canet


def test_fixture_numbers():
    ds = canet.Dataset.fixture()
    assert ds.n_events == 736
    e = ds.engagement()
    assert (e["regular_count"], e["mention_count"], e["retweet_count"]) == (31, 210, 495)
    assert abs(e["ct_index"] - 0.9579) < 5e-5
    assert ds.exposure() == 459018

    stats = ds.graph_stats()
    assert (stats["node_count"], stats["edge_count"], stats["diameter"]) == (242, 571, 6)
    roles = ds.roles()
    assert len(roles) == 242

    span = ds.lifespan(365)
    assert len(span["dormancy_intervals"]) == 1, span
    assert sum(b["count"] for b in ds.timeline("month")) == 736


def test_text_and_terms():
    assert canet.preprocess_bio("Amo minha VIDA! kkk #mãe @fulano http://x.co") == ["amo", "vida"]
    terms = canet.Dataset.fixture().term_map({"seed": 3})
    assert terms["term_count"] > 0


def test_report_round_trip():
    ds = canet.Dataset.fixture()
    cfg = {"seed": 5, "layout": {"iterations": 20}, "term_layout": {"iterations": 20}}
    doc = ds.report(cfg)
    assert doc["seed"] == 5
    with tempfile.TemporaryDirectory() as d:
        manifest = ds.write_report(d, cfg)
        names = [f["name"] for f in manifest["files"]]
        assert "report.json" in names
        assert json.loads((Path(d) / "report.json").read_text())["seed"] == 5
    positions = ds.layout(cfg)
    assert len(positions) == 242


def test_errors_raise():
    try:
        canet.Dataset.load("/nonexistent/events.jsonl", "/nonexistent/paper.json")
    except canet.CanetError:
        pass
    else:
        raise AssertionError("missing files must raise")
    try:
        canet.Dataset.fixture().report({"no_such_key": 1})
    except canet.CanetError:
        pass
    else:
        raise AssertionError("unknown config keys must raise")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok {name}")
