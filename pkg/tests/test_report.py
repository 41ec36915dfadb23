import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from lastpassage.report import (
    FormatError,
    ReferenceTable,
    RunManifest,
    compare_to_reference,
    format_float,
    load_reference_table,
    manifest_path,
    read_results,
    write_results,
)

finite = st.floats(allow_nan=False, allow_infinity=False)
rows_strategy = st.lists(
    st.fixed_dictionaries({"n": st.integers(-2**62, 2**62), "x": finite, "ok": st.booleans(),
                           "tag": st.text(alphabet="abcxyz_-", min_size=1, max_size=8)}),
    max_size=20)


@given(rows_strategy, st.sampled_from(["csv", "jsonl"]))
@settings(max_examples=60, deadline=None)
def test_round_trip_exact(tmp_path_factory, rows, fmt):
    path = tmp_path_factory.mktemp("rt") / f"r.{fmt}"
    write_results(rows, fmt, path, columns=["n", "x", "ok", "tag"])
    back = read_results(path)
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        assert a["n"] == b["n"] and a["ok"] == b["ok"] and a["tag"] == b["tag"]
        assert float(b["x"]) == a["x"]


def test_special_values_round_trip(tmp_path):
    rows = [{"v": math.inf}, {"v": -math.inf}, {"v": math.nan}, {"v": 0.1}]
    for fmt in ("csv", "jsonl"):
        p = write_results(rows, fmt, tmp_path / f"s.{fmt}")
        back = [r["v"] for r in read_results(p)]
        assert back[0] == math.inf and back[1] == -math.inf and math.isnan(back[2])
        assert back[3] == 0.1
    assert format_float(0.1) == "0.10000000000000001"


def test_empty_and_format_conventions(tmp_path):
    p = write_results([], "csv", tmp_path / "e.csv", columns=["a", "b"])
    assert p.read_bytes() == b"a,b\n"
    assert read_results(p) == []
    p = write_results([{"a": 1, "b": 2.5}] * 3, "csv", tmp_path / "x.csv")
    assert p.read_bytes() == b"a,b\n1,2.5\n1,2.5\n1,2.5\n"
    p = write_results([{"a": 1}] * 7, "jsonl", tmp_path / "x.jsonl")
    lines = p.read_text().splitlines()
    assert len(lines) == 7 and json.loads(lines[0]) == {"a": 1}
    with pytest.raises(FormatError):
        write_results([{"a": 1}], "xml", tmp_path / "x.xml")
    with pytest.raises(FormatError):
        write_results([{"a": 1}, {"b": 2}], "csv", tmp_path / "y.csv")


def test_manifest_round_trip(tmp_path):
    m = RunManifest(command=["sweep", "--n", "5"], base_seed=3, gamma=1.5, distribution="geom:0.5",
                    budgets={"cell_budget": 10}, outputs=["out.csv"], notes=["hello"])
    path = m.write(manifest_path(tmp_path / "out.csv"))
    assert path.name == "out.csv.manifest.json"
    back = RunManifest.read(path)
    assert back == m
    assert set(back.conventions) == {"bracket", "origin", "geometric_pmf", "exponential_rounding"}


def normal_table():
    x = np.linspace(-6, 6, 241)
    return ReferenceTable(x, stats.norm.cdf(x))


def test_reference_table_validation(tmp_path):
    with pytest.raises(FormatError):
        ReferenceTable([0.0, 0.0], [0.1, 0.2])
    with pytest.raises(FormatError):
        ReferenceTable([0.0, 1.0], [0.5, 0.4])
    with pytest.raises(FormatError):
        ReferenceTable([0.0, 1.0], [0.5, 1.2])
    bad = tmp_path / "bad.csv"
    bad.write_text("s,F\n0,0.5\n")
    with pytest.raises(FormatError):
        load_reference_table(bad)
    good = tmp_path / "good.csv"
    good.write_text("x,F2\n-1,0.1\n0,0.5\n1,0.9\n")
    t = load_reference_table(good)
    assert t.cdf(0.5) == pytest.approx(0.7)
    assert t.cdf(-5) == 0.0 and t.cdf(5) == 1.0
    assert t.quantile(0.7) == pytest.approx(0.5)


def test_self_consistency_by_inverse_transform():
    table = normal_table()
    u = np.random.default_rng(3).uniform(size=5000)
    samples = table.quantile(u)
    cmp = compare_to_reference(samples, table)
    assert cmp.ks_statistic < 1.358 / math.sqrt(5000)
    assert cmp.covered
    assert len(cmp.rows) == 200


def test_constant_samples():
    table = normal_table()
    cmp = compare_to_reference(np.full(500, 0.3), table)
    f = float(table.cdf(0.3))
    assert cmp.ks_statistic == pytest.approx(max(f, 1 - f), abs=1e-9)


def test_out_of_range_samples_warn():
    table = normal_table()
    samples = np.concatenate([np.zeros(200), [10.0]])
    with pytest.warns(RuntimeWarning):
        cmp = compare_to_reference(samples, table)
    assert cmp.above_table == 1 and not cmp.covered
    with pytest.raises(ValueError):
        compare_to_reference(np.zeros(10), table)
