import csv
import io

import pytest

from tarcfp import bench
from tarcfp.bench import NetSpec, growth_shape, run_bench, suite_specs, summary, to_csv, to_table


def test_suite_specs():
    assert [s.net_id for s in suite_specs("testA", 2, 4)] == ["breadth(2)", "breadth(3)", "breadth(4)"]
    assert len(suite_specs("testA")) == 13
    assert [s.args for s in suite_specs("testB", 1, 3, branches=5)] == [(5, 1), (5, 2), (5, 3)]
    corpus = suite_specs("corpus", 0, 9, bounded=True)
    assert len(corpus) == 10 and corpus[0].generator == "random-bounded"
    assert len(suite_specs("corpus")) == 500
    with pytest.raises(ValueError):
        suite_specs("testC")


def test_unknown_engine():
    with pytest.raises(ValueError):
        run_bench(suite_specs("testA", 2, 2), ("rg", "magic"))


def test_testa_rows_and_csv():
    recs = run_bench(suite_specs("testA", 2, 12), ("rg", "general", "improved"))
    assert len(recs) == 11 * 3
    rows = list(csv.reader(io.StringIO(to_csv(recs))))
    assert tuple(rows[0]) == bench.CSV_COLUMNS
    assert len(rows) == 1 + 33
    assert all(r.status == "ok" and r.agrees_with_rg for r in recs)
    improved = [r for r in recs if r.engine == "improved"]
    assert all(r.cut_enum_calls == 0 for r in improved)
    assert [r.cfp_events for r in improved] == [n + 2 for n in range(2, 13)]
    assert [r.rg_nodes for r in improved] == [2 ** n + 2 for n in range(2, 13)]
    assert "0 disagreements" in summary(recs)
    assert to_table(recs).splitlines()[0].startswith("net")


def test_growth_shape():
    recs = run_bench(suite_specs("testB", 1, 5), ("rg", "improved"))
    shape = growth_shape(recs)
    # events grow linearly in depth, exactly
    ev = shape["cfp_events"]
    assert ev.slope == pytest.approx(5.0) and ev.r2 == pytest.approx(1.0)
    # log2 of (d+1)^5 + 2 is close to linear in log(d+1), so only check monotone growth
    nodes = [r.rg_nodes for r in recs if r.engine == "rg"]
    assert nodes == sorted(nodes) and nodes[-1] == 6 ** 5 + 2
    assert shape["log2_rg_nodes"].slope > 0


def test_rg_cap_rows():
    recs = run_bench([NetSpec("breadth", (8,))], ("rg", "improved"), state_cap=50)
    rg, imp = recs
    assert rg.status == "cap" and rg.rg_capped and rg.time_ms is None
    assert imp.status == "ok" and imp.agrees_with_rg is None


def test_refused_on_bounded():
    recs = run_bench(suite_specs("corpus", 0, 1, bounded=True), ("rg", "improved", "bounded-improved"))
    assert {r.status for r in recs if r.engine == "improved"} == {"refused"}
    assert all(r.agrees_with_rg for r in recs if r.engine == "bounded-improved")


def test_deterministic_and_parallel():
    specs = suite_specs("corpus", 0, 5)
    a = run_bench(specs, ("rg", "general", "improved"))
    b = run_bench(specs, ("rg", "general", "improved"), jobs=2)
    assert [r.stable() for r in a] == [r.stable() for r in b]


def test_disagreement_is_reported():
    rec = bench.BenchRecord("x", "g", "", 1, 1, "general", agrees_with_rg=False)
    assert "1 disagreements" in summary([rec])
    assert bench.disagreements([rec]) == [rec]
