import json

import pandas as pd
import pytest

from consumers.bench_report_consumer import load_bench_csv, trend_summary
from producers import bench_producer
from producers.bench_producer import COLUMNS, BenchRecord, run_bench
from producers.counter_game_producer import CounterGameSpec, counter_grid


class TestBenchRecord:
    def test_row_has_fixed_columns(self):
        record = BenchRecord(1, 2, "3", "realizable", t_total_ms=4.5, error="ignored")
        row = record.to_row()
        assert tuple(row) == COLUMNS
        assert row["t_total_ms"] == 4.5

    def test_key_orders_algorithms(self):
        records = [BenchRecord(1, 1, alg, "x") for alg in ("reactive", "3", "1")]
        assert [r.alg for r in sorted(records, key=lambda r: r.key)] == ["1", "3", "reactive"]


class TestRunBench:
    def test_small_grid(self, tmp_path):
        csv_path = tmp_path / "bench.csv"
        live_path = tmp_path / "live" / "bench_live.jsonl"
        grid = [CounterGameSpec(1, 1), CounterGameSpec(2, 1)]
        records = run_bench(grid, ("1", "2", "3"), timeout_s=60, jobs=2, csv_path=csv_path, live_path=live_path)

        assert [(r.n, r.K, r.alg) for r in records] == [
            (1, 1, "1"), (1, 1, "2"), (1, 1, "3"), (2, 1, "1"), (2, 1, "2"), (2, 1, "3"),
        ]
        assert [r.verdict for r in records] == ["realizable"] * 3 + ["best-effort-only"] * 3
        assert not any(r.timeout for r in records)

        df = pd.read_csv(csv_path)
        assert tuple(df.columns) == COLUMNS
        assert len(df) == 6
        assert (df["t_total_ms"] > 0).all()

        live = [json.loads(line) for line in live_path.read_text().splitlines()]
        assert len(live) == 6
        assert {(r["n"], r["alg"]) for r in live} == {(n, a) for n in (1, 2) for a in ("1", "2", "3")}

    def test_timeout_record(self):
        record = bench_producer.run_instance(CounterGameSpec(4, 6), "1", timeout_s=0.001)
        assert record.timeout
        assert record.verdict == bench_producer.TIMEOUT
        assert record.t_total_ms > 0

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            run_bench([CounterGameSpec(1, 1)], ("4",))

    def test_empty_csv_keeps_columns(self, tmp_path):
        df = bench_producer.write_csv([], tmp_path / "out" / "bench.csv")
        assert tuple(df.columns) == COLUMNS
        assert tuple(pd.read_csv(tmp_path / "out" / "bench.csv").columns) == COLUMNS

    @pytest.mark.slow
    def test_eighteen_row_grid(self, tmp_path):
        records = run_bench(counter_grid(2, 3), timeout_s=120, jobs=2, csv_path=tmp_path / "bench.csv")
        df = pd.read_csv(tmp_path / "bench.csv")
        assert len(df) == 18
        for spec in counter_grid(2, 3):
            rows = df[(df["n"] == spec.n) & (df["K"] == spec.K)]
            expected = "realizable" if spec.realizable else "best-effort-only"
            assert set(rows["verdict"]) == {expected}
        assert len(records) == 18


@pytest.mark.slow
class TestTrends:
    @pytest.fixture(scope="class")
    def summary(self, tmp_path_factory):
        csv_path = tmp_path_factory.mktemp("trend") / "bench.csv"
        run_bench(counter_grid(4, 6, n_min=4), ("1", "3", "reactive"), timeout_s=600, jobs=1, csv_path=csv_path)
        return trend_summary(load_bench_csv(csv_path))

    def test_compositional_beats_monolithic(self, summary):
        medians = summary["median_total_ms"]
        assert medians["3"] < medians["1"]

    def test_cooperative_stage_is_cheap(self, summary):
        assert summary["alg3_coop_share"] < 0.2

    def test_overhead_over_reactive(self, summary):
        assert summary["reactive_ratio"] < 2.0
