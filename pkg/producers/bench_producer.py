"""
bench_producer.py

Run the counter-game benchmark grid and stream one record per instance.

Each (n, K, algorithm) instance runs in its own worker process with its
own decision-diagram manager, so a per-instance timeout can stop it
without touching the others. Finished records are appended to a
JSON-lines live file as they arrive and the whole grid is written to a
CSV file with a fixed column order at the end.

Example live record
{
    "n": 2, "K": 3, "alg": "3", "verdict": "realizable",
    "t_translate_ms": 41.2, "t_product_ms": 3.9, "t_adv_ms": 6.1,
    "t_coop_ms": 0.8, "t_extract_ms": 2.4, "t_total_ms": 54.7,
    "timeout": false, "error": null
}
"""

#####################################
# Import Modules
#####################################

# Import packages from Python Standard Library
import argparse
import json
import multiprocessing
import pathlib
import queue
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

# Import external packages
import pandas as pd

# Import functions from local modules
from besynth.besteffort import ALGORITHMS, synthesize
from producers.counter_game_producer import CounterGameSpec, counter_grid, gen_counter_game
from utils.utils_config import get_bench_jobs, get_bench_timeout, get_data_dir
from utils.utils_logger import logger

#####################################
# Define Constants
#####################################

COLUMNS = (
    "n",
    "K",
    "alg",
    "verdict",
    "t_translate_ms",
    "t_product_ms",
    "t_adv_ms",
    "t_coop_ms",
    "t_extract_ms",
    "t_total_ms",
    "timeout",
)

STAGE_COLUMNS = {
    "translate": "t_translate_ms",
    "product": "t_product_ms",
    "adversarial": "t_adv_ms",
    "cooperative": "t_coop_ms",
    "extract": "t_extract_ms",
}

TIMEOUT = "timeout"
ERROR = "error"

LIVE_FILE_NAME = "bench_live.jsonl"
CSV_FILE_NAME = "bench.csv"

#####################################
# Define Bench Record
#####################################


@dataclass
class BenchRecord:
    """Timings and verdict of one (n, K, algorithm) run."""

    n: int
    K: int
    alg: str
    verdict: str
    t_translate_ms: float = 0.0
    t_product_ms: float = 0.0
    t_adv_ms: float = 0.0
    t_coop_ms: float = 0.0
    t_extract_ms: float = 0.0
    t_total_ms: float = 0.0
    timeout: bool = False
    error: Optional[str] = None

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.n, self.K, ALGORITHMS.index(self.alg))

    def to_row(self) -> dict:
        record = asdict(self)
        return {column: record[column] for column in COLUMNS}


#####################################
# Worker Process
#####################################


def _instance_worker(spec: CounterGameSpec, algorithm: str, results: multiprocessing.Queue) -> None:
    """Generate and solve one instance; put ('ok', payload) or ('error', text)."""
    try:
        problem = gen_counter_game(spec)
        start = time.perf_counter()
        strategy = synthesize(problem, algorithm)
        total_ms = (time.perf_counter() - start) * 1000.0
        results.put(("ok", {
            "verdict": strategy.verdict,
            "timings": strategy.timings_by_stage_ms,
            "total_ms": total_ms,
        }))
    except Exception as e:
        results.put((ERROR, f"{type(e).__name__}: {e}"))


def run_instance(spec: CounterGameSpec, algorithm: str, timeout_s: float) -> BenchRecord:
    """Run one instance in a fresh process, stopping it after timeout_s seconds."""
    results = multiprocessing.Queue()
    process = multiprocessing.Process(target=_instance_worker, args=(spec, algorithm, results), daemon=True)
    start = time.perf_counter()
    process.start()
    try:
        status, payload = results.get(timeout=timeout_s)
    except queue.Empty:
        status, payload = TIMEOUT, None
    finally:
        process.join(timeout=1.0)
        if process.is_alive():
            process.terminate()
            process.join()

    if status == TIMEOUT:
        elapsed = (time.perf_counter() - start) * 1000.0
        logger.warning(f"{spec.stem} alg {algorithm} timed out after {timeout_s}s")
        return BenchRecord(spec.n, spec.K, algorithm, TIMEOUT, t_total_ms=elapsed, timeout=True)
    if status == ERROR:
        logger.error(f"{spec.stem} alg {algorithm} failed: {payload}")
        return BenchRecord(spec.n, spec.K, algorithm, ERROR, error=payload)

    record = BenchRecord(spec.n, spec.K, algorithm, payload["verdict"], t_total_ms=payload["total_ms"])
    for stage, column in STAGE_COLUMNS.items():
        setattr(record, column, payload["timings"].get(stage, 0.0))
    return record


#####################################
# Grid Runner
#####################################


def _append_live(live_path: Optional[pathlib.Path], record: BenchRecord) -> None:
    if live_path is None:
        return
    with live_path.open("a") as f:
        f.write(json.dumps(asdict(record)) + "\n")


def write_csv(records: Iterable[BenchRecord], csv_path: pathlib.Path) -> pd.DataFrame:
    """Write records with the fixed column order and return the frame."""
    df = pd.DataFrame([r.to_row() for r in records], columns=list(COLUMNS))
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(csv_path, index=False)
    logger.info(f"Wrote {len(df)} bench rows to {csv_path}")
    return df


def run_bench(
    grid: Iterable[CounterGameSpec],
    algorithms: Sequence[str] = ("1", "2", "3"),
    timeout_s: Optional[float] = None,
    jobs: Optional[int] = None,
    csv_path: Optional[pathlib.Path] = None,
    live_path: Optional[pathlib.Path] = None,
) -> list[BenchRecord]:
    """
    Run every algorithm on every spec of the grid.

    Args:
        grid: counter-game specs.
        algorithms: subset of 1, 2, 3 and reactive.
        timeout_s: per-instance budget; BESYNTH_BENCH_TIMEOUT_S by default.
        jobs: concurrent worker processes; BESYNTH_BENCH_JOBS by default.
        csv_path: CSV output, skipped when None.
        live_path: JSON-lines stream, appended to as records finish.

    Returns:
        list[BenchRecord]: sorted by n, K and algorithm.
    """
    algorithms = [str(a) for a in algorithms]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms {unknown}, expected a subset of {ALGORITHMS}")
    timeout_s = get_bench_timeout() if timeout_s is None else timeout_s
    jobs = get_bench_jobs() if jobs is None else max(1, jobs)
    instances = [(spec, alg) for spec in grid for alg in algorithms]
    if live_path is not None:
        live_path.parent.mkdir(parents=True, exist_ok=True)

    logger.info(f"Running {len(instances)} bench instances with {jobs} workers, timeout {timeout_s}s")
    records: list[BenchRecord] = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_instance, spec, alg, timeout_s) for spec, alg in instances]
        for future in as_completed(futures):
            record = future.result()
            records.append(record)
            _append_live(live_path, record)
            logger.info(f"n={record.n} K={record.K} alg={record.alg}: {record.verdict} in {record.t_total_ms:.1f} ms")

    records.sort(key=lambda r: r.key)
    if csv_path is not None:
        write_csv(records, csv_path)
    return records


#####################################
# Main Function
#####################################


def main() -> None:
    parser = argparse.ArgumentParser(description="Run the counter-game benchmark grid")
    parser.add_argument("--n-max", type=int, default=3)
    parser.add_argument("--k-max", type=int, default=5)
    parser.add_argument("--algs", default="1,2,3", help="comma-separated algorithms")
    parser.add_argument("--timeout", type=float, default=None, help="seconds per instance")
    parser.add_argument("--jobs", type=int, default=None, help="parallel workers")
    args = parser.parse_args()

    logger.info("START bench producer...")
    data_dir = get_data_dir()
    try:
        run_bench(
            counter_grid(args.n_max, args.k_max),
            args.algs.split(","),
            timeout_s=args.timeout,
            jobs=args.jobs,
            csv_path=data_dir.joinpath(CSV_FILE_NAME),
            live_path=data_dir.joinpath(LIVE_FILE_NAME),
        )
    except KeyboardInterrupt:
        logger.warning("Producer interrupted by user.")
    finally:
        logger.info("Producer shutting down.")


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    main()
