"""
bench_report_consumer.py

Read benchmark records and visualize how the algorithms compare.

Two modes:
- report: load the CSV the bench producer writes and save three charts
  (total time per algorithm in log scale, stage shares of algorithm 3,
  algorithm 3 against the reactive baseline) plus a trend summary.
- live: tail the JSON-lines file while the bench is running and redraw
  the comparison chart as records arrive.

Example CSV row:
n,K,alg,verdict,t_translate_ms,t_product_ms,t_adv_ms,t_coop_ms,t_extract_ms,t_total_ms,timeout
2,3,3,realizable,41.2,3.9,6.1,0.8,2.4,54.7,False
"""

#####################################
# Import Modules
#####################################

# Import packages from Python Standard Library
import argparse
import json
import os
import pathlib
import sys
import time
from typing import Iterator, Optional

# Import external packages
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

# Import functions from local modules
from producers.bench_producer import COLUMNS, CSV_FILE_NAME, LIVE_FILE_NAME, STAGE_COLUMNS
from utils.utils_config import get_data_dir
from utils.utils_logger import logger

#####################################
# Define Constants
#####################################

COMPARED_ALGORITHMS = ("1", "2", "3")
FAILED_VERDICTS = ("timeout", "error")

COMPARISON_CHART = "bench_comparison.png"
STAGE_CHART = "bench_stage_shares.png"
REACTIVE_CHART = "bench_reactive_overhead.png"

#####################################
# Load Records
#####################################


def _normalize(df: pd.DataFrame) -> pd.DataFrame:
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"bench records are missing columns {missing}")
    df = df.loc[:, list(COLUMNS)].copy()
    df["alg"] = df["alg"].astype(str)
    df["timeout"] = df["timeout"].astype(bool)
    return df


def load_bench_csv(path: pathlib.Path) -> pd.DataFrame:
    """Read the bench CSV; alg stays a string so 'reactive' and '3' mix."""
    df = pd.read_csv(path, dtype={"alg": str})
    logger.info(f"Loaded {len(df)} bench rows from {path}")
    return _normalize(df)


def read_live_records(path: pathlib.Path) -> pd.DataFrame:
    """Read every complete JSON line written so far."""
    rows = []
    with path.open() as f:
        for line in f:
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError:
                logger.error(f"Invalid JSON record: {line.strip()}")
    return _normalize(pd.DataFrame(rows, columns=list(COLUMNS)))


def completed(df: pd.DataFrame) -> pd.DataFrame:
    """Rows that finished with a verdict."""
    return df[~df["verdict"].isin(FAILED_VERDICTS)]


#####################################
# Trend Summary
#####################################


def verdict_disagreements(df: pd.DataFrame) -> list[tuple[int, int]]:
    """(n, K) instances where the completed algorithms 1-3 report different verdicts."""
    done = completed(df[df["alg"].isin(COMPARED_ALGORITHMS)])
    counts = done.groupby(["n", "K"])["verdict"].nunique()
    return [(int(n), int(k)) for (n, k), c in counts.items() if c > 1]


def stage_shares(df: pd.DataFrame, alg: str = "3") -> pd.DataFrame:
    """Per-instance fraction of the total time spent in each stage."""
    rows = completed(df[df["alg"] == alg])
    totals = rows["t_total_ms"].replace(0.0, np.nan)
    shares = pd.DataFrame({stage: rows[column] / totals for stage, column in STAGE_COLUMNS.items()})
    shares.insert(0, "K", rows["K"])
    shares.insert(0, "n", rows["n"])
    return shares.reset_index(drop=True)


def reactive_ratios(df: pd.DataFrame) -> pd.DataFrame:
    """Total time of algorithm 3 over the reactive baseline, per instance."""
    done = completed(df)
    best_effort = done[done["alg"] == "3"].set_index(["n", "K"])["t_total_ms"]
    reactive = done[done["alg"] == "reactive"].set_index(["n", "K"])["t_total_ms"]
    joined = pd.concat({"alg3_ms": best_effort, "reactive_ms": reactive}, axis=1).dropna()
    joined["ratio"] = joined["alg3_ms"] / joined["reactive_ms"]
    return joined.reset_index()


def trend_summary(df: pd.DataFrame) -> dict:
    """Medians and shares the report cares about."""
    done = completed(df)
    medians = done.groupby("alg")["t_total_ms"].median()
    shares = stage_shares(df)
    ratios = reactive_ratios(df)
    summary = {
        "records": int(len(df)),
        "timeouts": int(df["timeout"].sum()),
        "median_total_ms": {alg: float(v) for alg, v in medians.items()},
        "alg3_translate_share": float(shares["translate"].median()) if len(shares) else None,
        "alg3_coop_share": float(shares["cooperative"].median()) if len(shares) else None,
        "reactive_ratio": float(ratios["ratio"].median()) if len(ratios) else None,
        "disagreements": verdict_disagreements(df),
    }
    logger.info(f"Trend summary: {summary}")
    return summary


#####################################
# Charts
#####################################


def draw_comparison(ax: plt.Axes, df: pd.DataFrame) -> None:
    """Total time per algorithm against K, one line per (n, algorithm), log scale."""
    ax.clear()
    done = completed(df[df["alg"].isin(COMPARED_ALGORITHMS)])
    if len(done):
        sns.lineplot(data=done, x="K", y="t_total_ms", hue="alg", style="n", markers=True, ax=ax)
    ax.set_yscale("log")
    ax.set_xlabel("Guaranteed requests K")
    ax.set_ylabel("Total time (ms, log scale)")
    ax.set_title("Counter game: total time per algorithm")
    ax.grid(True, alpha=0.3)


def plot_comparison(df: pd.DataFrame, out: pathlib.Path) -> pathlib.Path:
    fig, ax = plt.subplots(figsize=(8, 5))
    draw_comparison(ax, df)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def plot_stage_shares(df: pd.DataFrame, out: pathlib.Path) -> pathlib.Path:
    """Stacked bars of algorithm 3 stage shares per instance."""
    shares = stage_shares(df)
    fig, ax = plt.subplots(figsize=(10, 5))
    if len(shares):
        labels = [f"n{n}K{k}" for n, k in zip(shares["n"], shares["K"])]
        bottom = np.zeros(len(shares))
        colors = sns.color_palette("deep", len(STAGE_COLUMNS))
        for stage, color in zip(STAGE_COLUMNS, colors):
            values = shares[stage].fillna(0.0).to_numpy()
            ax.bar(labels, values, bottom=bottom, label=stage, color=color)
            bottom += values
        ax.tick_params(axis="x", rotation=90)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("Share of total time")
    ax.set_title("Algorithm 3: relative cost of each stage")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def plot_reactive_overhead(df: pd.DataFrame, out: pathlib.Path) -> pathlib.Path:
    """Scatter of algorithm 3 against the reactive baseline with the y = x line."""
    ratios = reactive_ratios(df)
    fig, ax = plt.subplots(figsize=(6, 6))
    if len(ratios):
        sns.scatterplot(data=ratios, x="reactive_ms", y="alg3_ms", hue="n", ax=ax)
        high = float(max(ratios["reactive_ms"].max(), ratios["alg3_ms"].max()))
        low = float(min(ratios["reactive_ms"].min(), ratios["alg3_ms"].min()))
        ax.plot([low, high], [low, high], linestyle="--", color="gray")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("Reactive synthesis (ms)")
    ax.set_ylabel("Best-effort algorithm 3 (ms)")
    ax.set_title("Best-effort overhead over reactive synthesis")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_report(df: pd.DataFrame, folder: pathlib.Path) -> dict[str, pathlib.Path]:
    """Save all three charts and the trend summary into folder."""
    folder.mkdir(parents=True, exist_ok=True)
    paths = {
        "comparison": plot_comparison(df, folder.joinpath(COMPARISON_CHART)),
        "stages": plot_stage_shares(df, folder.joinpath(STAGE_CHART)),
        "reactive": plot_reactive_overhead(df, folder.joinpath(REACTIVE_CHART)),
    }
    summary_path = folder.joinpath("bench_summary.json")
    summary_path.write_text(json.dumps(trend_summary(df), indent=2) + "\n")
    paths["summary"] = summary_path
    logger.info(f"Report written to {folder}")
    return paths


#####################################
# Live Mode
#####################################


def tail_records(path: pathlib.Path, poll_s: float = 0.5, from_start: bool = True) -> Iterator[Optional[dict]]:
    """
    Yield records as lines are appended to path; yield None while idle.

    Args:
        path (pathlib.Path): JSON-lines file the bench producer writes.
        poll_s (float): delay between polls when no line is available.
        from_start (bool): replay existing lines before waiting for new ones.
    """
    with path.open("r") as file:
        if not from_start:
            file.seek(0, os.SEEK_END)
        while True:
            line = file.readline()
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    logger.error(f"Invalid JSON record: {line.strip()}")
            else:
                yield None
                time.sleep(poll_s)


def watch_live(path: pathlib.Path) -> None:
    """Redraw the comparison chart every time a record arrives."""
    records: list[dict] = []
    fig, ax = plt.subplots(figsize=(8, 5))
    plt.ion()
    try:
        for record in tail_records(path):
            if record is None:
                logger.debug("No new records. Waiting...")
                continue
            records.append(record)
            logger.info(f"Record {len(records)}: n={record['n']} K={record['K']} alg={record['alg']} {record['verdict']}")
            draw_comparison(ax, _normalize(pd.DataFrame(records, columns=list(COLUMNS))))
            fig.tight_layout()
            plt.draw()
            plt.pause(0.01)
    except KeyboardInterrupt:
        logger.info("Consumer interrupted by user.")
    finally:
        plt.ioff()
        plt.show()
        logger.info("Consumer closed.")


#####################################
# Main Function
#####################################


def main() -> None:
    parser = argparse.ArgumentParser(description="Visualize counter-game benchmark records")
    parser.add_argument("--csv", type=pathlib.Path, default=None, help="bench CSV to report on")
    parser.add_argument("--live", action="store_true", help="tail the live JSON-lines file")
    parser.add_argument("--out", type=pathlib.Path, default=None, help="chart folder")
    args = parser.parse_args()

    logger.info("START consumer.")
    data_dir = get_data_dir()
    if args.live:
        live_path = data_dir.joinpath(LIVE_FILE_NAME)
        if not live_path.exists():
            logger.error(f"Live file {live_path} does not exist. Exiting.")
            sys.exit(1)
        watch_live(live_path)
        return

    csv_path = args.csv or data_dir.joinpath(CSV_FILE_NAME)
    if not csv_path.exists():
        logger.error(f"Bench CSV {csv_path} does not exist. Exiting.")
        sys.exit(1)
    df = load_bench_csv(csv_path)
    paths = render_report(df, args.out or data_dir.joinpath("charts"))
    for name, path in paths.items():
        print(f"{name}: {path}")


#####################################
# Run the Consumer
#####################################

if __name__ == "__main__":
    main()
