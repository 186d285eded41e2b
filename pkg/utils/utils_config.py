"""
utils_config.py - getters for the settings read from the environment.

Every setting has a default so the library works without a .env file.
Values in .env (see .env.example) override the defaults.
"""

#####################################
# Import Modules
#####################################

# Import packages from Python Standard Library
import os
import pathlib

# Import external packages
from dotenv import load_dotenv

# Import functions from local modules
from utils.utils_logger import logger

#####################################
# Load Environment Variables
#####################################

load_dotenv()

#####################################
# Default Configurations
#####################################

DEFAULT_NODE_LIMIT = 2_000_000
DEFAULT_STATE_CAP = 1_000_000
DEFAULT_ALPHABET_CAP = 16
DEFAULT_BENCH_TIMEOUT_S = 1000.0
DEFAULT_BENCH_JOBS = 1
DEFAULT_DATA_DIR = "data"

#####################################
# Getter Functions for .env Variables
#####################################


def get_node_limit() -> int:
    """Fetch the BDD live-node cap from environment or use default."""
    limit = int(os.getenv("BESYNTH_NODE_LIMIT", DEFAULT_NODE_LIMIT))
    logger.debug(f"BDD node limit: {limit}")
    return limit


def get_state_cap() -> int:
    """Fetch the explicit DFA state cap from environment or use default."""
    cap = int(os.getenv("BESYNTH_STATE_CAP", DEFAULT_STATE_CAP))
    logger.debug(f"DFA state cap: {cap}")
    return cap


def get_alphabet_cap() -> int:
    """Fetch the maximum number of propositions whose letters are enumerated."""
    cap = int(os.getenv("BESYNTH_ALPHABET_CAP", DEFAULT_ALPHABET_CAP))
    logger.debug(f"Alphabet cap: {cap} propositions")
    return cap


def get_bench_timeout() -> float:
    """Fetch the per-instance benchmark timeout in seconds."""
    timeout = float(os.getenv("BESYNTH_BENCH_TIMEOUT_S", DEFAULT_BENCH_TIMEOUT_S))
    logger.debug(f"Benchmark timeout: {timeout}s")
    return timeout


def get_bench_jobs() -> int:
    """Fetch the number of parallel benchmark worker processes."""
    jobs = max(1, int(os.getenv("BESYNTH_BENCH_JOBS", DEFAULT_BENCH_JOBS)))
    logger.debug(f"Benchmark jobs: {jobs}")
    return jobs


def get_data_dir() -> pathlib.Path:
    """Fetch the output folder for problems and benchmark records."""
    data_dir = pathlib.Path(os.getenv("BESYNTH_DATA_DIR", DEFAULT_DATA_DIR))
    logger.debug(f"Data folder: {data_dir}")
    return data_dir
