"""
Logger Setup Script
File: utils/utils_logger.py

Logging for synthesis runs, fixpoint iterations and benchmark progress.

Features:
- One rotating file sink shared by the CLI, the bench workers and the report consumer.
- Folder and level come from BESYNTH_LOG_DIR and BESYNTH_LOG_LEVEL.
- Each line carries the process id so records from parallel bench workers can be told apart.
"""

# Imports from Python Standard Library
import os
import pathlib

# Imports from external packages
from dotenv import load_dotenv
from loguru import logger

load_dotenv()

CURRENT_SCRIPT = pathlib.Path(__file__).stem

LOG_FOLDER: pathlib.Path = pathlib.Path(os.getenv("BESYNTH_LOG_DIR", "logs"))
LOG_FILE: pathlib.Path = LOG_FOLDER.joinpath("besynth_log.log")

# File sink only; the console keeps the loguru default
LOG_LEVEL: str = os.getenv("BESYNTH_LOG_LEVEL", "INFO").upper()

# Benchmark sweeps log every instance
LOG_ROTATION: str = "10 MB"
LOG_FORMAT: str = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | pid={process} | "
    "{name}:{function}:{line} - {message}"
)

try:
    LOG_FOLDER.mkdir(parents=True, exist_ok=True)
except OSError as e:
    logger.error(f"Error creating log folder {LOG_FOLDER}: {e}")

try:
    # enqueue: bench workers are separate processes writing the same file
    logger.add(LOG_FILE, level=LOG_LEVEL, format=LOG_FORMAT, rotation=LOG_ROTATION, enqueue=True)
    logger.debug(f"Logging to file: {LOG_FILE} at level {LOG_LEVEL}")
except Exception as e:
    logger.error(f"Error configuring logger to write to file: {e}")


def get_log_file_path() -> pathlib.Path:
    """Return the path to the log file."""
    return LOG_FILE


def main() -> None:
    """Show where the log output goes."""
    logger.info(f"STARTING {CURRENT_SCRIPT}.py")
    logger.info(f"File sink level: {LOG_LEVEL}, rotation: {LOG_ROTATION}")
    logger.info(f"View the log output at {LOG_FILE}")
    logger.info(f"EXITING {CURRENT_SCRIPT}.py.")


if __name__ == "__main__":
    main()
