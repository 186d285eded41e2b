"""Run the besynth command line with python -m besynth."""

from besynth.cli import main

if __name__ == "__main__":
    main()
