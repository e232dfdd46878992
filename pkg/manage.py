#!/usr/bin/env python
"""Command-line entry point for simulations, sweeps, presets and validation."""
import sys


def main():
    try:
        from cli.commands import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the simulation packages. Are the requirements "
            "installed and is the repository root on your PYTHONPATH?"
        ) from exc
    run()


if __name__ == "__main__":
    sys.exit(main())
