"""Module entry point: ``python -m fincat <command> ...``."""

from .cli import main

main()
