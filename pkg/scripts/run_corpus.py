#!/usr/bin/env python3
"""Run every check in the bundled fixture corpus and exit with its status.

Equivalent to ``fincat examples``; point FINCAT_CORPUS at another directory
to check a different corpus.
"""

import sys

from fincat.cli import run

if __name__ == "__main__":
    sys.exit(run(["examples", *sys.argv[1:]]))
