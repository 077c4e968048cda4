#!/usr/bin/env python3
"""Print the elaborated context and the grid rendering of a diagram file.

Usage: python3 scripts/render_diagram.py <file.diag> [more.diag ...]
"""

import sys

from fincat.cli import run

if __name__ == "__main__":
    paths = sys.argv[1:]
    if not paths:
        print(__doc__.strip(), file=sys.stderr)
        sys.exit(2)
    status = 0
    for path in paths:
        print(f"== {path} ==")
        status = max(status, run(["context", path]))
        print()
        status = max(status, run(["context", path, "--format", "graph"]))
        print()
        status = max(status, run(["stages", path]))
    sys.exit(status)
