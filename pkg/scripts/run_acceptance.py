#!/usr/bin/env python3
"""Run the full acceptance suite and print one line per criterion."""

import sys

from stochgame import acceptance


def main() -> int:
    failed = 0
    for criterion in acceptance.CRITERIA:
        result = criterion()
        print(result.line(), flush=True)
        failed += not result.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
