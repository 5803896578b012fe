"""Run the headline-number checks and print one PASS/FAIL line per row.

    python scripts/reproduce.py --only 1,2,3
"""

import argparse
import sys

from cavnet import checks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", default=None, help="comma-separated criterion numbers")
    args = ap.parse_args()
    only = None if args.only is None else [int(x) for x in args.only.split(",") if x]
    rows = checks.reproduce(only, progress=lambda r: print(r.line(), flush=True))
    print()
    print(checks.render(rows))
    sys.exit(0 if all(r.passed for r in rows) else 1)


if __name__ == "__main__":
    main()
