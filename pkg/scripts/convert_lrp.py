"""Convert LRP benchmark files in the Prodhon layout to the canonical text format.

Layout read (one value or one ``x y`` pair per line, blank lines ignored):

    n                      number of clients
    m                      number of depots
    m lines  x y           depot coordinates
    n lines  x y           client coordinates
    vehicle capacity       (ignored: vehicles are uncapacitated here)
    m lines  capacity      depot capacities
    n lines  demand
    m lines  opening cost
    route fixed cost       (ignored)
    type                   0: distances are 100 * Euclidean, rounded up
                           1: plain Euclidean distances

This is the layout distributed with the Prins/Prodhon/Wolfler Calvo sets
(files such as ``coordP111112.dat``).  It was written from that
documentation, not validated against every published file, so check a
converted instance by hand before large runs.

    python3 scripts/convert_lrp.py coordP111112.dat -o p111112.lrp
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from ntsearch import lrp


def convert(text: str, alpha: str = "default") -> str:
    tokens = text.split()
    pos = 0

    def take(count=1):
        nonlocal pos
        if pos + count > len(tokens):
            raise lrp.ParseError(f"token {pos}: file ends early")
        out = [float(t) for t in tokens[pos:pos + count]]
        pos += count
        return out

    n, m = int(take()[0]), int(take()[0])
    depots = [tuple(take(2)) for _ in range(m)]
    clients = [tuple(take(2)) for _ in range(n)]
    take()  # vehicle capacity
    capacity = take(m)
    demand = take(n)
    opening = take(m)
    take()  # route fixed cost
    kind = int(take()[0]) if pos < len(tokens) else 0
    pts = clients + depots

    def dist(a, b):
        d = math.hypot(a[0] - b[0], a[1] - b[1])
        return float(math.ceil(100 * d)) if kind == 0 else d

    travel = [[0.0 if i == j else dist(a, b) for j, b in enumerate(pts)] for i, a in enumerate(pts)]
    inst = lrp.LrpInstance(demand, capacity, opening, travel, alpha=None if alpha == "default" else float(alpha))
    return lrp.format_lrp(inst)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Convert a Prodhon-layout LRP file to the canonical format")
    ap.add_argument("source", type=Path)
    ap.add_argument("-o", "--out", type=Path, help="output file (default stdout)")
    ap.add_argument("--alpha", default="default", help="penalty weight, or 'default'")
    args = ap.parse_args(argv)
    try:
        text = convert(args.source.read_text(), args.alpha)
    except (OSError, ValueError) as exc:
        print(f"convert_lrp: {exc}", file=sys.stderr)
        return 2
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
