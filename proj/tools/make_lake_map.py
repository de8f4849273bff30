#!/usr/bin/env python3
"""Regenerates data/ypacarai.map, the bundled lake-shaped occupancy grid.

The outline is a smooth, slightly asymmetric blob (north-south elongated with a
western bay) whose water bounding box is exactly 100 columns by 120 rows.
"""
import math
import sys

ROWS, COLS = 140, 110
TOP, BOTTOM = 10, 129          # inclusive water row range (120 rows)
LEFT, RIGHT = 5, 104           # inclusive water column range (100 cols)


def half_width(t):
    base = math.sin(math.pi * t) ** 0.6
    lobe = 0.12 * math.sin(3.0 * math.pi * t + 0.4)
    return max(0.0, base + lobe)


def main(path):
    grid = [[0] * COLS for _ in range(ROWS)]
    widths = []
    for r in range(TOP, BOTTOM + 1):
        t = (r - TOP + 0.5) / (BOTTOM - TOP + 1)
        widths.append(half_width(t))
    peak = max(widths)
    for i, r in enumerate(range(TOP, BOTTOM + 1)):
        t = (r - TOP + 0.5) / (BOTTOM - TOP + 1)
        hw = 50.0 * widths[i] / peak
        center = 54.5 + 5.0 * math.sin(2.0 * math.pi * t)
        bay = 14.0 * math.exp(-((t - 0.45) / 0.08) ** 2)
        lo = max(LEFT, int(round(center - hw + bay)))
        hi = min(RIGHT, int(round(center + hw)))
        lo = max(lo, LEFT)
        if hi - lo < 2:
            lo, hi = int(center) - 1, int(center) + 1
        for c in range(lo, hi + 1):
            grid[r][c] = 1
    # The widest row spans the full bounding box.
    widest = TOP + max(range(len(widths)), key=lambda i: widths[i])
    for c in range(LEFT, RIGHT + 1):
        grid[widest][c] = 1
    with open(path, "w", newline="\n") as f:
        f.write(f"{ROWS} {COLS}\n")
        for row in grid:
            f.write(" ".join(str(v) for v in row) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ypacarai.map")
