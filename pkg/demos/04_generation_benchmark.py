#!/usr/bin/env python3
"""How graph generation time scales with the superpixel count.

A reduced sweep on small frames so the demo finishes in seconds; the CLI's
`graphvid bench` runs the full 224x224 sweep and writes JSON/CSV reports.
The two stages are timed separately: superpixel calculation stays nearly
flat while the graph-structure stage (the temporal neighbor search) grows
with the superpixel count.
"""

from graphvid import run_benchmark, synthetic_clip

frames = synthetic_clip(frame_count=4, height=112, width=112, seed=4)
report = run_benchmark([100, 200, 400, 600, 800], frames, repetitions=2)

print(report.environment)
print(f"{'S':>6} {'mean s':>9} {'std':>8} {'segment s':>10} {'graph s':>9}")
for row in report.rows:
    print(f"{row.superpixels:>6} {row.mean_seconds:>9.3f} "
          f"{row.std_seconds:>8.4f} {row.segmentation_seconds:>10.3f} "
          f"{row.graph_seconds:>9.3f}")

means = [r.mean_seconds for r in report.rows]
print(f"\nmonotone increasing: {all(b > a for a, b in zip(means, means[1:]))}")
