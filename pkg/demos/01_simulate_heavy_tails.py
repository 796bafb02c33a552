"""Simulate a group-sparse cointegrated system under heavy-tailed innovations.

Walks through the data-generating process: draw a stable ground truth whose
long-run matrix has three cointegration relations but only four of five
active columns, simulate under Student-t(3) innovations, and look at what
heavy tails do to the sample path. Writes the series and the ground truth
to CSV/sidecar files alongside this script.
"""

import os

import numpy as np

from robustvecm import DgpSpec, make_ground_truth, simulate_path, stability_moduli
from robustvecm.io import write_ground_truth, write_series_csv

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

spec = DgpSpec(k=5, p=2, r=3, n=1000, active_columns=4,
               innovation="student", df=3.0, seed=42)
truth = make_ground_truth(spec)

print("ground truth")
print(f"  active columns of the long-run matrix: {truth.support}")
print(f"  column norms: {np.round(np.linalg.norm(truth.params.pi, axis=0), 3)}")

# a rank-3 long-run matrix leaves exactly 5 - 3 = 2 unit roots
mods = stability_moduli(truth.params)
print(f"  companion moduli: {np.round(mods, 4)}")
print(f"  unit roots: {(np.abs(mods - 1) <= 1e-6).sum()} (expected {spec.k - spec.r})")

path = simulate_path(truth, spec)
diffs = np.diff(np.hstack([path.presample[:, -1:], path.observations]), axis=1)
print("\nsample path under t(3) innovations")
print(f"  levels range: [{path.observations.min():.1f}, {path.observations.max():.1f}]")
print(f"  largest one-step move: {np.abs(diffs).max():.2f} "
      f"(median move {np.median(np.abs(diffs)):.2f})")
print("  heavy tails show up as one-step moves far beyond the typical scale")

series_file = os.path.join(OUT_DIR, "simulated_series.csv")
truth_file = os.path.join(OUT_DIR, "simulated_truth.txt")
with open(series_file, "w") as fp:
    write_series_csv(fp, path)
with open(truth_file, "w") as fp:
    write_ground_truth(fp, truth, spec)
print(f"\nwrote {series_file}\nwrote {truth_file}")
