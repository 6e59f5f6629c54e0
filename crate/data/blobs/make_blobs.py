"""Regenerate blobs.csv (numpy >= 1.17)."""
import numpy as np

rng = np.random.default_rng(20240601)
centers = np.array([[0, 0, 0, 0], [2.5, 0, 0, 1], [0, 2.5, 1, 0], [2.5, 2.5, 0, -1], [1.2, 1.2, 2.5, 0]])
rows = []
for c in range(5):
    for p in rng.normal(centers[c], 1.0, size=(48, 4)):
        rows.append((p, c))
with open("blobs.csv", "w") as f:
    for i in rng.permutation(len(rows)):
        p, c = rows[i]
        f.write(",".join(f"{v:.4f}" for v in p) + f",c{c}\n")
