"""Empirical CDFs, ROC points and AUCs on a handful of scores.

Run: python demos/01_empirical_roc_and_auc.py
"""

import numpy as np

from fairrank import metrics

# Scores of negatives (H) and positives (G); note the tie at 0.6.
neg = np.array([0.1, 0.3, 0.6, 0.2])
pos = np.array([0.6, 0.9, 0.4, 0.8, 0.7])

H = metrics.EmpiricalCdf(neg, "H")
G = metrics.EmpiricalCdf(pos, "G")
print("H(0.3) =", H(0.3))                      # 3 of 4 negatives score <= 0.3
print("H^-1(0.5) =", H.inverse(0.5))           # smallest t with H(t) >= 1/2
print("H^-1(0) =", H.inverse(0.0))             # -inf by convention

# A ROC point is the true positive rate at the threshold giving FPR alpha.
for alpha in (0.0, 0.25, 0.5, 1.0):
    print(f"ROC({alpha}) = {metrics.roc_point(H, G, alpha):.3f}")

# The AUC counts ties as one half; the fast and brute-force versions agree exactly.
print("AUC =", metrics.auc(neg, pos), "brute force =", metrics.auc_brute_force(neg, pos))

# Split the same scores by group to get the four cells and the C vector.
scores = np.concatenate([neg, pos])
labels = np.array([-1] * 4 + [1] * 5)
groups = np.array([0, 1, 0, 1, 0, 0, 1, 1, 1])
cells = metrics.split_scores(scores, labels, groups)
print("cells:", {k: v.tolist() for k, v in cells.items()})
print("C =", np.round(np.array(metrics.c_vector(cells)), 4))

# The audit bundles everything into one JSON-ready dict.
report = metrics.audit_scores(scores, labels, groups, alphas=(0.5,))
print("audit:", {k: report[k] for k in ("auc", "delta_H", "delta_G")})
