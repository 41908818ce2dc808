"""The family of AUC-based constraints Gamma^T C(s) = 0.

Each named constraint is an equality between two AUCs of mixtures of the
four cells (H0, H1, G0, G1). Here we check, on random scores, that the
mixture gap equals the scaled Gamma^T C, and that all named constraints are
"relevant" (satisfied automatically when the two groups look alike).

Run: python demos/02_constraint_family.py
"""

import numpy as np

from fairrank import constraints, core_data, metrics
from fairrank.constraints import E1, E2, E3, E4, MixtureConstraint

rng = np.random.default_rng(0)
cells = {"H0": rng.normal(0.0, 1, 300), "H1": rng.normal(0.5, 1, 200),
         "G0": rng.normal(1.2, 1, 250), "G1": rng.normal(0.8, 1, 350)}
counts = core_data.CellCounts(n_pos_by_group=(250, 350), n_neg_by_group=(300, 200))
aucs = metrics.cell_aucs(cells)
C = metrics.c_vector(cells)
print("C =", np.round(np.array(C), 4))


def cell_auc(a, b):
    return aucs[(a, b)] if (a, b) in aucs else 1.0 - aucs[(b, a)]


print(f"{'kind':<16}{'Gamma':<44}{'gap':>9}{'mixture':>10}  relevant")
for kind in constraints.KINDS:
    g = constraints.make_named(kind, counts)
    mc = constraints.mixture_form(kind, counts)
    print(f"{kind:<16}{str(np.round(g.gamma, 3)):<44}{g.gap(C):>9.4f}{mc.gap(cell_auc):>10.4f}"
          f"  {constraints.is_relevant(mc)}")

# Comparing H0-vs-G0 with G1-vs-H1 mixes the roles of the arguments, so it
# cannot hold for identically distributed groups.
print("swapped arguments relevant:", constraints.is_relevant(MixtureConstraint(E1, E3, E4, E2)))
