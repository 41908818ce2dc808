"""Pointwise ROC constraints on the "disk" example.

Group 0 lives on the quarter disk of radius 1/2 and group 1 on the
surrounding quarter annulus; the label depends only on the angle. A score
that ranks well makes the negatives of the two groups cross the threshold at
very different rates, which the constraint at alpha = 3/4 penalizes.

The thresholds t start at 0 and move by 0.001 every 50 iterations. With
batch-normalized scores the target threshold for alpha = 3/4 sits near -1,
out of reach within 10,000 iterations; ``t_init="val_quantile"`` starts them
at the target rate instead.

Run: python demos/04_disk_roc_constraint.py   (about 10 seconds)
"""

from fairrank import core_data, metrics, synth_data, trainer

pool = synth_data.generate("disk", 10_000, seed=0)
train, val = core_data.split(pool, 0.4, seed=0)
test = synth_data.generate("disk", 20_000, seed=100)

for label, extra in (("unconstrained", {}),
                     ("alpha_H=3/4, t from 0", {"alpha_H": (0.75,), "lambda_H": (1.0,)}),
                     ("alpha_H=3/4, t at target", {"alpha_H": (0.75,), "lambda_H": (1.0,),
                                                   "t_init": "val_quantile"})):
    cfg = trainer.RocTrainConfig(lambda_reg=0.01, seed=0, **extra)
    res = trainer.train_roc(train, val, cfg)
    cells = metrics.split_scores(res.model(test.X), test.y, test.z)
    d = abs(metrics.delta("H", cells["H0"], cells["H1"], 0.75))
    auc = trainer.evaluate(res.model, test, alphas=())["auc"]
    print(f"{label:<26} AUC {auc:.3f}  |Delta_H(3/4)| {d:.3f}  t={res.adaptive.t_H}")
