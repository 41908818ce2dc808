"""Driving the command-line tool from Python: synth, train-auc, audit, sweep.

The same steps from a shell:

    fairrank train-auc --config run.json --out runs/a --seed 0
    fairrank audit --config audit.json --out runs/a-audit --seed 0

Run: python demos/05_cli_walkthrough.py   (about 15 seconds)
"""

import json
import tempfile
from pathlib import Path

from fairrank import cli

work = Path(tempfile.mkdtemp(prefix="fairrank-demo-"))
run = {"dataset": {"synthetic": "square", "n": 10_000, "n_test": 20_000},
       "constraint": "intra_group",
       "trainer": {"lam": 1.0, "lambda_reg": 0.01}}
(work / "run.json").write_text(json.dumps(run))
assert cli.main(["train-auc", "--config", str(work / "run.json"),
                 "--out", str(work / "a"), "--seed", "0"]) == 0
report = json.loads((work / "a" / "report.json").read_text())
print("test AUC:", round(report["test"]["auc"], 3))
print("intra-group gap:", round(report["test"]["trained_constraint"]["delta_auc"], 3))
print("artifacts:", sorted(p.name for p in (work / "a").iterdir()))

# Re-auditing the checkpoint scores the same test set and gives the same numbers.
(work / "audit.json").write_text(json.dumps({"checkpoint": str(work / "a" / "model.npz")}))
cli.main(["audit", "--config", str(work / "audit.json"), "--out", str(work / "b"), "--seed", "0"])
again = json.loads((work / "b" / "report.json").read_text())["test"]["auc"]
print("audit AUC matches:", again == report["test"]["auc"])

# A small sweep picks the (lambda, lambda_reg) pair maximizing AUC - lambda*|gap| on validation.
sweep = {**run, "trainer": {"n_iter": 2_000}, "sweep": {"lambdas": [0.0, 1.0],
                                                       "lambda_regs": [0.01, 0.1]}}
(work / "sweep.json").write_text(json.dumps(sweep))
cli.main(["sweep", "--config", str(work / "sweep.json"), "--out", str(work / "s"), "--seed", "0"])
print((work / "s" / "sweep.csv").read_text())
