"""Command-line front end.

Every subcommand reads a JSON config (``--config``), writes into ``--out``
and takes its randomness from ``--seed`` (or the config's ``seed``); there is
no ambient entropy. Failures print one line ``error: <kind>: <message>`` to
stderr and exit nonzero.

Config keys::

    dataset      {"synthetic": "square"|"disk", "n": 10000, "n_test": 20000, "q1": ...}
                 or {"csv": path, "schema": path, "test_csv": path, "test_fraction": 0.2}
    validation_fraction  0.4
    constraint   named constraint for train-auc (default "intra_group")
    roc          {"alpha_H": [...], "lambda_H": [...], "alpha_G": [...], "lambda_G": [...]}
    trainer      fields of AucTrainConfig / RocTrainConfig (seed excluded)
    alphas       abscissae at which |Delta_{F,alpha}| is reported
    sweep        {"mode": "auc"|"roc", "lambdas": [...], "lambda_regs": [...]}
    scores_csv   audit / roc-export input with columns score,y,z
    checkpoint   audit / roc-export input, scored on the configured test set
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import constraints, core_data, metrics, synth_data, tabular_data, trainer
from .errors import ConfigurationError, FairRankError, UndefinedStatisticError
from .model import load_checkpoint, save_checkpoint

SCHEMA_VERSION = 1
DEFAULT_ALPHAS = (0.125, 0.25, 0.5, 0.75)
DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 1.0, 5.0, 10.0)
DEFAULT_LAMBDA_REGS = (1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1, 1.0)
COMMANDS = ("synth", "train-auc", "train-roc", "audit", "roc-export", "sweep")

# role tags for seeds derived from the base seed
_DATA, _TEST, _SPLIT, _TRAIN = range(4)


def derive_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence((seed, *path)).generate_state(1)[0])


# ---------------------------------------------------------------- config

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    return cfg


def _trainer_config(cls, cfg: dict, seed: int, **overrides):
    fields = {f.name for f in dataclasses.fields(cls)}
    raw = dict(cfg.get("trainer", {}))
    unknown = sorted(set(raw) - fields)
    if unknown:
        raise ConfigurationError(f"unknown trainer keys: {unknown}")
    raw.update(overrides)
    raw["seed"] = seed
    tc = cls(**raw)
    tc.validate()
    return tc


def _roc_fields(cfg: dict) -> dict:
    roc = dict(cfg.get("roc", {}))
    out = {}
    for F in ("H", "G"):
        alphas = tuple(float(a) for a in roc.pop(f"alpha_{F}", ()))
        weights = tuple(float(w) for w in roc.pop(f"lambda_{F}", [1.0] * len(alphas)))
        out[f"alpha_{F}"], out[f"lambda_{F}"] = alphas, weights
    if roc:
        raise ConfigurationError(f"unknown roc keys: {sorted(roc)}")
    return out


# ---------------------------------------------------------------- data

def _standardize_on(pool, test, n_numeric):
    """z-score the first ``n_numeric`` columns with statistics of ``pool``."""
    mu = pool.X[:, :n_numeric].mean(axis=0)
    sd = pool.X[:, :n_numeric].std(axis=0)
    sd[sd == 0] = 1.0

    def apply(ds):
        X = ds.X.copy()
        X[:, :n_numeric] = (X[:, :n_numeric] - mu) / sd
        return core_data.Dataset(X, ds.y, ds.z)

    return apply(pool), apply(test), mu.tolist(), sd.tolist()


def load_data(cfg: dict, seed: int):
    """Return ``(pool, test, info)``; ``pool`` is later split into train/validation."""
    spec = cfg.get("dataset")
    if not isinstance(spec, dict):
        raise ConfigurationError("config needs a 'dataset' object")
    if "synthetic" in spec:
        name = spec["synthetic"]
        n = int(spec.get("n", 10_000))
        n_test = int(spec.get("n_test", 20_000))
        q1 = spec.get("q1")
        pool = synth_data.generate(name, n, derive_seed(seed, _DATA), q1)
        test = synth_data.generate(name, n_test, derive_seed(seed, _TEST), q1)
        return pool, test, {"source": "synthetic", "generator": name, "n": n, "n_test": n_test,
                            "q1": q1}
    if "csv" not in spec or "schema" not in spec:
        raise ConfigurationError("dataset needs 'synthetic' or both 'csv' and 'schema'")
    schema = tabular_data.TabularSchema.from_json(spec["schema"])
    if "test_csv" in spec:
        pool, rep = tabular_data.load_csv(spec["csv"], schema)
        enc = tabular_data.Encoding.from_dict(rep["encoding"])
        test, test_rep = tabular_data.load_csv(spec["test_csv"], schema, enc)
        info = {"source": "csv", "ingest": rep, "test_ingest": {
            k: v for k, v in test_rep.items() if k != "encoding"}}
        return pool, test, info
    # single file: hold out a test part first, then standardize on the pool only
    raw_schema = dataclasses.replace(schema, standardize=False)
    full, rep = tabular_data.load_csv(spec["csv"], raw_schema)
    frac = float(spec.get("test_fraction", 0.2))
    pool, test = core_data.split(full, frac, derive_seed(seed, _TEST))
    if schema.standardize and schema.numeric:
        pool, test, mu, sd = _standardize_on(pool, test, len(schema.numeric))
        rep["encoding"]["means"] = dict(zip(schema.numeric, mu))
        rep["encoding"]["stds"] = dict(zip(schema.numeric, sd))
    return pool, test, {"source": "csv", "ingest": rep, "test_fraction": frac}


def _split(cfg, pool, seed):
    frac = float(cfg.get("validation_fraction", 0.4))
    return core_data.split(pool, frac, derive_seed(seed, _SPLIT))


# ---------------------------------------------------------------- reports

def metrics_report(scores, y, z, alphas=DEFAULT_ALPHAS) -> dict:
    """Everything the CLI reports about a scored sample."""
    ds = core_data.Dataset(np.zeros((len(y), 1)), y, z)
    counts = core_data.cell_counts(ds)
    rep = metrics.audit_scores(scores, y, z, alphas)
    named = {}
    for kind in constraints.KINDS:
        try:
            g = constraints.make_named(kind, counts)
        except FairRankError as exc:
            named[kind] = {"error": str(exc)}
            continue
        named[kind] = {"gamma": list(g.gamma), "gamma_T_C": g.value(rep["c_vector"]),
                       "delta_auc": abs(g.gap(rep["c_vector"]))}
    rep["constraints"] = named
    rep["cell_counts"] = counts.as_dict()
    return rep


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


CURVE_FAMILIES = {
    "overall_H_G": ("H", "G"),
    "H0_G0": ("H0", "G0"), "H1_G1": ("H1", "G1"),
    "H0_G": ("H0", "G"), "H1_G": ("H1", "G"),
    "H_G0": ("H", "G0"), "H_G1": ("H", "G1"),
    "H0_H1": ("H0", "H1"), "G0_G1": ("G0", "G1"),
    "H1_G0": ("H1", "G0"), "H0_G1": ("H0", "G1"),
}


def export_roc_curves(scores, y, z, out_dir: Path) -> list:
    """One ``alpha,roc`` CSV per curve family; returns the written paths."""
    cells = metrics.split_scores(scores, y, z)
    cells["H"] = np.concatenate([cells["H0"], cells["H1"]])
    cells["G"] = np.concatenate([cells["G0"], cells["G1"]])
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (h, g) in CURVE_FAMILIES.items():
        curve = metrics.RocCurve(cells[h], cells[g])
        alphas = curve.grid(512, 10_000)
        path = out_dir / f"roc_{name}.csv"
        np.savetxt(path, np.column_stack([alphas, curve(alphas)]), delimiter=",",
                   header="alpha,roc", comments="", fmt="%.17g")
        written.append(str(path))
    return written


def _envelope(command, seed, cfg, **body):
    return {"schema_version": SCHEMA_VERSION, "command": command, "seed": seed,
            "config": cfg, **body}


# ---------------------------------------------------------------- commands

def cmd_synth(cfg, seed, out: Path):
    spec = cfg.get("dataset", {})
    if "synthetic" not in spec:
        raise ConfigurationError("synth needs dataset.synthetic")
    ds = synth_data.generate(spec["synthetic"], int(spec.get("n", 10_000)),
                             derive_seed(seed, _DATA), spec.get("q1"))
    path = out / "data.csv"
    cols = [f"x{j + 1}" for j in range(ds.d)] + ["y", "z"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for x, y, z in zip(ds.X.tolist(), ds.y.tolist(), ds.z.tolist()):
            w.writerow([repr(v) for v in x] + [y, z])
    _write_json(out / "report.json", _envelope("synth", seed, cfg, rows=ds.n, path=str(path),
                                               cell_counts=core_data.cell_counts(ds).as_dict()))


def _gamma_from(cfg, pool):
    kind = cfg.get("constraint", "intra_group")
    return constraints.make_named(kind, core_data.cell_counts(pool))


def _run_auc(cfg, seed, pool, test, lam=None, lambda_reg=None):
    train, val = _split(cfg, pool, seed)
    gamma = _gamma_from(cfg, pool)
    over = {k: v for k, v in (("lam", lam), ("lambda_reg", lambda_reg)) if v is not None}
    tc = _trainer_config(trainer.AucTrainConfig, cfg, derive_seed(seed, _TRAIN), **over)
    res = trainer.train_auc(train, val, gamma, tc)
    objective = trainer.objective_auc(res.model, val, gamma, tc.lam)
    return res, gamma, objective


def _run_roc(cfg, seed, pool, test, lam=None, lambda_reg=None):
    train, val = _split(cfg, pool, seed)
    fields = _roc_fields(cfg)
    if lam is not None:
        for F in ("H", "G"):
            fields[f"lambda_{F}"] = tuple(lam * w for w in fields[f"lambda_{F}"])
    over = dict(fields)
    if lambda_reg is not None:
        over["lambda_reg"] = lambda_reg
    tc = _trainer_config(trainer.RocTrainConfig, cfg, derive_seed(seed, _TRAIN), **over)
    res = trainer.train_roc(train, val, tc)
    objective = trainer.objective_roc(res.model, val, tc.spec)
    return res, None, objective


def _train_outputs(command, cfg, seed, out, res, gamma, objective, test, data_info):
    alphas = tuple(cfg.get("alphas", DEFAULT_ALPHAS))
    scores = res.model(test.X)
    test_rep = metrics_report(scores, test.y, test.z, alphas)
    if gamma is not None:
        test_rep["trained_constraint"] = {
            "kind": gamma.kind, "gamma": list(gamma.gamma),
            "gamma_T_C": gamma.value(test_rep["c_vector"]),
            "delta_auc": abs(gamma.gap(test_rep["c_vector"]))}
    extra = {"command": command, "seed": seed, "config": cfg, "data": data_info,
             "gamma": None if gamma is None else {"kind": gamma.kind, "gamma": list(gamma.gamma),
                                                  "gap_scale": gamma.gap_scale}}
    save_checkpoint(res.model, out / "model.npz", extra=json.loads(json.dumps(extra, default=_jsonable)),
                    optimizer=res.optimizer)
    trainer.write_log_csv(res.log, out / "train_log.csv")
    curves = export_roc_curves(scores, test.y, test.z, out / "roc")
    _write_json(out / "report.json", _envelope(
        command, seed, cfg, data=data_info, trainer=res.config,
        adaptive=dataclasses.asdict(res.adaptive), skipped_terms=res.skipped_terms,
        validation_objective=objective, test=test_rep, roc_curves=curves))


def cmd_train_auc(cfg, seed, out):
    pool, test, info = load_data(cfg, seed)
    res, gamma, obj = _run_auc(cfg, seed, pool, test)
    _train_outputs("train-auc", cfg, seed, out, res, gamma, obj, test, info)


def cmd_train_roc(cfg, seed, out):
    pool, test, info = load_data(cfg, seed)
    if not any(_roc_fields(cfg).values()):
        raise ConfigurationError("train-roc needs roc.alpha_H and/or roc.alpha_G")
    res, gamma, obj = _run_roc(cfg, seed, pool, test)
    _train_outputs("train-roc", cfg, seed, out, res, gamma, obj, test, info)


def _scored_input(cfg, seed):
    if "scores_csv" in cfg:
        with open(cfg["scores_csv"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or not {"score", "y", "z"} <= set(rows[0]):
            raise ConfigurationError("scores_csv needs columns score,y,z")
        s = np.array([float(r["score"]) for r in rows])
        y = np.array([int(float(r["y"])) for r in rows])
        z = np.array([int(float(r["z"])) for r in rows])
        core_data.Dataset(np.zeros((len(s), 1)), y, z)  # validates codes
        return s, y, z, {"scores_csv": cfg["scores_csv"]}
    if "checkpoint" in cfg:
        model, extra, _ = load_checkpoint(cfg["checkpoint"])
        data_cfg = cfg if "dataset" in cfg else extra.get("config", {})
        data_seed = seed if "dataset" in cfg else extra.get("seed", seed)
        _, test, info = load_data(data_cfg, data_seed)
        return model(test.X), test.y, test.z, {"checkpoint": cfg["checkpoint"], "data": info}
    raise ConfigurationError("audit needs 'scores_csv' or 'checkpoint'")


def cmd_audit(cfg, seed, out):
    s, y, z, src = _scored_input(cfg, seed)
    rep = metrics_report(s, y, z, tuple(cfg.get("alphas", DEFAULT_ALPHAS)))
    _write_json(out / "report.json", _envelope("audit", seed, cfg, source=src, test=rep))


def cmd_roc_export(cfg, seed, out):
    s, y, z, src = _scored_input(cfg, seed)
    curves = export_roc_curves(s, y, z, out / "roc")
    _write_json(out / "report.json", _envelope("roc-export", seed, cfg, source=src,
                                               roc_curves=curves))


def cmd_sweep(cfg, seed, out):
    sw = dict(cfg.get("sweep", {}))
    mode = sw.get("mode", "auc")
    if mode not in ("auc", "roc"):
        raise ConfigurationError("sweep.mode must be 'auc' or 'roc'")
    lambdas = [float(v) for v in sw.get("lambdas", DEFAULT_LAMBDAS)]
    regs = [float(v) for v in sw.get("lambda_regs", DEFAULT_LAMBDA_REGS)]
    if not lambdas or not regs:
        raise ConfigurationError("sweep candidate lists must be nonempty")
    pool, test, info = load_data(cfg, seed)
    run = _run_auc if mode == "auc" else _run_roc
    alphas = tuple(cfg.get("alphas", DEFAULT_ALPHAS))
    points = []
    for index, (lam, reg) in enumerate((a, b) for a in lambdas for b in regs):
        point_seed = derive_seed(seed, 100 + index)
        entry = {"index": index, "lambda": lam, "lambda_reg": reg, "seed": point_seed}
        try:
            res, gamma, obj = run(cfg, point_seed, pool, test, lam, reg)
            rep = metrics_report(res.model(test.X), test.y, test.z, alphas)
            if gamma is not None:
                rep["trained_constraint"] = {"kind": gamma.kind,
                                             "delta_auc": abs(gamma.gap(rep["c_vector"]))}
            entry.update(status="ok", validation_objective=obj, test=rep)
        except (FairRankError, FloatingPointError) as exc:
            entry.update(status="failed", error=f"{getattr(exc, 'kind', 'error')}: {exc}")
        points.append(entry)
    ok = [p for p in points if p["status"] == "ok"]
    ranking = sorted(ok, key=lambda p: -p["validation_objective"])
    for rank, p in enumerate(ranking, 1):
        p["rank"] = rank
    best = ranking[0] if ranking else None
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "lambda", "lambda_reg", "status", "validation_objective", "test_auc"])
        for p in ranking + [p for p in points if p["status"] != "ok"]:
            w.writerow([p.get("rank", ""), p["lambda"], p["lambda_reg"], p["status"],
                        p.get("validation_objective", ""), p.get("test", {}).get("auc", "")])
    _write_json(out / "report.json", _envelope(
        "sweep", seed, cfg, data=info, mode=mode, points=points,
        best=None if best is None else {k: best[k] for k in ("index", "lambda", "lambda_reg")}))
    if best is None:
        raise UndefinedStatisticError("every sweep point failed")


HANDLERS = {"synth": cmd_synth, "train-auc": cmd_train_auc, "train-roc": cmd_train_roc,
            "audit": cmd_audit, "roc-export": cmd_roc_export, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="base seed (overrides the config's 'seed')")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigurationError("a seed is required (--seed or config 'seed')")
        if not isinstance(seed, int) or seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](cfg, seed, out)
    except (FairRankError, FloatingPointError, OSError, TypeError) as exc:
        kind = getattr(exc, "kind", type(exc).__name__)
        msg = " ".join(str(exc).split())
        print(f"error: {kind}: {msg}", file=sys.stderr)
        return 3 if isinstance(exc, UndefinedStatisticError) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
