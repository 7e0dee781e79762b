"""Experiment harness: run configuration, metrics, artifacts, grid search.

A run executes one method (majority baseline, mapping refinement, sample
downweighting, or confident-joint pruning) ``repeats`` times with seeds
derived from the master seed, writes a structured report plus per-method
diagnostics into the run directory, and evaluates either the final
classifier on a held-out test split or the corrected labels against training
gold.  The development split, when present, is used only for model selection
and grid search, never inside denoising.

Everything written to ``metrics.json`` and the label outputs is
deterministic under a fixed config and seed; wall-clock timing goes to a
separate ``timing.json`` so repeated runs stay byte-identical.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from wsdenoise.corpus import (
    LabelVector,
    WeakDataset,
    dataset_stats,
    load_dataset,
    majority_vote,
)
from wsdenoise.featurize import FeaturizeConfig
from wsdenoise.linear import ClassifierConfig
from wsdenoise.pipeline import train_text_model
from wsdenoise.seeding import derive_seed
from wsdenoise.ulf import DenoiseResult, UlfConfig, run_ulf
from wsdenoise.wscl import WsclConfig, run_wscl
from wsdenoise.wscw import WscwConfig, run_wscw

METHODS = ("baseline_majority", "ulf", "wscw", "wscl")
METRICS = ("accuracy", "binary_f1", "macro_f1")
STRATEGY_ALIASES = {
    "rndm": "random", "random": "random",
    "lfs": "by_lf", "by_lf": "by_lf",
    "sgn": "by_signature", "by_signature": "by_signature",
}


@dataclass
class RunConfig:
    method: str = "baseline_majority"
    strategy: str = "sgn"
    doc_path: str = ""
    z_path: str = ""
    t_path: str = ""
    gold_path: str | None = None
    dev_doc_path: str | None = None
    dev_gold_path: str | None = None
    test_doc_path: str | None = None
    test_gold_path: str | None = None
    out_dir: str = "runs/run"
    seed: int = 0
    repeats: int = 1
    metric: str = "accuracy"
    # ULF
    p: float = 0.5
    k: int = 5
    iters: int = 20
    stall_patience: int = 3
    lambda_rate: float = 0.0
    use_raw_joint: bool = False
    # WSCW
    partitions: int = 3
    epsilon: float = 0.7
    # classifier / featurizer
    lr: float = 1e-2
    epochs: int = 20
    patience: int = 5
    batch_size: int = 32
    l2: float = 0.0
    min_df: int = 1
    max_features: int | None = None
    dump_folds: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.strategy not in STRATEGY_ALIASES:
            raise ValueError(f"strategy must be one of {sorted(STRATEGY_ALIASES)}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def classifier_config(self, seed: int) -> ClassifierConfig:
        return ClassifierConfig(learning_rate=self.lr, epochs=self.epochs,
                                patience=self.patience, batch_size=self.batch_size,
                                l2=self.l2, seed=seed)

    def featurize_config(self) -> FeaturizeConfig:
        return FeaturizeConfig(min_df=self.min_df, max_features=self.max_features)


@dataclass
class MetricsReport:
    metric: str
    values: list                 # per successful repeat
    mean: float
    sem: float                   # sample std / sqrt(repeats)
    wall_clock_sec: float
    dev_values: list | None = None
    dev_mean: float | None = None
    failures: list = field(default_factory=list)
    partial: bool = False


# ---------------------------------------------------------------------------
# metrics


def _labels_array(labels) -> np.ndarray:
    return labels.labels if hasattr(labels, "labels") else np.asarray(labels, dtype=np.int64)


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def evaluate(pred, gold, metric: str) -> float:
    """Accuracy, binary F1 (class 1 positive, K=2), or macro F1."""
    p = _labels_array(pred)
    g = _labels_array(gold)
    if len(p) != len(g):
        raise ValueError("prediction and gold lengths disagree")
    if metric == "accuracy":
        return float((p == g).mean())
    k = int(max(p.max(initial=0), g.max(initial=0)) + 1)
    if metric == "binary_f1":
        if k > 2:
            raise ValueError("binary_f1 requires K = 2")
        tp = int(((p == 1) & (g == 1)).sum())
        fp = int(((p == 1) & (g != 1)).sum())
        fn = int(((p != 1) & (g == 1)).sum())
        return _f1(tp, fp, fn)
    if metric == "macro_f1":
        vals = []
        for c in range(k):
            tp = int(((p == c) & (g == c)).sum())
            fp = int(((p == c) & (g != c)).sum())
            fn = int(((p != c) & (g == c)).sum())
            vals.append(_f1(tp, fp, fn))
        return float(np.mean(vals))
    raise ValueError(f"unknown metric {metric!r}")


# ---------------------------------------------------------------------------
# split loading


def _load_split(doc_path, gold_path, num_classes):
    texts, gold = [], {}
    ids = []
    with open(doc_path, encoding="utf-8") as f:
        for line in f.read().splitlines():
            if not line:
                continue
            sid, text = line.split("\t", 1)
            ids.append(sid)
            texts.append(text)
    with open(gold_path, encoding="utf-8") as f:
        for line in f.read().splitlines():
            if not line:
                continue
            sid, cls = line.split("\t")
            gold[sid] = int(cls)
    labels = np.array([gold[sid] for sid in ids], dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"{gold_path}: class index out of range")
    return texts, labels


# ---------------------------------------------------------------------------
# single repeat


def _execute_repeat(ds: WeakDataset, cfg: RunConfig, seed: int):
    """Run one repeat; returns (corrected LabelVector, TextModel, extras dict)."""
    strategy = STRATEGY_ALIASES[cfg.strategy]
    feat = cfg.featurize_config()
    clf = cfg.classifier_config(seed)
    if cfg.method == "baseline_majority":
        labels = majority_vote(ds, ds.t, seed)
        model = train_text_model(ds.texts, labels.labels, ds.num_classes,
                                 feat_cfg=feat, clf_cfg=clf)
        return labels, model, {}
    if cfg.method == "ulf":
        ucfg = UlfConfig(p=cfg.p, k=cfg.k, strategy=strategy,
                         lambda_rate=cfg.lambda_rate, max_iters=cfg.iters,
                         stall_patience=cfg.stall_patience, seed=seed,
                         clf=clf, feat=feat, mix_raw_joint=cfg.use_raw_joint)
        res = run_ulf(ds, ucfg)
        return res.final_labels, res.final_model, {"result": res}
    if cfg.method == "wscw":
        wcfg = WscwConfig(k=cfg.k, partitions=cfg.partitions, epsilon=cfg.epsilon,
                          seed=seed, clf=clf, feat=feat)
        audit: dict = {}

        def _collect(plan, probs):
            audit["plan"], audit["probs"] = plan, probs

        weights, model = run_wscw(ds, wcfg, collect_audit=_collect)
        labels = majority_vote(ds, ds.t, seed)
        return labels, model, {"weights": weights, **audit}
    if cfg.method == "wscl":
        if strategy == "random":
            raise ValueError("wscl requires strategy lfs or sgn")
        wcfg = WsclConfig(k=cfg.k, strategy=strategy, lambda_rate=cfg.lambda_rate,
                          seed=seed, clf=clf, feat=feat)
        res = run_wscl(ds, wcfg)
        return res.final_labels, res.final_model, {"result": res}
    raise ValueError(f"unknown method {cfg.method!r}")


# ---------------------------------------------------------------------------
# artifacts


def _write_fold_audit(path, plan, probs) -> None:
    """Fold assignment and probability dump, one sample per line."""
    fold_of_test = {}
    for fi, (_, te) in enumerate(plan.folds):
        for i in te:
            fold_of_test.setdefault(int(i), []).append(fi)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# sample\ttest_folds\tprediction_count\tprobs\n")
        for i in range(probs.probs.shape[0]):
            folds = ",".join(str(v) for v in fold_of_test.get(i, []))
            row = "\t".join(repr(float(v)) for v in probs.probs[i])
            f.write(f"{i}\t{folds}\t{int(probs.prediction_count[i])}\t{row}\n")


def _write_artifacts(run_dir, cfg: RunConfig, ds: WeakDataset, labels: LabelVector,
                     extras: dict, report: MetricsReport, seeds: list) -> None:
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "config.txt"), "w", encoding="utf-8") as f:
        for fld in fields(RunConfig):
            f.write(f"{fld.name}={getattr(cfg, fld.name)}\n")
        f.write(f"derived_seeds={','.join(str(s) for s in seeds)}\n")
    with open(os.path.join(run_dir, "id_mapping.tsv"), "w", encoding="utf-8") as f:
        for dense, sid in enumerate(ds.ids):
            f.write(f"{sid}\t{dense}\n")
    with open(os.path.join(run_dir, "labels_corrected.tsv"), "w", encoding="utf-8") as f:
        for sid, lab in zip(ds.ids, labels.labels):
            f.write(f"{sid}\t{int(lab)}\n")

    result: DenoiseResult | None = extras.get("result")
    t_out = result.refined_t if result is not None else np.asarray(ds.t, dtype=float)
    with open(os.path.join(run_dir, "t_refined.tsv"), "w", encoding="utf-8") as f:
        for l in range(t_out.shape[0]):
            vals = "\t".join(repr(float(v)) for v in t_out[l])
            f.write(f"{l}\t{vals}\n")

    if result is not None and result.diagnostics:
        diag_dir = os.path.join(run_dir, "diagnostics")
        os.makedirs(diag_dir, exist_ok=True)
        for d in result.diagnostics:
            with open(os.path.join(diag_dir, f"iter_{d['iteration']:03d}.json"), "w",
                      encoding="utf-8") as f:
                json.dump(d, f, indent=1)
    if result is not None and result.prune_report is not None:
        with open(os.path.join(run_dir, "prune_report.json"), "w", encoding="utf-8") as f:
            json.dump(result.prune_report, f, indent=1)
    if "weights" in extras:
        w = extras["weights"]
        with open(os.path.join(run_dir, "weights.tsv"), "w", encoding="utf-8") as f:
            for sid, wv, fl in zip(ds.ids, w.w, w.flags):
                f.write(f"{sid}\t{repr(float(wv))}\t{int(fl)}\n")

    if cfg.dump_folds:
        plan = result.last_plan if result is not None else extras.get("plan")
        probs = result.last_probs if result is not None else extras.get("probs")
        if plan is not None and probs is not None:
            _write_fold_audit(os.path.join(run_dir, "fold_audit.tsv"), plan, probs)

    payload = {
        "method": cfg.method,
        "strategy": cfg.strategy,
        "metric": report.metric,
        "values": report.values,
        "mean": report.mean,
        "sem": report.sem,
        "dev_values": report.dev_values,
        "dev_mean": report.dev_mean,
        "repeats": cfg.repeats,
        "seeds": seeds,
        "failures": report.failures,
        "partial": report.partial,
    }
    with open(os.path.join(run_dir, "metrics.json"), "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
    with open(os.path.join(run_dir, "timing.json"), "w", encoding="utf-8") as f:
        json.dump({"wall_clock_sec": report.wall_clock_sec}, f)


# ---------------------------------------------------------------------------
# run and grid search


def run(cfg: RunConfig, ds: WeakDataset | None = None) -> MetricsReport:
    """Execute the configured method ``repeats`` times and write the report.

    Evaluation source, in order of preference: final-classifier predictions
    on the test split; otherwise corrected labels against training gold.
    When a dev split is provided, the repeat with the best dev score supplies
    the written label/model artifacts; otherwise the last repeat does.
    """
    start = time.monotonic()
    if ds is None:
        ds = load_dataset(cfg.doc_path, cfg.z_path, cfg.t_path, cfg.gold_path or None)
    dev = test = None
    if cfg.dev_doc_path and cfg.dev_gold_path:
        dev = _load_split(cfg.dev_doc_path, cfg.dev_gold_path, ds.num_classes)
    if cfg.test_doc_path and cfg.test_gold_path:
        test = _load_split(cfg.test_doc_path, cfg.test_gold_path, ds.num_classes)
    if test is None and ds.gold is None:
        raise ValueError("no evaluation target: provide a test split or training gold")

    values, dev_values, failures = [], [], []
    outcomes = []
    seeds = [derive_seed(cfg.seed, 800, r) for r in range(cfg.repeats)]
    for r, seed in enumerate(seeds):
        try:
            labels, model, extras = _execute_repeat(ds, cfg, seed)
        except (RuntimeError, ValueError) as exc:
            failures.append(f"repeat {r}: {exc}")
            continue
        if test is not None:
            value = evaluate(model.predict(test[0]), test[1], cfg.metric)
        else:
            value = evaluate(labels, ds.gold, cfg.metric)
        dev_value = None
        if dev is not None:
            dev_value = evaluate(model.predict(dev[0]), dev[1], cfg.metric)
            dev_values.append(dev_value)
        values.append(value)
        outcomes.append((dev_value, labels, model, extras))

    if not values:
        raise RuntimeError("all repeats failed: " + "; ".join(failures))
    mean = float(np.mean(values))
    sem = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    report = MetricsReport(
        metric=cfg.metric, values=[float(v) for v in values], mean=mean, sem=sem,
        wall_clock_sec=time.monotonic() - start,
        dev_values=[float(v) for v in dev_values] if dev is not None else None,
        dev_mean=float(np.mean(dev_values)) if dev_values else None,
        failures=failures, partial=bool(failures),
    )

    if dev is not None:
        best = max(range(len(outcomes)), key=lambda i: outcomes[i][0])
    else:
        best = len(outcomes) - 1
    _, labels, model, extras = outcomes[best]
    _write_artifacts(cfg.out_dir, cfg, ds, labels, extras, report, seeds)
    return report


def grid_search(base: RunConfig, space: dict, budget: int | None = None,
                ds: WeakDataset | None = None):
    """Sweep hyperparameter value-lists; select the best dev-mean config.

    The sweep is exhaustive in first-in-grid order, or truncated to
    ``budget`` points chosen by a seeded shuffle.  Ties break toward the
    earlier grid point.  Returns ``(best RunConfig, results list)``.
    """
    if not (base.dev_doc_path and base.dev_gold_path):
        raise ValueError("grid search requires a dev split for selection")
    keys = list(space.keys())
    if not keys or any(len(space[k]) == 0 for k in keys):
        raise ValueError("empty grid space")
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(space[k] for k in keys))]
    indices = list(range(len(points)))
    if budget is not None and budget < len(points):
        rng = np.random.default_rng([base.seed, 900])
        indices = sorted(rng.permutation(len(points))[:budget].tolist())

    if ds is None:
        ds = load_dataset(base.doc_path, base.z_path, base.t_path, base.gold_path or None)
    results = []
    best_cfg, best_score, best_idx = None, -np.inf, None
    for idx in indices:
        cfg = replace(base, **points[idx],
                      out_dir=os.path.join(base.out_dir, f"grid_{idx:04d}"))
        report = run(cfg, ds=ds)
        score = report.dev_mean
        results.append({"grid_index": idx, "params": points[idx],
                        "dev_mean": score, "test_mean": report.mean})
        if score > best_score:
            best_cfg, best_score, best_idx = cfg, score, idx
    with open(os.path.join(base.out_dir, "grid_results.json"), "w", encoding="utf-8") as f:
        json.dump({"best_index": best_idx, "results": results}, f, indent=1, sort_keys=True)
    return best_cfg, results


def stats_report(ds: WeakDataset, repeats: int = 5, seed: int = 0) -> dict:
    s = dataset_stats(ds, repeats=repeats, seed=seed)
    out = {
        "n_samples": ds.n_samples,
        "n_lfs": ds.n_lfs,
        "num_classes": ds.num_classes,
        "coverage": s.coverage,
        "avg_lf_hits": s.avg_lf_hits,
    }
    if s.majority_accuracy is not None:
        out["majority_accuracy_mean"] = s.majority_accuracy[0]
        out["majority_accuracy_std"] = s.majority_accuracy[1]
    return out
