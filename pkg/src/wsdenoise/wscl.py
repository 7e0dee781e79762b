"""Confident-joint estimation and noise-rate pruning with LF-aware folds.

A class-to-class confident joint counts (weak label, confident label) pairs;
samples without a confident label do not participate.  The joint is
calibrated row-wise to the weak-label class counts and normalized by N, then
each off-diagonal cell (i, j) prunes round(N * q[i][j]) samples with weak
label i, ranked by the probability margin p(j) - p(i).  Pruned samples are
excluded from final training; nothing is relabeled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from wsdenoise.confidence import NO_LABEL, class_thresholds, confident_labels
from wsdenoise.corpus import LabelVector, WeakDataset, majority_vote
from wsdenoise.crossval import build_plan, estimate_oos
from wsdenoise.featurize import FeaturizeConfig
from wsdenoise.linear import ClassifierConfig
from wsdenoise.pipeline import train_text_model
from wsdenoise.seeding import derive_seed
from wsdenoise.ulf import DenoiseResult


@dataclass
class ClassConfidentJoint:
    c: np.ndarray  # K x K counts; rows = noisy label, columns = confident label


@dataclass
class PruneMask:
    keep: np.ndarray            # length N booleans
    pruned_counts: np.ndarray   # K x K pruned per cell (diagonal always 0)
    shortfall: np.ndarray       # K x K requested-minus-available per cell


@dataclass
class WsclConfig:
    k: int = 5
    strategy: str = "by_signature"   # by_lf or by_signature
    lambda_rate: float = 0.0
    seed: int = 0
    clf: ClassifierConfig = field(default_factory=ClassifierConfig)
    feat: FeaturizeConfig = field(default_factory=FeaturizeConfig)

    def __post_init__(self):
        if self.strategy not in ("by_lf", "by_signature"):
            raise ValueError("strategy must be 'by_lf' or 'by_signature'")


def _labels_array(labels) -> np.ndarray:
    return labels.labels if hasattr(labels, "labels") else np.asarray(labels, dtype=np.int64)


def class_confident_joint(noisy, conf, num_classes: int | None = None) -> ClassConfidentJoint:
    """Count (noisy label, confident label) pairs over confidently labeled samples."""
    y = _labels_array(noisy)
    yc = _labels_array(conf)
    if num_classes is not None:
        k = num_classes
    else:
        k = int(max(y.max(), yc.max()) + 1) if len(y) else 0
    c = np.zeros((k, k), dtype=np.int64)
    for a, b in zip(y, yc):
        if b != NO_LABEL:
            c[a, b] += 1
    return ClassConfidentJoint(c)


def calibrate_joint(cj: ClassConfidentJoint, noisy) -> np.ndarray:
    """Scale each row to the noisy-label class count, then divide by N.

    Zero rows stay zero.  The result estimates the joint distribution of
    (noisy label, confident label) and sums to 1 when every class has both
    support and confident co-occurrences.
    """
    y = _labels_array(noisy)
    n = len(y)
    k = cj.c.shape[0]
    counts = np.bincount(y, minlength=k).astype(float)
    q = np.zeros_like(cj.c, dtype=float)
    row_sums = cj.c.sum(axis=1).astype(float)
    nonzero = row_sums > 0
    q[nonzero] = cj.c[nonzero] * (counts[nonzero] / row_sums[nonzero])[:, None]
    return q / n


def prune(q: np.ndarray, probs, noisy) -> PruneMask:
    """Per off-diagonal cell (i, j), prune the top round(N * q[i][j]) samples
    with noisy label i ranked by margin p(j) - p(i) descending.

    Rounding is half-up; requests beyond the available samples are clamped
    and recorded as shortfall.  A sample implicated by several cells is
    pruned once, claimed by the first cell in row-major order; margin ties
    break toward the lower sample id.
    """
    p = probs.probs if hasattr(probs, "probs") else np.asarray(probs, dtype=float)
    y = _labels_array(noisy)
    n, k = len(y), q.shape[0]
    pruned = np.zeros(n, dtype=bool)
    pruned_counts = np.zeros((k, k), dtype=np.int64)
    shortfall = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            m = int(np.floor(n * q[i, j] + 0.5))
            if m <= 0:
                continue
            cand = np.flatnonzero((y == i) & ~pruned)
            if cand.size == 0:
                shortfall[i, j] = m
                continue
            margins = p[cand, j] - p[cand, i]
            order = np.lexsort((cand, -margins))  # margin desc, then lower id
            take = cand[order[: min(m, cand.size)]]
            pruned[take] = True
            pruned_counts[i, j] = take.size
            if m > cand.size:
                shortfall[i, j] = m - cand.size
    return PruneMask(~pruned, pruned_counts, shortfall)


def run_wscl(ds: WeakDataset, cfg: WsclConfig, fold_predict=None,
             train_final: bool = True, noisy=None) -> DenoiseResult:
    """One plan -> probabilities -> confident joint -> prune -> train on kept.

    ``noisy`` overrides the majority-vote weak labels.
    """
    if noisy is None:
        noisy = majority_vote(ds, ds.t, cfg.seed)
    plan = build_plan(ds, cfg.strategy, cfg.k, cfg.lambda_rate, derive_seed(cfg.seed, 600))
    clf_cfg = ClassifierConfig(
        learning_rate=cfg.clf.learning_rate, epochs=cfg.clf.epochs,
        patience=cfg.clf.patience, batch_size=cfg.clf.batch_size,
        l2=cfg.clf.l2, seed=derive_seed(cfg.seed, 700),
    )
    probs = estimate_oos(ds, noisy, plan, cfg.feat, clf_cfg, fold_predict)
    th = class_thresholds(probs, noisy)
    conf = confident_labels(probs, th)
    joint = class_confident_joint(noisy, conf, ds.num_classes)
    q = calibrate_joint(joint, noisy)
    mask = prune(q, probs, noisy)

    model = None
    if train_final:
        kept = np.flatnonzero(mask.keep)
        model = train_text_model([ds.texts[i] for i in kept], noisy.labels[kept],
                                 ds.num_classes, feat_cfg=cfg.feat, clf_cfg=cfg.clf)
    report = {
        "confident_joint": joint.c.tolist(),
        "joint_estimate": q.tolist(),
        "pruned_counts": mask.pruned_counts.tolist(),
        "shortfall": mask.shortfall.tolist(),
        "pruned_ids": np.flatnonzero(~mask.keep).tolist(),
    }
    return DenoiseResult(
        final_labels=noisy,
        refined_t=np.asarray(ds.t, dtype=float).copy(),
        iterations_run=1,
        label_change_fractions=[],
        final_model=model,
        keep_mask=mask.keep,
        prune_report=report,
        last_plan=plan,
        last_probs=probs,
    )
