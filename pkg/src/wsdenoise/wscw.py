"""Sample downweighting via repeated by-LF cross-validation.

For each of ``partitions`` rounds, LFs are split into k folds and a model is
trained per fold on the samples whose signatures avoid the held-out LFs.
A sample whose out-of-sample hard prediction disagrees with its weak label
collects a flag; its final training weight is ``epsilon ** flags``.
Unmatched samples are never flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from wsdenoise.corpus import WeakDataset, majority_vote
from wsdenoise.crossval import estimate_oos, plan_by_lf
from wsdenoise.featurize import FeaturizeConfig
from wsdenoise.linear import ClassifierConfig
from wsdenoise.pipeline import TextModel, train_text_model
from wsdenoise.seeding import derive_seed


@dataclass
class WscwConfig:
    k: int = 5
    partitions: int = 3
    epsilon: float = 0.7     # per-flag weight multiplier
    seed: int = 0
    clf: ClassifierConfig = field(default_factory=ClassifierConfig)
    feat: FeaturizeConfig = field(default_factory=FeaturizeConfig)

    def __post_init__(self):
        if self.partitions < 1:
            raise ValueError("partitions must be >= 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")


@dataclass
class SampleWeights:
    w: np.ndarray       # length N, entries in (0, 1]; w[i] = epsilon ** flags[i]
    flags: np.ndarray   # per-sample count of disagreeing partitions


def run_wscw(ds: WeakDataset, cfg: WscwConfig, fold_predict=None,
             train_final: bool = True, collect_audit=None, noisy=None):
    """Flag disagreeing samples over repeated partitions, then train downweighted.

    Disagreement is judged on hard labels after multi-fold probability
    averaging: a sample tested by several folds gets one verdict per
    partition.  ``noisy`` overrides the majority-vote weak labels (used when
    the caller injects its own noise).  Returns
    ``(SampleWeights, TextModel | None)``.
    """
    if noisy is None:
        noisy = majority_vote(ds, ds.t, cfg.seed)
    matched = ds.matched_mask
    flags = np.zeros(ds.n_samples, dtype=np.int64)

    for part in range(cfg.partitions):
        plan = plan_by_lf(ds, cfg.k, 0.0, derive_seed(cfg.seed, 400, part))
        clf_cfg = ClassifierConfig(
            learning_rate=cfg.clf.learning_rate, epochs=cfg.clf.epochs,
            patience=cfg.clf.patience, batch_size=cfg.clf.batch_size,
            l2=cfg.clf.l2, seed=derive_seed(cfg.seed, 500, part),
        )
        probs = estimate_oos(ds, noisy, plan, cfg.feat, clf_cfg, fold_predict)
        pred = np.argmax(probs.probs, axis=1)
        flags += ((pred != noisy.labels) & matched).astype(np.int64)
        if collect_audit is not None:
            collect_audit(plan, probs)

    weights = SampleWeights(cfg.epsilon ** flags.astype(float), flags)
    model = None
    if train_final:
        model = train_text_model(ds.texts, noisy.labels, ds.num_classes,
                                 sample_weights=weights.w,
                                 feat_cfg=cfg.feat, clf_cfg=cfg.clf)
    return weights, model
