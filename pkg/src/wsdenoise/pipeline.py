"""Vocabulary + classifier bundle for training on raw documents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wsdenoise.featurize import FeaturizeConfig, Vocabulary, fit_vocabulary, transform
from wsdenoise.linear import ClassifierConfig, Model, predict_proba, train


@dataclass
class TextModel:
    vocab: Vocabulary
    model: Model

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        return predict_proba(self.model, transform(texts, self.vocab))

    def predict(self, texts: list[str]) -> np.ndarray:
        return np.argmax(self.predict_proba(texts), axis=1)


def train_text_model(texts, labels, num_classes, sample_weights=None,
                     feat_cfg: FeaturizeConfig | None = None,
                     clf_cfg: ClassifierConfig | None = None) -> TextModel:
    vocab = fit_vocabulary(texts, feat_cfg or FeaturizeConfig())
    features = transform(texts, vocab)
    model = train(features, labels, sample_weights=sample_weights,
                  cfg=clf_cfg or ClassifierConfig(), num_classes=num_classes)
    return TextModel(vocab, model)
