import numpy as np
import pytest

from wsdenoise.linear import (
    ClassifierConfig,
    Model,
    load_model,
    loss_and_grad,
    predict_proba,
    save_model,
    train,
)


def toy_separable():
    x = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.9]])
    y = np.array([0, 0, 1, 1])
    return x, y


def numeric_grad(weights, bias, x, y, sw, l2, step=1e-5):
    gw = np.zeros_like(weights)
    gb = np.zeros_like(bias)
    for idx in np.ndindex(weights.shape):
        wp, wm = weights.copy(), weights.copy()
        wp[idx] += step
        wm[idx] -= step
        lp, _, _ = loss_and_grad(wp, bias, x, y, sw, l2)
        lm, _, _ = loss_and_grad(wm, bias, x, y, sw, l2)
        gw[idx] = (lp - lm) / (2 * step)
    for idx in range(len(bias)):
        bp, bm = bias.copy(), bias.copy()
        bp[idx] += step
        bm[idx] -= step
        lp, _, _ = loss_and_grad(weights, bp, x, y, sw, l2)
        lm, _, _ = loss_and_grad(weights, bm, x, y, sw, l2)
        gb[idx] = (lp - lm) / (2 * step)
    return gw, gb


class TestGradient:
    def test_matches_central_differences(self, rng):
        for _ in range(10):
            n = int(rng.integers(3, 21))
            v = int(rng.integers(2, 11))
            k = int(rng.integers(2, 5))
            x = rng.normal(size=(n, v))
            y = rng.integers(k, size=n)
            sw = rng.uniform(0.1, 2.0, size=n)
            l2 = float(rng.uniform(0, 0.1))
            w = rng.normal(scale=0.5, size=(v, k))
            b = rng.normal(scale=0.5, size=k)
            _, gw, gb = loss_and_grad(w, b, x, y, sw, l2)
            ngw, ngb = numeric_grad(w, b, x, y, sw, l2)
            assert np.abs(gw - ngw).max() / max(np.abs(ngw).max(), 1e-8) < 1e-4
            assert np.abs(gb - ngb).max() / max(np.abs(ngb).max(), 1e-8) < 1e-4


class TestTrain:
    def test_separable_toy_reaches_full_accuracy(self):
        x, y = toy_separable()
        m = train(x, y, cfg=ClassifierConfig(learning_rate=1e-1, epochs=20, seed=0))
        assert (np.argmax(predict_proba(m, x), axis=1) == y).all()

    def test_uniform_weight_scaling_is_invariant(self):
        x, y = toy_separable()
        cfg = ClassifierConfig(learning_rate=1e-1, epochs=10, seed=4)
        m1 = train(x, y, cfg=cfg)
        m2 = train(x, y, sample_weights=np.full(4, 3.7), cfg=cfg)
        np.testing.assert_allclose(m1.weights, m2.weights, rtol=0, atol=0)
        np.testing.assert_allclose(m1.bias, m2.bias, rtol=0, atol=0)

    def test_zero_weight_sample_is_inert(self):
        x, y = toy_separable()
        y_flipped = y.copy()
        y_flipped[3] = 0  # mislabel the zero-weighted point
        w = np.array([1.0, 1.0, 1.0, 0.0])
        cfg = ClassifierConfig(learning_rate=1e-1, epochs=10, seed=4)
        m1 = train(x, y, sample_weights=w, cfg=cfg)
        m2 = train(x, y_flipped, sample_weights=w, cfg=cfg)
        np.testing.assert_array_equal(m1.weights, m2.weights)
        np.testing.assert_array_equal(m1.bias, m2.bias)

    def test_determinism(self, rng):
        x = rng.normal(size=(40, 6))
        y = rng.integers(3, size=40)
        cfg = ClassifierConfig(seed=9)
        m1 = train(x, y, cfg=cfg, num_classes=3)
        m2 = train(x, y, cfg=cfg, num_classes=3)
        assert (m1.weights == m2.weights).all() and (m1.bias == m2.bias).all()
        assert m1.training_log == m2.training_log

    def test_full_batch_loss_non_increasing(self):
        x, y = toy_separable()
        cfg = ClassifierConfig(learning_rate=1e-3, epochs=20, batch_size=4,
                               patience=20, seed=0)
        m = train(x, y, cfg=cfg)
        log = np.array(m.training_log)
        assert (np.diff(log) <= 1e-12).all()

    def test_exploding_lr_reports_epoch(self):
        x = np.array([[1e200, -1e200], [-1e200, 1e200]] * 8)
        y = np.array([0, 1] * 8)
        with np.errstate(all="ignore"), pytest.raises(RuntimeError, match="epoch"):
            train(x, y, cfg=ClassifierConfig(learning_rate=1e3, epochs=5,
                                             batch_size=4, seed=0))


class TestPredictProba:
    def test_zero_model_is_uniform(self):
        m = Model(weights=np.zeros((3, 4)), bias=np.zeros(4))
        p = predict_proba(m, np.ones((5, 3)))
        np.testing.assert_allclose(p, 0.25)

    def test_equal_logits_give_half(self):
        m = Model(weights=np.array([[1.0, 1.0]]), bias=np.zeros(2))
        p = predict_proba(m, np.array([[2.0]]))
        np.testing.assert_allclose(p, [[0.5, 0.5]])

    def test_rows_sum_to_one(self, rng):
        m = Model(weights=rng.normal(size=(8, 5)), bias=rng.normal(size=5))
        p = predict_proba(m, rng.normal(size=(1000, 8)))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


class TestSerialization:
    def test_round_trip_exact(self, tmp_path, rng):
        m = Model(weights=rng.normal(size=(4, 3)), bias=rng.normal(size=3),
                  training_log=[0.5, 0.25])
        path = tmp_path / "model.json"
        save_model(m, path)
        m2 = load_model(path)
        assert (m.weights == m2.weights).all()
        assert (m.bias == m2.bias).all()
        assert m.training_log == m2.training_log

    def test_version_check(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format_version": 99, "weights": [], "bias": [], "training_log": []}')
        with pytest.raises(ValueError, match="version"):
            load_model(path)
