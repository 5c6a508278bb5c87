import numpy as np
import pytest

from textscreen.corpus import CONTROL, DIAGNOSED
from textscreen.features import FeatureVector
from textscreen.models import (
    DegenerateDataError,
    DivergenceError,
    EmbeddingHead,
    LogisticModel,
    MlpModel,
    ModelError,
    TrainConfig,
    labels_to_targets,
    linear_gradients,
    load_model,
    mlp_gradients,
    mlp_init,
    predict_proba,
    predict_proba_batch,
    save_model,
    train_embedding_head,
    train_logistic,
    train_mlp,
)


def fv(values, dimension=None):
    values = np.asarray(values, dtype=float)
    dimension = dimension or len(values)
    return FeatureVector(indices=np.arange(len(values)), values=values, dimension=dimension)


def separable_pairs(n=60, dim=6, seed=0):
    """Sparse-ish pairs with a disjoint-support class signal."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        label = DIAGNOSED if i % 2 else CONTROL
        vec = np.zeros(dim)
        half = dim // 2
        block = slice(0, half) if label == DIAGNOSED else slice(half, dim)
        vec[block] = rng.uniform(0.5, 1.0, size=half)
        pairs.append((fv(vec), label))
    return pairs


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.epochs, cfg.learning_rate, cfg.batch_size) == (5, 0.1, 32)
        assert cfg.l2_penalty == 1e-4
        assert cfg.seed == 0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epochs": 0},
            {"learning_rate": 0.0},
            {"learning_rate": -1.0},
            {"batch_size": 0},
            {"l2_penalty": -0.1},
            {"seed": -1},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ModelError):
            TrainConfig(**kwargs)


class TestLabels:
    def test_mapping(self):
        targets = labels_to_targets([DIAGNOSED, CONTROL, DIAGNOSED])
        assert targets.tolist() == [1.0, 0.0, 1.0]

    def test_unknown_label(self):
        with pytest.raises(ModelError, match="unknown label"):
            labels_to_targets([DIAGNOSED, "unsure"])


def numeric_gradient(loss_fn, params, eps=1e-5):
    """Central finite differences over a flat parameter vector."""
    grad = np.zeros_like(params)
    for i in range(len(params)):
        bumped = params.copy()
        bumped[i] += eps
        up = loss_fn(bumped)
        bumped[i] -= 2 * eps
        down = loss_fn(bumped)
        grad[i] = (up - down) / (2 * eps)
    return grad


def relative_error(analytic, numeric):
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0:
        return 0.0
    return np.linalg.norm(analytic - numeric) / denom


class TestGradients:
    def test_linear_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(7, 4))
        y = rng.integers(0, 2, size=7).astype(float)
        w = rng.normal(size=4)
        b = 0.3
        l2 = 0.01
        grad_w, grad_b, _ = linear_gradients(w, b, X, y, l2)
        analytic = np.concatenate([grad_w, [grad_b]])

        def loss_at(flat):
            return linear_gradients(flat[:4], float(flat[4]), X, y, l2)[2]

        numeric = numeric_gradient(loss_at, np.concatenate([w, [b]]))
        assert relative_error(analytic, numeric) <= 1e-4

    def test_mlp_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(6, 3))
        y = rng.integers(0, 2, size=6).astype(float)
        params = mlp_init(3, 4, rng)
        grads, _ = mlp_gradients(params, X, y, 0.01)
        shapes = [p.shape if isinstance(p, np.ndarray) else () for p in params]

        def pack(parts):
            return np.concatenate([np.ravel(p) for p in parts])

        def unpack(flat):
            out, pos = [], 0
            for shape in shapes:
                size = int(np.prod(shape)) if shape else 1
                chunk = flat[pos : pos + size]
                out.append(chunk.reshape(shape) if shape else float(chunk[0]))
                pos += size
            return tuple(out)

        def loss_at(flat):
            return mlp_gradients(unpack(flat), X, y, 0.01)[1]

        numeric = numeric_gradient(loss_at, pack(params))
        assert relative_error(pack(grads), numeric) <= 1e-3

    def test_bias_is_not_regularized(self):
        X = np.zeros((4, 2))
        y = np.array([0.0, 1.0, 0.0, 1.0])
        w = np.array([2.0, -3.0])
        _, grad_b_l2, _ = linear_gradients(w, 5.0, X, y, 10.0)
        _, grad_b_none, _ = linear_gradients(w, 5.0, X, y, 0.0)
        assert grad_b_l2 == grad_b_none


class TestTrainLogistic:
    def test_learns_separable_data(self):
        pairs = separable_pairs()
        model = train_logistic(pairs, TrainConfig(epochs=30))
        correct = sum(
            (predict_proba(model, x) >= 0.5) == (label == DIAGNOSED)
            for x, label in pairs
        )
        assert correct == len(pairs)

    def test_deterministic_bitwise(self):
        pairs = separable_pairs()
        cfg = TrainConfig(seed=9)
        a = train_logistic(pairs, cfg)
        b = train_logistic(pairs, cfg)
        assert a.weights.tolist() == b.weights.tolist()
        assert a.bias == b.bias

    def test_seed_changes_trajectory(self):
        pairs = separable_pairs()
        a = train_logistic(pairs, TrainConfig(seed=1, epochs=2))
        b = train_logistic(pairs, TrainConfig(seed=2, epochs=2))
        assert a.weights.tolist() != b.weights.tolist()

    def test_loss_decreases_full_batch(self):
        pairs = separable_pairs()
        from textscreen.features import stack_vectors

        X = stack_vectors([x for x, _ in pairs])
        y = labels_to_targets([label for _, label in pairs])
        losses = []
        for epochs in (1, 5, 15):
            model = train_logistic(
                pairs,
                TrainConfig(epochs=epochs, learning_rate=0.01, batch_size=len(pairs),
                            l2_penalty=0.0),
            )
            losses.append(linear_gradients(model.weights, model.bias, X, y, 0.0)[2])
        assert losses[0] > losses[1] > losses[2]

    def test_single_class_rejected(self):
        pairs = [(fv([1.0, 0.0]), DIAGNOSED), (fv([0.5, 0.1]), DIAGNOSED)]
        with pytest.raises(DegenerateDataError):
            train_logistic(pairs, TrainConfig())

    def test_empty_rejected(self):
        with pytest.raises(ModelError):
            train_logistic([], TrainConfig())

    def test_divergence_raises_with_epoch(self):
        # an absurd step size makes the weights oscillate and overflow
        pairs = separable_pairs(n=16, dim=4)
        cfg = TrainConfig(epochs=50, learning_rate=1e6, batch_size=4, l2_penalty=1.0)
        with pytest.raises(DivergenceError, match="epoch"):
            train_logistic(pairs, cfg)

    def test_uneven_last_batch(self):
        pairs = separable_pairs(n=10)
        model = train_logistic(pairs, TrainConfig(batch_size=3))
        assert np.all(np.isfinite(model.weights))


class TestTrainMlp:
    def test_init_bounds(self):
        rng = np.random.default_rng(0)
        w1, b1, w2, b2 = mlp_init(16, 8, rng)
        assert np.all(np.abs(w1) <= 1 / np.sqrt(16))
        assert np.all(np.abs(w2) <= 1 / np.sqrt(8))
        assert b1.tolist() == [0.0] * 8
        assert b2 == 0.0

    def test_learns_xor(self):
        # not linearly separable, so this capability is specific to the MLP
        points = [
            ((-1.0, -1.0), CONTROL),
            ((1.0, 1.0), CONTROL),
            ((-1.0, 1.0), DIAGNOSED),
            ((1.0, -1.0), DIAGNOSED),
        ]
        train = [(fv(p), label) for p, label in points for _ in range(25)]
        cfg = TrainConfig(epochs=300, learning_rate=0.5, batch_size=100,
                          l2_penalty=0.0, seed=0)
        model = train_mlp(train, 4, cfg)
        for p, label in points:
            prob = predict_proba(model, fv(p))
            assert (prob >= 0.5) == (label == DIAGNOSED), (p, prob)

    def test_deterministic_bitwise(self):
        pairs = separable_pairs(n=20)
        cfg = TrainConfig(epochs=3, seed=4)
        a = train_mlp(pairs, 8, cfg)
        b = train_mlp(pairs, 8, cfg)
        assert a.hidden_weights.tolist() == b.hidden_weights.tolist()
        assert a.output_weights.tolist() == b.output_weights.tolist()

    def test_hidden_units_validated(self):
        with pytest.raises(ModelError):
            train_mlp(separable_pairs(n=4), 0, TrainConfig())

    def test_single_class_rejected(self):
        pairs = [(fv([1.0, 0.0]), CONTROL), (fv([0.5, 0.1]), CONTROL)]
        with pytest.raises(DegenerateDataError):
            train_mlp(pairs, 4, TrainConfig())

    def test_divergence_raises(self):
        pairs = separable_pairs(n=16, dim=4)
        cfg = TrainConfig(epochs=50, learning_rate=1e6, batch_size=4, l2_penalty=1.0)
        with pytest.raises(DivergenceError):
            train_mlp(pairs, 4, cfg)


class TestTrainEmbeddingHead:
    def _cluster_pairs(self, n=100, dim=8, seed=2):
        rng = np.random.default_rng(seed)
        pairs = []
        for i in range(n):
            label = DIAGNOSED if i % 2 else CONTROL
            center = 3.0 if label == DIAGNOSED else -3.0
            pairs.append((rng.normal(center, 1.0, size=dim), label))
        return pairs

    def test_learns_clusters(self):
        pairs = self._cluster_pairs()
        model = train_embedding_head(pairs, TrainConfig(epochs=10))
        correct = sum(
            (predict_proba(model, x) >= 0.5) == (label == DIAGNOSED)
            for x, label in pairs
        )
        assert correct / len(pairs) >= 0.95

    def test_dimension_recorded(self):
        model = train_embedding_head(self._cluster_pairs(n=10, dim=5), TrainConfig())
        assert model.dimension == 5

    def test_mixed_dimensions_rejected(self):
        pairs = [(np.zeros(3), DIAGNOSED), (np.zeros(4), CONTROL)]
        with pytest.raises(ModelError, match="dimension"):
            train_embedding_head(pairs, TrainConfig())

    def test_single_class_rejected(self):
        pairs = [(np.ones(3), DIAGNOSED), (np.zeros(3), DIAGNOSED)]
        with pytest.raises(DegenerateDataError):
            train_embedding_head(pairs, TrainConfig())


class TestPredict:
    def test_sparse_and_dense_agree(self):
        pairs = separable_pairs(n=20)
        model = train_logistic(pairs, TrainConfig(epochs=3))
        for x, _ in pairs[:5]:
            assert predict_proba(model, x) == pytest.approx(
                predict_proba(model, x.to_dense()), abs=1e-15
            )

    def test_batch_matches_single(self):
        pairs = separable_pairs(n=20)
        from textscreen.features import stack_vectors

        for model in (
            train_logistic(pairs, TrainConfig(epochs=3)),
            train_mlp(pairs, 4, TrainConfig(epochs=3)),
        ):
            X = stack_vectors([x for x, _ in pairs])
            batch = predict_proba_batch(model, X)
            singles = [predict_proba(model, x) for x, _ in pairs]
            np.testing.assert_allclose(batch, singles, rtol=0, atol=1e-15)

    def test_probabilities_in_unit_interval(self):
        pairs = separable_pairs(n=20)
        model = train_logistic(pairs, TrainConfig(epochs=3))
        for x, _ in pairs:
            assert 0.0 <= predict_proba(model, x) <= 1.0

    def test_dimension_mismatch(self):
        model = LogisticModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(ModelError, match="dimension"):
            predict_proba(model, fv([1.0, 2.0]))


class TestModelFiles:
    def test_logistic_round_trip(self, tmp_path):
        pairs = separable_pairs(n=12)
        model = train_logistic(pairs, TrainConfig(epochs=2))
        path = tmp_path / "model.json"
        save_model(model, path, config=TrainConfig(epochs=2))
        loaded = load_model(path)
        assert isinstance(loaded, LogisticModel)
        assert loaded.weights.tolist() == model.weights.tolist()
        assert loaded.bias == model.bias

    def test_mlp_round_trip(self, tmp_path):
        model = train_mlp(separable_pairs(n=12), 4, TrainConfig(epochs=2))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, MlpModel)
        assert loaded.hidden_weights.tolist() == model.hidden_weights.tolist()
        assert loaded.output_bias == model.output_bias

    def test_head_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        pairs = [
            (rng.normal(size=4), DIAGNOSED if i % 2 else CONTROL) for i in range(10)
        ]
        model = train_embedding_head(pairs, TrainConfig(epochs=2))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, EmbeddingHead)
        assert loaded.embedding_dim == 4

    def test_version_mismatch_rejected(self, tmp_path):
        model = LogisticModel(weights=np.zeros(2), bias=0.0)
        path = tmp_path / "model.json"
        save_model(model, path)
        import json

        payload = json.loads(path.read_text())
        payload["format_version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelError, match="version"):
            load_model(path)

    def test_unknown_kind_rejected(self, tmp_path):
        import json

        path = tmp_path / "model.json"
        path.write_text(json.dumps({"format_version": 1, "kind": "tree", "params": {}}))
        with pytest.raises(ModelError, match="kind"):
            load_model(path)
