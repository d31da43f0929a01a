import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccbr.classify import (
    CLASSIFIER_KINDS,
    CentroidModel,
    LinearProbModel,
    SubsetModel,
    WindowModel,
    centroid_fit,
    dumps,
    kmeans_fit,
    loads,
    logistic_fit,
    logistic_objective,
    make_classifier,
    platt_fit,
    prune_weights,
    quantize_rows,
    quantize_weights,
    svm_platt_fit,
    tree_fit,
    window_fit,
)
from ccbr.errors import ConfigError, DegenerateLabelsError, ShapeError
from helpers import blobs
from oracles import finite_difference_grad, logistic_gd, logistic_loss, tree_walk


def _contract(p, k):
    p = np.atleast_2d(p)
    assert p.shape[1] == k
    assert np.all(p >= 0)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


class TestContract:
    @settings(max_examples=12, deadline=None)
    @given(seed=st.integers(0, 10**6), kind=st.sampled_from(CLASSIFIER_KINDS))
    def test_every_backend_returns_probabilities(self, seed, kind):
        r = np.random.default_rng(seed)
        k = int(r.integers(2, 5))
        x = r.standard_normal((60, 3)) * r.uniform(0.1, 10)
        labels = r.integers(0, k, 60)
        labels[:k] = np.arange(k)
        model = make_classifier(kind, C=1.0)(x, labels, k)
        probe = np.vstack([r.standard_normal((40, 3)) * 1e3, np.zeros((1, 3)), x[:5]])
        _contract(model.predict_proba(probe), k)

    def test_absent_class_gets_zero(self, rng):
        x = rng.standard_normal((30, 2))
        labels = np.where(x[:, 0] > 0, 3, 0)
        for kind in ("centroid", "window"):
            model = make_classifier(kind)(x, labels, 5)
            assert isinstance(model, SubsetModel)
            p = model.predict_proba(x)
            _contract(p, 5)
            assert np.all(p[:, [1, 2, 4]] == 0)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            make_classifier("forest")

    def test_feature_count_checked(self, rng):
        x, y = blobs(rng, 20, [[0, 0], [5, 5]])
        with pytest.raises(ShapeError):
            logistic_fit(x, y).predict_proba(np.zeros((1, 3)))


class TestLogistic:
    def test_separable_1d(self, rng):
        x, y = blobs(rng, 100, [[-5.0], [5.0]])
        model = logistic_fit(x, y, C=1.0)
        assert np.all(model.predict(x) == y)
        p = model.predict_proba(np.array([[-8.0], [8.0]]))
        assert p[0, 0] >= 0.9 and p[1, 1] >= 0.9

    def test_random_labels_chance(self, rng):
        k = 4
        x = rng.standard_normal((4000, 5))
        y = rng.integers(0, k, 4000)
        model = logistic_fit(x[:2000], y[:2000])
        acc = np.mean(model.predict(x[2000:]) == y[2000:])
        assert abs(acc - 1 / k) < 0.05

    def test_matches_gradient_descent_oracle(self, rng):
        x, y = blobs(rng, 14, [[0, 0], [2, 1], [0, 2]], scale=1.0)
        x, y = x[:40], y[:40]
        C = 1.0
        model = logistic_fit(x, y, C=C)
        theta = np.column_stack([model.weights, model.biases]).ravel()
        ref = logistic_gd(x, y, C, 3)
        assert abs(logistic_loss(theta, x, y, C, 3) - logistic_loss(ref, x, y, C, 3)) < 1e-4
        g = finite_difference_grad(lambda th: logistic_loss(th, x, y, C, 3), theta)
        assert np.max(np.abs(g)) <= 1e-5

    def test_objective_gradient_matches_finite_differences(self, rng):
        x = rng.standard_normal((25, 3))
        y = rng.integers(0, 4, 25)
        theta = rng.standard_normal(4 * 4)
        value, grad = logistic_objective(theta, x, y, 0.7)
        assert value == pytest.approx(logistic_loss(theta, x, y, 0.7, 4), rel=1e-12)
        fd = finite_difference_grad(lambda th: logistic_objective(th, x, y, 0.7)[0], theta)
        np.testing.assert_allclose(grad, fd, rtol=1e-4, atol=1e-8)

    def test_deterministic(self, rng):
        x, y = blobs(rng, 30, [[0, 0], [1, 1], [2, 0]])
        a, b = logistic_fit(x, y), logistic_fit(x, y)
        assert a.weights.tobytes() == b.weights.tobytes()

    def test_single_class(self):
        with pytest.raises(DegenerateLabelsError):
            logistic_fit(np.zeros((5, 2)), np.zeros(5, dtype=int))

    def test_bad_C(self, rng):
        x, y = blobs(rng, 5, [[0], [1]])
        with pytest.raises(ConfigError):
            logistic_fit(x, y, C=0.0)


class TestSVM:
    def test_separable_no_violations(self, rng):
        x, y = blobs(rng, 60, [[-4, 0], [4, 0]], scale=0.7)
        model = svm_platt_fit(x, y, C=1.0)
        s = model.decision_function(x)
        margin = np.where(y == 1, s[:, 1], -s[:, 1])
        assert np.all(margin >= 1 - 1e-3)
        p = model.predict_proba(x)
        assert np.all(p[np.arange(len(y)), y] > 0.5)

    def test_agrees_with_logistic(self, rng):
        # measured agreement 100% on this set; threshold 95%
        x, y = blobs(rng, 150, [[0, 0], [6, 0], [0, 6]])
        xt, yt = blobs(rng, 150, [[0, 0], [6, 0], [0, 6]])
        a = logistic_fit(x, y).predict(xt)
        b = svm_platt_fit(x, y).predict(xt)
        assert np.mean(a == b) >= 0.95

    def test_small_C_shrinks(self, rng):
        x, y = blobs(rng, 50, [[0, 0], [3, 3], [0, 3]])
        for fit in (svm_platt_fit, logistic_fit):
            big = np.linalg.norm(fit(x, y, C=1.0).weights)
            tiny = np.linalg.norm(fit(x, y, C=1e-6).weights)
            assert tiny <= 1e-2 * big

    def test_platt_orders_scores(self, rng):
        s = np.r_[rng.normal(-2, 1, 200), rng.normal(2, 1, 200)]
        a, b = platt_fit(s, np.r_[np.zeros(200), np.ones(200)] > 0)
        assert a < 0
        assert 1 / (1 + np.exp(a * 3 + b)) > 0.9


class TestCentroid:
    def test_l1_nearest(self):
        model = CentroidModel(np.array([[0.0, 0.0], [10.0, 10.0]]), "l1", 1.0)
        assert model.predict(np.array([1.0, 2.0])) == 0

    def test_cosine_scale_invariant(self, rng):
        model = centroid_fit(rng.standard_normal((40, 3)), np.repeat([0, 1], 20), "cosine")
        x = rng.standard_normal(3)
        np.testing.assert_allclose(model.predict_proba(x), model.predict_proba(5 * x), atol=1e-15)

    def test_l1_uses_median(self):
        x = np.array([[0.0], [1.0], [100.0], [5.0], [6.0], [7.0]])
        model = centroid_fit(x, np.array([0, 0, 0, 1, 1, 1]), "l1")
        np.testing.assert_array_equal(model.centroids[:, 0], [1.0, 6.0])

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), temp=st.floats(1e-3, 1e3), metric=st.sampled_from(["l1", "l2", "cosine"]))
    def test_argmax_is_nearest_for_any_temperature(self, seed, temp, metric):
        r = np.random.default_rng(seed)
        model = CentroidModel(r.standard_normal((4, 3)), metric, temp)
        x = r.standard_normal((30, 3))
        d = model.distances(x)
        # rows with (near-)ties carry no information about the rule
        srt = np.sort(d, axis=1)
        clear = srt[:, 1] - srt[:, 0] > 1e-9
        np.testing.assert_array_equal(model.predict(x)[clear], np.argmin(d, axis=1)[clear])

    def test_empty_class(self, rng):
        with pytest.raises(DegenerateLabelsError):
            centroid_fit(rng.standard_normal((6, 2)), np.array([0, 0, 0, 2, 2, 2]), n_classes=3)

    def test_kmeans_recovers_blobs(self, rng):
        means = np.array([[0.0, 0.0], [10.0, 0.0]])
        x, _ = blobs(rng, 300, means)
        model = kmeans_fit(x, 2, seed=3)
        best = min(
            max(np.linalg.norm(model.centroids[list(perm)] - means, axis=1))
            for perm in itertools.permutations(range(2))
        )
        assert best < 0.5

    def test_kmeans_empty_cluster_reseeds(self):
        # three identical points and one outlier; k=3 forces an empty cluster
        x = np.array([[0.0], [0.0], [0.0], [10.0]])
        model = kmeans_fit(x, 3, seed=0)
        assert np.all(np.isfinite(model.centroids))

    def test_kmeans_bad_k(self, rng):
        with pytest.raises(ConfigError):
            kmeans_fit(rng.standard_normal((10, 2)), 1)


class TestWindow:
    def test_inside_one_window(self, rng):
        x, y = blobs(rng, 50, [[0, 0], [10, 10]])
        model = window_fit(x, y, coverage=0.9)
        np.testing.assert_array_equal(model.predict_proba(np.array([0.0, 0.0])), [1.0, 0.0])

    def test_outside_uses_fallback(self, rng):
        x, y = blobs(rng, 50, [[0, 0], [10, 10]])
        model = window_fit(x, y, coverage=0.9)
        probe = np.array([[5.0, -20.0]])
        assert not model.contains(probe).any()
        np.testing.assert_array_equal(model.predict_proba(probe), model.fallback.predict_proba(probe))

    def test_full_coverage_disjoint_ranges(self, rng):
        x = np.r_[rng.uniform(0, 1, 40), rng.uniform(2, 3, 40), rng.uniform(4, 5, 40)][:, None]
        y = np.repeat([0, 1, 2], 40)
        model = window_fit(x, y, coverage=1.0)
        inside = model.contains(x)
        assert np.all(inside.sum(axis=1) == 1)
        assert np.mean(model.predict(x) == y) == 1.0

    @pytest.mark.parametrize("coverage", [0.5, 0.2, 1.01])
    def test_bad_coverage(self, rng, coverage):
        with pytest.raises(ConfigError):
            window_fit(rng.standard_normal((10, 1)), np.repeat([0, 1], 5), coverage=coverage)

    def test_bounds_invariant(self):
        with pytest.raises(ConfigError):
            WindowModel(np.array([[1.0]]), np.array([[0.0]]), CentroidModel(np.zeros((1, 1))))


class TestTree:
    def test_single_split_1d(self, rng):
        x = np.r_[rng.uniform(-3, -0.5, 40), rng.uniform(0.5, 3, 40)][:, None]
        y = (x[:, 0] > 0).astype(int)
        model = tree_fit(x, y, max_depth=1)
        assert model.n_nodes == 3
        assert abs(model.threshold[0]) <= 0.5 + 1e-12
        assert np.all(model.predict(x) == y)

    def test_pure_labels_single_leaf(self, rng):
        model = tree_fit(rng.standard_normal((20, 2)), np.full(20, 2), n_classes=3)
        assert model.n_nodes == 1
        np.testing.assert_array_equal(model.predict_proba(np.zeros(2)), [0, 0, 1])

    def test_oblique_beats_axis_on_diagonal(self, rng):
        x = rng.uniform(-1, 1, (400, 2))
        y = (x[:, 0] + x[:, 1] > 0).astype(int)
        acc_axis = np.mean(tree_fit(x, y, "axis", max_depth=1).predict(x) == y)
        acc_obl = np.mean(tree_fit(x, y, "oblique", max_depth=1).predict(x) == y)
        assert acc_obl >= acc_axis
        assert acc_obl > 0.95

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10**6), kind=st.sampled_from(["axis", "oblique"]), depth=st.integers(1, 5))
    def test_matches_brute_force_walk(self, seed, kind, depth):
        r = np.random.default_rng(seed)
        x = r.standard_normal((80, 3))
        y = r.integers(0, 3, 80)
        model = tree_fit(x, y, kind, max_depth=depth, min_leaf=2, n_classes=3)
        probe = r.standard_normal((50, 3)) * 2
        expect = np.array([tree_walk(model, row) for row in probe])
        np.testing.assert_array_equal(model.predict_proba(probe), expect)
        assert model.depth() <= depth
        _contract(model.value, 3)

    def test_bad_params(self, rng):
        with pytest.raises(ConfigError):
            tree_fit(rng.standard_normal((5, 1)), np.array([0, 1, 0, 1, 0]), max_depth=0)


def _separable(rng, n_per=100, d=10):
    centers = np.zeros((3, d))
    centers[0, 0], centers[1, 1], centers[2, 2] = 6.0, 6.0, 6.0
    return blobs(rng, n_per, centers)


class TestCompression:
    def test_bits_24_keeps_argmax(self, rng):
        x, y = _separable(rng)
        model = logistic_fit(x, y)
        xt, _ = _separable(rng)
        s = model.decision_function(xt)
        top2 = np.sort(s, axis=1)[:, -2:]
        clear = top2[:, 1] - top2[:, 0] > 1e-4
        q = quantize_weights(model, 24)
        np.testing.assert_array_equal(q.predict(xt)[clear], model.predict(xt)[clear])

    def test_constant_row(self):
        w = np.full((2, 5), 0.37)
        np.testing.assert_array_equal(quantize_rows(w, 3), w)

    def test_levels_and_range(self, rng):
        w = rng.standard_normal((3, 200))
        q = quantize_rows(w, 3)
        for row, qrow in zip(w, q):
            assert np.unique(qrow).size <= 8
            assert np.max(np.abs(qrow)) <= np.max(np.abs(row)) + 1e-15

    def test_sixteen_bits_at_least_two(self, rng):
        x, y = _separable(rng)
        xt, yt = _separable(rng)
        model = logistic_fit(x, y)
        acc = {b: np.mean(quantize_weights(model, b).predict(xt) == yt) for b in (2, 16)}
        assert acc[16] >= acc[2]

    def test_biases_untouched_and_contract(self, rng):
        x, y = _separable(rng)
        model = svm_platt_fit(x, y)
        q = quantize_weights(model, 4)
        assert q.biases.tobytes() == model.biases.tobytes()
        _contract(q.predict_proba(x), 3)

    def test_oblique_tree(self, rng):
        x, y = _separable(rng)
        tree = tree_fit(x, y, "oblique", max_depth=3)
        q = quantize_weights(tree, 8)
        assert q.threshold.tobytes() == tree.threshold.tobytes()
        _contract(q.predict_proba(x), 3)

    @pytest.mark.parametrize("bits", [1, 25, 4.0])
    def test_bad_bits(self, rng, bits):
        x, y = _separable(rng, 10)
        with pytest.raises(ConfigError):
            quantize_weights(logistic_fit(x, y), bits)

    def test_axis_tree_rejected(self, rng):
        x, y = _separable(rng, 10)
        with pytest.raises(ConfigError):
            quantize_weights(tree_fit(x, y), 8)

    def test_prune_zero_is_identity(self, rng):
        x, y = _separable(rng, 20)
        model = logistic_fit(x, y)
        assert prune_weights(model, 0.0).weights.tobytes() == model.weights.tobytes()

    def test_prune_half_of_ten(self):
        model = LinearProbModel(np.arange(1.0, 11.0).reshape(2, 5), np.zeros(2), 1.0)
        pruned = prune_weights(model, 0.5)
        assert np.sum(pruned.weights == 0) == 5
        np.testing.assert_array_equal(pruned.weights.ravel()[5:], np.arange(6.0, 11.0))
        assert pruned.sparsity == 0.5

    def test_prune_keeps_accuracy(self, rng):
        # measured drop 0.0 points on this set; threshold 5 points
        x, y = _separable(rng)
        xt, yt = _separable(rng)
        model = logistic_fit(x, y)
        base = np.mean(model.predict(xt) == yt)
        pruned = np.mean(prune_weights(model, 0.3).predict(xt) == yt)
        assert base - pruned <= 0.05

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6), bits=st.integers(2, 24), sparsity=st.floats(0.0, 0.95))
    def test_idempotent(self, seed, bits, sparsity):
        r = np.random.default_rng(seed)
        model = LinearProbModel(r.standard_normal((3, 7)), r.standard_normal(3), 1.0)
        q = quantize_weights(model, bits)
        assert quantize_weights(q, bits).weights.tobytes() == q.weights.tobytes()
        p = prune_weights(model, sparsity)
        assert prune_weights(p, sparsity).weights.tobytes() == p.weights.tobytes()
        assert abs(np.sum(p.weights == 0) - sparsity * p.weights.size) <= 1


class TestClassifierIO:
    @pytest.mark.parametrize("kind", CLASSIFIER_KINDS)
    def test_round_trip_bit_exact(self, rng, kind):
        x, y = blobs(rng, 30, [[0, 0], [3, 1], [1, 3]])
        model = make_classifier(kind)(x, y, 3)
        back = loads(dumps(model))
        assert type(back) is type(model)
        assert dumps(back) == dumps(model)
        probe = rng.standard_normal((20, 2)) * 3
        assert back.predict_proba(probe).tobytes() == model.predict_proba(probe).tobytes()

    def test_subset_round_trip(self, rng):
        x = rng.standard_normal((30, 2))
        model = make_classifier("centroid")(x, np.where(x[:, 0] > 0, 2, 0), 4)
        back = loads(dumps(model))
        assert isinstance(back, SubsetModel)
        assert back.predict_proba(x).tobytes() == model.predict_proba(x).tobytes()
