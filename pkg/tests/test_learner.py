"""Backends, leakage-free splits, metrics, CV, and model serialization."""

import json
import math

import numpy as np
import pytest

from axiolearn.learner import (
    DEFAULT_GRIDS,
    SingularSystemError,
    cross_validate,
    explained_variance,
    fit,
    load_model,
    predict,
    predict_detailed,
    rmse,
    save_model,
    split_no_leakage,
)


def toy_matrix(m, seed=0):
    """Symmetric feature matrix with unit diagonal, like an axiom matrix."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.1, 0.9, size=(m, m))
    sym = (base + base.T) / 2
    np.fill_diagonal(sym, 1.0)
    return sym


class TestMetrics:
    def test_rmse_identity(self):
        assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_rmse_hand_value(self):
        assert rmse([1.0, 0.0], [0.0, 0.0]) == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_rmse_length_mismatch(self):
        with pytest.raises(ValueError):
            rmse([1.0], [1.0, 2.0])

    def test_explained_variance_perfect(self):
        assert explained_variance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_explained_variance_degenerate_is_flagged(self):
        assert explained_variance([1.0, 1.1], [2.0, 2.0]) is None

    def test_explained_variance_needs_two_points(self):
        with pytest.raises(ValueError):
            explained_variance([1.0], [1.0])


class TestSplit:
    def test_shapes_10_axioms_80_percent(self):
        X = toy_matrix(10)
        y = np.arange(10.0)
        split = split_no_leakage(X, y, 0.8, seed=1)
        assert split.x_train.shape == (8, 8)
        assert split.x_test.shape == (2, 8)
        assert len(split.y_train) == 8 and len(split.y_test) == 2

    def test_same_seed_same_split(self):
        X = toy_matrix(12)
        y = np.arange(12.0)
        a = split_no_leakage(X, y, 0.75, seed=42)
        b = split_no_leakage(X, y, 0.75, seed=42)
        assert np.array_equal(a.train_indices, b.train_indices)
        assert np.array_equal(a.x_test, b.x_test)

    def test_indices_disjoint_and_cover(self):
        X = toy_matrix(9)
        split = split_no_leakage(X, np.zeros(9), 0.7, seed=3)
        combined = sorted([*split.train_indices, *split.test_indices])
        assert combined == list(range(9))

    def test_test_columns_restricted_to_train(self):
        X = toy_matrix(10)
        split = split_no_leakage(X, np.zeros(10), 0.8, seed=5)
        expect = X[np.ix_(split.test_indices, split.train_indices)]
        assert np.array_equal(split.x_test, expect)

    def test_degenerate_sizes_rejected(self):
        X = toy_matrix(3)
        with pytest.raises(ValueError, match="degenerate"):
            split_no_leakage(X, np.zeros(3), 0.99, seed=0)
        with pytest.raises(ValueError, match="train_frac"):
            split_no_leakage(X, np.zeros(3), 1.2, seed=0)


class TestBackends:
    def test_knn_k1_returns_own_score_on_training_row(self):
        X = toy_matrix(6)
        y = np.array([0.5, -0.5, 1.0, 0.0, 0.25, -1.0])
        model = fit("knn", X, y, {"k": 1})
        for i in range(6):
            assert predict(model, X[i]) == y[i]

    def test_knn_k1_train_rmse_exactly_zero(self):
        X = toy_matrix(15, seed=2)
        y = np.linspace(-1, 1, 15)
        model = fit("knn", X, y, {"k": 1})
        assert rmse(model.predict_batch(X), y) == 0.0

    def test_knn_k_too_large(self):
        with pytest.raises(ValueError, match="k=9"):
            fit("knn", toy_matrix(4), np.zeros(4), {"k": 9})

    def test_ridge_identity_recovery(self):
        y = np.array([0.3, -0.7, 0.1, 0.9])
        model = fit("ridge", np.eye(4), y, {"lam": 0.0})
        assert np.allclose(model.weights, y, atol=1e-12)
        assert predict(model, np.eye(4)[2]) == pytest.approx(y[2], abs=1e-12)

    def test_ridge_singular_when_lam_zero(self):
        X = np.ones((4, 3))  # rank 1
        with pytest.raises(SingularSystemError, match="lam > 0"):
            fit("ridge", X, np.zeros(4), {"lam": 0.0})
        fit("ridge", X, np.zeros(4), {"lam": 1e-3})  # regularized is fine

    def test_ridge_unit_vector_prediction(self):
        y = np.array([0.3, -0.7, 0.1, 0.9])
        model = fit("ridge", np.eye(4), y, {"lam": 0.0})
        for j in range(4):
            assert predict(model, np.eye(4)[j]) == pytest.approx(y[j], abs=1e-12)

    def test_tree_constant_target(self):
        X = toy_matrix(8)
        model = fit("tree_ensemble", X, np.full(8, 0.25), {"trees": 1, "depth": 1})
        assert predict(model, X[3]) == 0.25
        assert predict(model, np.zeros(8)) == 0.25

    def test_tree_deterministic_given_seed(self):
        X = toy_matrix(20, seed=4)
        y = np.sin(np.arange(20.0))
        m1 = fit("tree_ensemble", X, y, {"trees": 8, "depth": 3, "seed": 7})
        m2 = fit("tree_ensemble", X, y, {"trees": 8, "depth": 3, "seed": 7})
        assert np.array_equal(m1.predict_batch(X), m2.predict_batch(X))

    def test_tree_learns_split(self):
        # one informative feature: y follows its sign
        X = np.zeros((10, 3))
        X[:, 1] = np.linspace(0, 1, 10)
        y = (X[:, 1] > 0.5).astype(float)
        model = fit("tree_ensemble", X, y, {"trees": 16, "depth": 2, "seed": 0})
        assert rmse(model.predict_batch(X), y) < 0.2

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="backend"):
            fit("svm", np.eye(2), np.zeros(2))


class TestPredict:
    def test_clamping_recorded(self):
        model = fit("ridge", np.eye(2) * 0.1, np.array([1.0, 1.0]), {"lam": 0.0}, (-1.0, 1.0))
        detail = predict_detailed(model, np.array([1.0, 1.0]))
        assert detail.raw > 1.0
        assert detail.value == 1.0
        assert detail.clamped

    def test_within_range_not_clamped(self):
        model = fit("knn", toy_matrix(4), np.array([0.1, 0.2, 0.3, 0.4]), {"k": 2})
        detail = predict_detailed(model, toy_matrix(4)[0])
        assert not detail.clamped
        assert detail.value == detail.raw

    def test_dimension_mismatch(self):
        model = fit("knn", toy_matrix(4), np.zeros(4), {"k": 1})
        with pytest.raises(ValueError, match="length 4"):
            predict(model, np.zeros(5))

    def test_disjoint_range_clamps_low(self):
        model = fit("ridge", np.eye(2), np.array([-0.5, -0.5]), {"lam": 0.0}, (0.0, 1.0))
        assert predict(model, np.array([1.0, 0.0])) == 0.0


class TestCrossValidate:
    def test_constant_target_degenerate_variance(self):
        X = toy_matrix(10)
        report = cross_validate("knn", X, np.full(10, 0.5), folds=5, grid={"k": [1]}, seed=0)
        assert report.rmse == 0.0
        assert report.explained_variance is None
        assert report.degenerate_variance

    def test_same_seed_identical_reports(self):
        X = toy_matrix(20, seed=6)
        y = np.tanh(np.arange(20.0) / 5 - 2)
        a = cross_validate("knn", X, y, grid={"k": [1, 3]}, seed=9)
        b = cross_validate("knn", X, y, grid={"k": [1, 3]}, seed=9)
        assert a == b

    def test_single_column_target_ridge_recovery(self):
        """Exact linear recovery, and proof the leakage rule really drops
        test columns: the fold holding the target column cannot recover it."""
        X = toy_matrix(24, seed=8)
        y = X[:, 3].copy()
        report = cross_validate("ridge", X, y, folds=5, grid={"lam": [1e-10]}, seed=1)
        perm = np.random.default_rng(1).permutation(24)
        folds = [np.sort(p) for p in np.array_split(perm, 5)]
        for fold, (fold_rmse, _) in zip(folds, report.per_fold):
            if 3 in fold:
                assert fold_rmse > 1e-6  # target column was (correctly) hidden
            else:
                assert fold_rmse < 1e-6

    def test_leakage_guard_poisoned_test_columns(self):
        """Corrupting one fold's columns cannot change that fold's own
        metrics: its columns are never among its features."""
        X = toy_matrix(15, seed=3)
        y = np.linspace(-1, 1, 15)
        clean = cross_validate("knn", X, y, folds=3, grid={"k": [3]}, seed=2)

        perm = np.random.default_rng(2).permutation(15)
        folds = [np.sort(p) for p in np.array_split(perm, 3)]
        for f, fold in enumerate(folds):
            poisoned = X.copy()
            poisoned[:, fold] = 1e6
            result = cross_validate("knn", poisoned, y, folds=3, grid={"k": [3]}, seed=2)
            assert result.per_fold[f] == clean.per_fold[f]

    def test_holdout_split_ignores_test_columns_entirely(self):
        X = toy_matrix(12, seed=7)
        y = np.linspace(0, 1, 12)
        clean = split_no_leakage(X, y, 0.75, seed=4)
        poisoned = X.copy()
        poisoned[:, clean.test_indices] = 1e6
        dirty = split_no_leakage(poisoned, y, 0.75, seed=4)
        assert np.array_equal(clean.x_train, dirty.x_train)
        assert np.array_equal(clean.x_test, dirty.x_test)

    def test_tie_breaks_toward_simpler_model(self):
        # constant target: every k ties at rmse 0 -> smallest k wins
        X = toy_matrix(20)
        report = cross_validate("knn", X, np.full(20, 0.1), grid={"k": [9, 5, 1]}, seed=0)
        assert report.best_hyperparams == {"k": 1}

    def test_infeasible_knn_combos_skipped(self):
        X = toy_matrix(10)
        y = np.linspace(0, 1, 10)
        report = cross_validate("knn", X, y, folds=5, grid={"k": [1, 9]}, seed=0)
        assert report.best_hyperparams == {"k": 1}
        with pytest.raises(ValueError, match="feasible"):
            cross_validate("knn", X, y, folds=5, grid={"k": [9]}, seed=0)

    def test_baseline_present_and_sane(self):
        X = toy_matrix(16, seed=5)
        y = np.linspace(0, 1, 16)
        report = cross_validate("ridge", X, y, grid={"lam": [1e-2]}, seed=0)
        assert report.baseline_rmse > 0.0

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError, match="grid"):
            cross_validate("knn", toy_matrix(6), np.zeros(6), grid={})

    def test_default_grids_cover_backends(self):
        assert set(DEFAULT_GRIDS) == {"knn", "ridge", "tree_ensemble"}

    def test_report_renders(self):
        X = toy_matrix(10)
        report = cross_validate("knn", X, np.linspace(0, 1, 10), grid={"k": [1]}, seed=0)
        text = report.to_text()
        assert "rmse" in text and "knn" in text


class TestSerialization:
    @pytest.mark.parametrize("backend,params", [
        ("knn", {"k": 2}),
        ("ridge", {"lam": 0.01}),
        ("tree_ensemble", {"trees": 4, "depth": 3, "seed": 1}),
    ])
    def test_round_trip_identical_predictions(self, tmp_path, backend, params):
        X = toy_matrix(12, seed=1)
        y = np.cos(np.arange(12.0))
        model = fit(backend, X, y, params, (-1.0, 1.0))
        path = tmp_path / "model.json"
        save_model(model, path, meta={"kind": "SubClassOf"})
        loaded, meta = load_model(path)
        assert meta == {"kind": "SubClassOf"}
        assert loaded.score_range == model.score_range
        assert np.array_equal(loaded.predict_batch(X), model.predict_batch(X))

    def test_versioned_format_enforced(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format": "other", "version": 1}))
        with pytest.raises(ValueError, match="not a model file"):
            load_model(path)
        path.write_text(json.dumps({"format": "axiolearn-model", "version": 99}))
        with pytest.raises(ValueError, match="version"):
            load_model(path)

    def test_save_twice_byte_identical(self, tmp_path):
        X = toy_matrix(6)
        y = np.arange(6.0)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_model(fit("knn", X, y, {"k": 1}), p1)
        save_model(fit("knn", X, y, {"k": 1}), p2)
        assert p1.read_bytes() == p2.read_bytes()
