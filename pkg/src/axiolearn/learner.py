"""Regression backends, leakage-free splits, grid-searched cross-validation.

All backends are deterministic given (inputs, seed): k-nearest-neighbours,
ridge regression solved via the regularized normal equations, and a bagged
ensemble of variance-reduction regression trees with seeded bootstraps.

Because the axiom similarity matrix is symmetric, a test row's columns for
test axioms leak the answer; every split here therefore restricts feature
columns to training indices only, both in the holdout split and inside
each cross-validation fold.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

BACKENDS = ("knn", "ridge", "tree_ensemble")

DEFAULT_GRIDS = {
    "knn": {"k": [1, 3, 5, 9]},
    "ridge": {"lam": [1e-4, 1e-2, 1.0, 10.0]},
    "tree_ensemble": {"trees": [32, 128], "depth": [4, 8]},
}

MODEL_FORMAT = "axiolearn-model"
MODEL_VERSION = 1


class SingularSystemError(ValueError):
    pass


def rmse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1 or len(pred) == 0:
        raise ValueError(f"rmse needs two equal-length vectors, got {pred.shape} and {truth.shape}")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def explained_variance(pred, truth) -> float | None:
    """1 - Var(truth - pred) / Var(truth); None when Var(truth) = 0
    (degenerate target, flagged rather than NaN)."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or len(pred) < 2:
        raise ValueError("explained variance needs two equal-length vectors of length >= 2")
    var = float(np.var(truth))
    if var == 0.0:
        return None
    return 1.0 - float(np.var(truth - pred)) / var


# --- models ------------------------------------------------------------------


class _Model:
    backend: str

    def __init__(self, hyperparams: dict, score_range: tuple[float, float]):
        self.hyperparams = dict(hyperparams)
        self.score_range = tuple(score_range)
        self.n_features: int = 0

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state(self) -> dict:
        raise NotImplementedError


class KnnModel(_Model):
    backend = "knn"

    def __init__(self, hyperparams, score_range, X, y):
        super().__init__(hyperparams, score_range)
        self.k = int(hyperparams["k"])
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.n_features = self.X.shape[1]

    def predict_batch(self, X):
        out = np.empty(len(X))
        for i, v in enumerate(X):
            # exact per-row distances: a training row queried against itself
            # gives a hard 0, which the matmul shortcut cannot guarantee
            d2 = np.sum((self.X - v) ** 2, axis=1)
            nearest = np.argsort(d2, kind="stable")[: self.k]
            out[i] = np.mean(self.y[nearest])
        return out

    def state(self):
        return {"X": self.X.tolist(), "y": self.y.tolist()}


class RidgeModel(_Model):
    backend = "ridge"

    def __init__(self, hyperparams, score_range, weights):
        super().__init__(hyperparams, score_range)
        self.lam = float(hyperparams["lam"])
        self.weights = np.asarray(weights, dtype=float)
        self.n_features = len(self.weights)

    @classmethod
    def fit(cls, X, y, hyperparams, score_range):
        lam = float(hyperparams["lam"])
        if lam < 0:
            raise ValueError(f"ridge lam must be >= 0, got {lam}")
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if lam == 0.0 and np.linalg.matrix_rank(X) < X.shape[1]:
            raise SingularSystemError(
                "normal equations are singular with lam=0 on rank-deficient data; use lam > 0"
            )
        a = X.T @ X + lam * np.eye(X.shape[1])
        try:
            weights = np.linalg.solve(a, X.T @ y)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"normal equations are singular ({exc}); use lam > 0")
        return cls(hyperparams, score_range, weights)

    def predict_batch(self, X):
        return np.asarray(X, dtype=float) @ self.weights

    def state(self):
        return {"weights": self.weights.tolist()}


@dataclass
class _Tree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


def _grow_tree(X, y, max_depth, rng) -> _Tree:
    n = len(y)
    sample = rng.integers(0, n, size=n)
    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(sample, 0, None, None)]  # (row indices, depth, parent, side)
    while stack:
        rows, depth, parent, side = stack.pop()
        node = len(feature)
        if parent is not None:
            (left if side == "l" else right)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(np.mean(y[rows])))
        if depth >= max_depth or len(rows) < 2 or np.var(y[rows]) == 0.0:
            continue
        split = _best_split(X[rows], y[rows])
        if split is None:
            continue
        f, thr = split
        feature[node] = f
        threshold[node] = thr
        go_left = X[rows, f] <= thr
        stack.append((rows[~go_left], depth + 1, node, "r"))
        stack.append((rows[go_left], depth + 1, node, "l"))
    return _Tree(
        np.array(feature, dtype=np.intp),
        np.array(threshold),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value),
    )


def _best_split(X, y):
    """Best (feature, threshold) by summed squared error, vectorized over
    all features at once; None if no feature separates the rows."""
    n, _ = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    k = np.arange(1, n)[:, None]  # left-side sizes
    left_sse = csq[:-1] - csum[:-1] ** 2 / k
    right_sse = (csq[-1] - csq[:-1]) - (csum[-1] - csum[:-1]) ** 2 / (n - k)
    cost = left_sse + right_sse
    cost[xs[:-1] == xs[1:]] = np.inf  # cannot split between equal values
    flat = int(np.argmin(cost))
    pos, feat = divmod(flat, cost.shape[1])
    if not np.isfinite(cost[pos, feat]):
        return None
    thr = (xs[pos, feat] + xs[pos + 1, feat]) / 2.0
    return feat, float(thr)


class TreeEnsembleModel(_Model):
    backend = "tree_ensemble"

    def __init__(self, hyperparams, score_range, trees):
        super().__init__(hyperparams, score_range)
        self.trees = trees

    @classmethod
    def fit(cls, X, y, hyperparams, score_range):
        n_trees = int(hyperparams["trees"])
        depth = int(hyperparams["depth"])
        seed = int(hyperparams.get("seed", 0))
        if n_trees < 1 or depth < 1:
            raise ValueError(f"need trees >= 1 and depth >= 1, got {n_trees}, {depth}")
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        children = np.random.SeedSequence(seed).spawn(n_trees)
        trees = [_grow_tree(X, y, depth, np.random.default_rng(c)) for c in children]
        model = cls({**hyperparams, "seed": seed}, score_range, trees)
        model.n_features = X.shape[1]
        return model

    def predict_batch(self, X):
        X = np.asarray(X, dtype=float)
        preds = np.zeros(len(X))
        for tree in self.trees:
            idx = np.zeros(len(X), dtype=np.intp)
            for _ in range(int(self.hyperparams["depth"]) + 1):
                feat = tree.feature[idx]
                active = feat >= 0
                if not active.any():
                    break
                go_left = X[np.arange(len(X)), np.where(active, feat, 0)] <= tree.threshold[idx]
                nxt = np.where(go_left, tree.left[idx], tree.right[idx])
                idx = np.where(active, nxt, idx)
            preds += tree.value[idx]
        return preds / len(self.trees)

    def state(self):
        return {
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in self.trees
            ],
            "n_features": self.n_features,
        }


_DEFAULT_HYPERPARAMS = {
    "knn": {"k": 3},
    "ridge": {"lam": 1e-2},
    "tree_ensemble": {"trees": 32, "depth": 4, "seed": 0},
}


def fit(backend: str, X, y, hyperparams: dict | None = None, score_range=(-1.0, 1.0)) -> _Model:
    """Fit one model; hyperparams default per backend when omitted."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError(f"X rows ({X.shape}) must match y length ({len(y)})")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r} (expected one of {BACKENDS})")
    params = {**_DEFAULT_HYPERPARAMS[backend], **(hyperparams or {})}
    if backend == "knn":
        k = int(params["k"])
        if k < 1:
            raise ValueError(f"knn needs k >= 1, got {k}")
        if k > len(y):
            raise ValueError(f"knn k={k} exceeds {len(y)} training rows")
        return KnnModel(params, score_range, X, y)
    if backend == "ridge":
        return RidgeModel.fit(X, y, params, score_range)
    return TreeEnsembleModel.fit(X, y, params, score_range)


@dataclass(frozen=True)
class Prediction:
    value: float
    raw: float
    clamped: bool


def predict_detailed(model: _Model, v) -> Prediction:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) != model.n_features:
        raise ValueError(f"feature vector has {v.shape}, model expects length {model.n_features}")
    raw = float(model.predict_batch(v[None, :])[0])
    lo, hi = model.score_range
    value = min(max(raw, lo), hi)
    return Prediction(value=value, raw=raw, clamped=value != raw)


def predict(model: _Model, v) -> float:
    """Backend prediction clamped to the model's score range."""
    return predict_detailed(model, v).value


def _clamp_batch(model, X):
    lo, hi = model.score_range
    return np.clip(model.predict_batch(X), lo, hi)


# --- splits and evaluation ---------------------------------------------------


@dataclass
class SplitPlan:
    """Leakage-free holdout split: test feature columns are restricted to
    the training indices."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray


def split_no_leakage(values, scores, train_frac: float, seed: int) -> SplitPlan:
    """Shuffle-split a square similarity matrix; the test block is
    z x m (test rows, training columns only)."""
    values = np.asarray(getattr(values, "values", values), dtype=float)
    scores = np.asarray(scores, dtype=float)
    m_total = len(scores)
    if values.shape != (m_total, m_total):
        raise ValueError(f"expected square matrix matching {m_total} scores, got {values.shape}")
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    n_train = int(round(train_frac * m_total))
    if n_train < 2 or n_train > m_total - 1:
        raise ValueError(
            f"degenerate split: {n_train} train / {m_total - n_train} test rows from {m_total}"
        )
    perm = np.random.default_rng(seed).permutation(m_total)
    train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    return SplitPlan(
        train_indices=train,
        test_indices=test,
        seed=seed,
        x_train=values[np.ix_(train, train)],
        y_train=scores[train],
        x_test=values[np.ix_(test, train)],
        y_test=scores[test],
    )


@dataclass
class EvalReport:
    backend: str
    best_hyperparams: dict
    rmse: float
    explained_variance: float | None
    per_fold: list[tuple[float, float | None]]
    baseline_rmse: float
    n_samples: int
    folds: int
    seed: int
    degenerate_variance: bool = False
    extras: dict = field(default_factory=dict)

    def to_text(self) -> str:
        ev = "degenerate (zero-variance target)" if self.explained_variance is None else f"{self.explained_variance:.5f}"
        params = " ".join(f"{k}={v}" for k, v in sorted(self.best_hyperparams.items()))
        lines = [
            f"backend             {self.backend}",
            f"best hyperparams    {params}",
            f"cv rmse             {self.rmse:.5f}",
            f"explained variance  {ev}",
            f"mean-predictor rmse {self.baseline_rmse:.5f}",
            f"samples/folds/seed  {self.n_samples}/{self.folds}/{self.seed}",
        ]
        for k, v in sorted(self.extras.items()):
            lines.append(f"{k:<19} {v}")
        lines.append("per-fold (rmse, explained variance):")
        for i, (r, e) in enumerate(self.per_fold):
            etxt = "degenerate" if e is None else f"{e:.5f}"
            lines.append(f"  fold {i}: {r:.5f}, {etxt}")
        return "\n".join(lines)

    def to_csv(self, f):
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "w", encoding="utf-8")
            close = True
        try:
            f.write("fold,rmse,explained_variance\n")
            for i, (r, e) in enumerate(self.per_fold):
                f.write(f"{i},{r:.17g},{'' if e is None else format(e, '.17g')}\n")
            ev = "" if self.explained_variance is None else f"{self.explained_variance:.17g}"
            f.write(f"mean,{self.rmse:.17g},{ev}\n")
            f.write(f"baseline,{self.baseline_rmse:.17g},\n")
        finally:
            if close:
                f.close()


def _simplicity_key(backend: str, params: dict):
    # tie-break toward the simpler model: smaller k, larger lam, fewer trees
    if backend == "knn":
        return (params["k"],)
    if backend == "ridge":
        return (-params["lam"],)
    return (params["trees"], params["depth"])


def _expand_grid(grid: dict) -> list[dict]:
    if not grid:
        raise ValueError("empty hyperparameter grid")
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def cross_validate(
    backend: str,
    X,
    y,
    folds: int = 5,
    grid: dict | None = None,
    seed: int = 0,
    score_range=(-1.0, 1.0),
) -> EvalReport:
    """Grid search over seeded k-fold CV on a square similarity matrix.

    Within each fold the feature columns are restricted to that fold's
    training indices.  Best combo by mean RMSE, ties toward the simpler
    model; the report carries the constant-mean predictor's RMSE on the
    same folds for comparison.
    """
    X = np.asarray(getattr(X, "values", X), dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(y)
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if m < folds:
        raise ValueError(f"{m} samples cannot fill {folds} folds")
    if X.shape != (m, m):
        raise ValueError(f"expected square matrix matching {m} scores, got {X.shape}")

    perm = np.random.default_rng(seed).permutation(m)
    fold_indices = [np.sort(part) for part in np.array_split(perm, folds)]
    fold_splits = []
    for f in range(folds):
        test = fold_indices[f]
        train = np.sort(np.concatenate([fold_indices[g] for g in range(folds) if g != f]))
        fold_splits.append((train, test))

    combos = _expand_grid(grid if grid is not None else DEFAULT_GRIDS[backend])
    if backend == "knn":
        # combos needing more neighbours than the smallest fold can supply
        min_train = min(len(train) for train, _ in fold_splits)
        combos = [p for p in combos if int(p["k"]) <= min_train]
        if not combos:
            raise ValueError(
                f"no feasible hyperparameter combination: every k exceeds the "
                f"smallest fold's {min_train} training rows"
            )
    results = []
    for params in combos:
        fold_metrics = []
        for train, test in fold_splits:
            model = fit(backend, X[np.ix_(train, train)], y[train], params, score_range)
            pred = _clamp_batch(model, X[np.ix_(test, train)])
            ev = explained_variance(pred, y[test]) if len(test) >= 2 else None
            fold_metrics.append((rmse(pred, y[test]), ev))
        mean_rmse = float(np.mean([r for r, _ in fold_metrics]))
        results.append((mean_rmse, _simplicity_key(backend, params), params, fold_metrics))

    results.sort(key=lambda item: (item[0], item[1]))
    mean_rmse, _, best_params, fold_metrics = results[0]

    baseline_folds = []
    for train, test in fold_splits:
        const = np.full(len(test), np.mean(y[train]))
        baseline_folds.append(rmse(const, y[test]))

    evs = [e for _, e in fold_metrics]
    degenerate = any(e is None for e in evs)
    return EvalReport(
        backend=backend,
        best_hyperparams=best_params,
        rmse=mean_rmse,
        explained_variance=None if degenerate else float(np.mean(evs)),
        per_fold=fold_metrics,
        baseline_rmse=float(np.mean(baseline_folds)),
        n_samples=m,
        folds=folds,
        seed=seed,
        degenerate_variance=degenerate,
    )


# --- serialization -----------------------------------------------------------


def save_model(model: _Model, f, meta: dict | None = None):
    """Versioned JSON document: backend tag, hyperparams, flattened arrays."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "backend": model.backend,
        "hyperparams": model.hyperparams,
        "score_range": list(model.score_range),
        "n_features": model.n_features,
        "state": model.state(),
        "meta": meta or {},
    }
    close = False
    if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
        f = open(f, "w", encoding="utf-8")
        close = True
    try:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    finally:
        if close:
            f.close()


def load_model(f) -> tuple[_Model, dict]:
    close = False
    if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
        f = open(f, encoding="utf-8")
        close = True
    try:
        doc = json.load(f)
    finally:
        if close:
            f.close()
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model file (format={doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    backend = doc["backend"]
    params = doc["hyperparams"]
    score_range = tuple(doc["score_range"])
    state = doc["state"]
    if backend == "knn":
        model = KnnModel(params, score_range, np.array(state["X"]), np.array(state["y"]))
    elif backend == "ridge":
        model = RidgeModel(params, score_range, np.array(state["weights"]))
    elif backend == "tree_ensemble":
        trees = [
            _Tree(
                np.array(t["feature"], dtype=np.intp),
                np.array(t["threshold"]),
                np.array(t["left"], dtype=np.intp),
                np.array(t["right"], dtype=np.intp),
                np.array(t["value"]),
            )
            for t in state["trees"]
        ]
        model = TreeEnsembleModel(params, score_range, trees)
        model.n_features = int(state["n_features"])
    else:
        raise ValueError(f"unknown backend {backend!r} in model file")
    return model, doc.get("meta", {})
