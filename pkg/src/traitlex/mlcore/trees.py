"""Decision trees and random forests, grown from scratch.

Trees are nested dicts: leaves are {"leaf": value}, internal nodes are
{"feature": j, "threshold": t, "left": ..., "right": ...} with rows going
left when x[j] <= t.  Splits minimize Gini impurity (classification) or
summed squared error (regression); candidate thresholds are midpoints
between consecutive distinct values.  Tied splits resolve to the lowest
feature index, then the lowest threshold, so growth is fully deterministic
given the row order and the per-tree random generator.
"""

import numpy as np


def _class_leaf(counts) -> dict:
    # argmax picks the first maximum, i.e. the smallest class on ties
    return {"leaf": int(np.argmax(counts))}


def _best_split_class(X, y, idx, feats, n_classes):
    """Lowest-impurity (feature, threshold) over the candidate features."""
    n = idx.size
    best = None
    for j in feats:
        v = X[idx, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[idx][order]] = 1.0
        left = np.cumsum(onehot, axis=0)
        total = left[-1]
        pos = np.flatnonzero(vs[1:] > vs[:-1]) + 1
        nl = pos.astype(float)
        nr = n - nl
        lc = left[pos - 1]
        rc = total - lc
        gini_l = 1.0 - ((lc / nl[:, None]) ** 2).sum(axis=1)
        gini_r = 1.0 - ((rc / nr[:, None]) ** 2).sum(axis=1)
        impurity = (nl * gini_l + nr * gini_r) / n
        p = int(np.argmin(impurity))
        if best is None or impurity[p] < best[0]:
            threshold = 0.5 * (vs[pos[p] - 1] + vs[pos[p]])
            best = (float(impurity[p]), int(j), threshold)
    return best


def _best_split_reg(X, y, idx, feats):
    """Lowest summed-squared-error (feature, threshold)."""
    n = idx.size
    best = None
    for j in feats:
        v = X[idx, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        ys = y[idx][order]
        s = np.cumsum(ys)
        s2 = np.cumsum(ys * ys)
        pos = np.flatnonzero(vs[1:] > vs[:-1]) + 1
        nl = pos.astype(float)
        nr = n - nl
        sl, sl2 = s[pos - 1], s2[pos - 1]
        sse_l = sl2 - sl * sl / nl
        sse_r = (s2[-1] - sl2) - (s[-1] - sl) ** 2 / nr
        cost = sse_l + sse_r
        p = int(np.argmin(cost))
        if best is None or cost[p] < best[0]:
            threshold = 0.5 * (vs[pos[p] - 1] + vs[pos[p]])
            best = (float(cost[p]), int(j), threshold)
    return best


def _candidate_features(rng, n_features, mtry):
    if mtry >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=mtry, replace=False))


def grow_tree(X, y, idx, rng, mtry, max_depth, min_samples_split, n_classes,
              regression=False, depth=0):
    if regression:
        values = y[idx]
        if (
            (max_depth is not None and depth >= max_depth)
            or idx.size < min_samples_split
            or np.all(values == values[0])
        ):
            return {"leaf": float(values.mean())}
        best = _best_split_reg(X, y, idx, _candidate_features(rng, X.shape[1], mtry))
        if best is None:
            return {"leaf": float(values.mean())}
    else:
        counts = np.bincount(y[idx], minlength=n_classes)
        if (
            (max_depth is not None and depth >= max_depth)
            or idx.size < min_samples_split
            or counts.max() == idx.size
        ):
            return _class_leaf(counts)
        best = _best_split_class(
            X, y, idx, _candidate_features(rng, X.shape[1], mtry), n_classes
        )
        if best is None:
            return _class_leaf(counts)
    _, j, threshold = best
    mask = X[idx, j] <= threshold
    return {
        "feature": j,
        "threshold": threshold,
        "left": grow_tree(X, y, idx[mask], rng, mtry, max_depth,
                          min_samples_split, n_classes, regression, depth + 1),
        "right": grow_tree(X, y, idx[~mask], rng, mtry, max_depth,
                           min_samples_split, n_classes, regression, depth + 1),
    }


def tree_predict_many(tree, X) -> np.ndarray:
    """Route all rows through the tree at once."""
    out = np.empty(X.shape[0], dtype=float)
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if "leaf" in node:
            out[idx] = node["leaf"]
            continue
        mask = X[idx, node["feature"]] <= node["threshold"]
        stack.append((node["left"], idx[mask]))
        stack.append((node["right"], idx[~mask]))
    return out


# --- single decision tree -------------------------------------------------

def train_decision_tree(X, y, hp, seed, n_classes):
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = np.arange(X.shape[0])
    tree = grow_tree(X, y, idx, rng, X.shape[1], hp["max_depth"],
                     hp["min_samples_split"], n_classes)
    return {"tree": tree, "n_classes": n_classes}


def decision_tree_predict_many(core, X):
    return tree_predict_many(core["tree"], X).astype(int)


# --- random forests --------------------------------------------------------

def _forest_rngs(seed, n_trees):
    # One child seed per tree keeps streams independent and reproducible.
    return [
        np.random.Generator(np.random.PCG64(child))
        for child in np.random.SeedSequence(seed).spawn(n_trees)
    ]


def train_forest(X, y, hp, seed, n_classes, regression):
    n = X.shape[0]
    if regression:
        mtry = X.shape[1]
    else:
        mtry = max(1, int(np.floor(np.sqrt(X.shape[1]))))
    trees = []
    for rng in _forest_rngs(seed, hp["n_trees"]):
        boot = rng.integers(0, n, size=n)
        trees.append(
            grow_tree(X, y, boot, rng, mtry, hp["max_depth"],
                      hp["min_samples_split"], n_classes, regression)
        )
    return {"trees": trees, "n_classes": n_classes, "regression": regression}


def forest_predict_many(core, X):
    if core["regression"]:
        total = np.zeros(X.shape[0])
        for tree in core["trees"]:
            total += tree_predict_many(tree, X)
        return total / len(core["trees"])
    votes = np.zeros((X.shape[0], core["n_classes"]))
    rows = np.arange(X.shape[0])
    for tree in core["trees"]:
        votes[rows, tree_predict_many(tree, X).astype(int)] += 1
    return votes.argmax(axis=1)  # first maximum, so vote ties pick the smaller class
