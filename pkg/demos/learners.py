"""
Racing the eight learners on one dataset
========================================
"""

from pathlib import Path

import numpy as np

from traitlex.evaluation import cross_validate, train_test_split
from traitlex.mlcore import (
    Dataset, TrainConfig, load_trained_model, predict_many,
    save_trained_model, train,
)

out = Path(__file__).parent / "out" / "learners"
out.mkdir(parents=True, exist_ok=True)

# A mildly noisy 4-class blob problem: class k lights up feature k.
rng = np.random.default_rng(9)
n, d, classes = 400, 12, 4
y = rng.integers(0, classes, size=n)
X = rng.normal(0.0, 0.6, size=(n, d))
X[np.arange(n), y] += 3.0
scores = (y + 0.5) / classes  # score target for the regressors

ds = Dataset(
    feature_names=tuple(f"f{j}" for j in range(d)),
    X=X,
    y_class=y,
    y_score=scores,
)
tr, te = train_test_split(ds, train_fraction=0.75, seed=0)

# Small forests here; the shipped default for the classifier is 1000 trees,
# which is overkill for a demo.
CONFIGS = [
    TrainConfig(algorithm="perceptron", seed=0),
    TrainConfig(algorithm="mlp", seed=0),
    TrainConfig(algorithm="knn", seed=0),
    TrainConfig(algorithm="decision_tree", seed=0),
    TrainConfig(algorithm="random_forest_clf", seed=0, hyperparams={"n_trees": 50}),
    TrainConfig(algorithm="random_forest_reg", seed=0, hyperparams={"n_trees": 50}),
    TrainConfig(algorithm="linear_regression", seed=0),
    TrainConfig(algorithm="linear_svm", seed=0),
]

print(f"{'algorithm':<20} {'5-fold cv':>9}")
for config in CONFIGS:
    cv = cross_validate(config, tr, k=5, seed=0)
    print(f"{config.algorithm:<20} {cv.mean_accuracy:>9.3f}")

# Every model serializes to JSON and predicts identically after a reload.
model = train(TrainConfig(algorithm="random_forest_clf", seed=0,
                          hyperparams={"n_trees": 50}), tr)
save_trained_model(model, out / "rf.json")
reloaded = load_trained_model(out / "rf.json")
before = predict_many(model, te.X)
after = predict_many(reloaded, te.X)
assert np.array_equal(before, after)
print(f"forest held-out accuracy: {float(np.mean(before == te.y_class)):.3f} "
      "(identical after reload)")
