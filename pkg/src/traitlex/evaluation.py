"""Metrics, data splits, cross-validation, and evaluation reports.

The headline score metric is marginal accuracy: a prediction counts as
correct when it lies within a fixed margin of the truth, boundary
included.  MAE and RMSE accompany it on every report.
"""

from dataclasses import dataclass

import numpy as np

from .binning import BinningScheme
from .corpus import CorpusStore, FilterPolicy
from .errors import DatasetError, DegenerateDistributionError
from .mlcore import Dataset, TrainConfig, predict_dataset
from .mlcore import train as train_model
from .pdfmodel import PdfPersonalityModel, predict as pdf_predict
from .corpus import filter_sample

DEFAULT_MARGIN = 0.10
DEFAULT_CONFIDENCE_GRID = tuple(t / 2 for t in range(21))  # 0.0, 0.5, ..., 10.0


def _paired(pred, truth):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise DatasetError("predictions and truths must be 1-D and equally long")
    if pred.size == 0:
        raise DatasetError("cannot evaluate zero predictions")
    return pred, truth


def mae(pred, truth) -> float:
    pred, truth = _paired(pred, truth)
    return float(np.abs(pred - truth).mean())


def rmse(pred, truth) -> float:
    pred, truth = _paired(pred, truth)
    return float(np.sqrt(((pred - truth) ** 2).mean()))


def marginal_accuracy(pred, truth, margin: float = DEFAULT_MARGIN) -> float:
    """Fraction of predictions within margin of the truth (inclusive)."""
    if margin < 0:
        raise DatasetError("margin must be non-negative")
    pred, truth = _paired(pred, truth)
    return float((np.abs(pred - truth) <= margin).mean())


def exact_accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise DatasetError("predictions and truths must be 1-D, equal, non-empty")
    return float((pred == truth).mean())


@dataclass(frozen=True)
class EvalReport:
    mae: float
    rmse: float
    marginal_accuracy: float
    margin: float
    n: int

    def __post_init__(self):
        if self.mae < 0 or self.rmse < self.mae - 1e-12:
            raise DatasetError("report violates 0 <= mae <= rmse")
        if not 0 <= self.marginal_accuracy <= 1:
            raise DatasetError("marginal accuracy outside [0, 1]")


def evaluate_scores(pred, truth, margin: float = DEFAULT_MARGIN) -> EvalReport:
    pred, truth = _paired(pred, truth)
    return EvalReport(
        mae=mae(pred, truth),
        rmse=rmse(pred, truth),
        marginal_accuracy=marginal_accuracy(pred, truth, margin),
        margin=margin,
        n=int(pred.size),
    )


# --- splits -----------------------------------------------------------------

def train_test_split(ds: Dataset, train_fraction: float = 0.67, seed: int = 0):
    """Shuffle and split; the train side gets round(train_fraction * n) rows."""
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must lie strictly between 0 and 1")
    if ds.n < 2:
        raise DatasetError("need at least 2 rows to split")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(ds.n)
    n_train = int(np.floor(train_fraction * ds.n + 0.5))
    n_train = min(max(n_train, 1), ds.n - 1)
    return ds.take(perm[:n_train]), ds.take(perm[n_train:])


def kfold_indices(n: int, k: int, seed: int = 0):
    """Disjoint shuffled folds; remainder rows go to the lowest-index folds."""
    if k < 2:
        raise DatasetError("k must be at least 2")
    if k > n:
        raise DatasetError(f"k={k} exceeds the {n} rows")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    pairs = []
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        test = perm[start:start + size]
        train = np.concatenate([perm[:start], perm[start + size:]])
        pairs.append((train, test))
        start += size
    return pairs


def kfold(ds: Dataset, k: int, seed: int = 0):
    return [
        (ds.take(train), ds.take(test))
        for train, test in kfold_indices(ds.n, k, seed)
    ]


@dataclass(frozen=True)
class CrossValidation:
    fold_accuracies: tuple
    mean_accuracy: float


def cross_validate(
    config: TrainConfig,
    ds: Dataset,
    k: int = 10,
    seed: int = 0,
    margin: float = DEFAULT_MARGIN,
) -> CrossValidation:
    """Mean fold accuracy: exact-match for classifiers, marginal for regressors."""
    accuracies = []
    for train_ds, test_ds in kfold(ds, k, seed):
        model = train_model(config, train_ds)
        pred = predict_dataset(model, test_ds)
        if config.kind == "classifier":
            accuracies.append(exact_accuracy(pred, test_ds.y_class))
        else:
            accuracies.append(marginal_accuracy(pred, test_ds.y_score, margin))
    return CrossValidation(
        fold_accuracies=tuple(accuracies),
        mean_accuracy=float(np.mean(accuracies)),
    )


# --- categorical agreement ---------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are the correct label, columns the predicted one."""

    labels: tuple
    counts: np.ndarray

    def __post_init__(self):
        self.counts.setflags(write=False)

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


def confusion_matrix(truth, pred, labels) -> ConfusionMatrix:
    labels = tuple(labels)
    if not labels or len(set(labels)) != len(labels):
        raise DatasetError("labels must be non-empty and unique")
    index = {name: i for i, name in enumerate(labels)}
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred) or not truth:
        raise DatasetError("truth and prediction lists must be equal and non-empty")
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(truth, pred):
        if t not in index:
            raise DatasetError(f"unknown truth label {t!r}")
        if p not in index:
            raise DatasetError(f"unknown predicted label {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


# --- confidence handling ------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    mae: float | None  # None when nothing is retained
    n_retained: int


def confidence_curve(records, thresholds=None):
    """MAE over the records at or above each confidence threshold.

    Records are (predicted_label, truth, confidence) triples.
    """
    if thresholds is None:
        thresholds = DEFAULT_CONFIDENCE_GRID
    records = list(records)
    labels = np.array([r[0] for r in records], dtype=float)
    truths = np.array([r[1] for r in records], dtype=float)
    confs = np.array([r[2] for r in records], dtype=float)
    points = []
    for t in thresholds:
        keep = confs >= t
        n = int(keep.sum())
        value = float(np.abs(labels[keep] - truths[keep]).mean()) if n else None
        points.append(CurvePoint(threshold=float(t), mae=value, n_retained=n))
    return points


# --- corpus summaries ----------------------------------------------------------

@dataclass(frozen=True)
class DistributionRow:
    lo: float
    hi: float
    count: int
    percent: float


def score_distribution(store: CorpusStore, trait: str, n_bins: int = 10):
    """Histogram of a trait's scores over [0, 1] with percentages."""
    scores = [
        s.scores[trait] for s in store.samples if s.scores and trait in s.scores
    ]
    if not scores:
        raise DatasetError(f"no samples scored for trait {trait!r}")
    scheme = BinningScheme(lo=0.0, hi=1.0, n_bins=n_bins)
    counts = np.zeros(n_bins, dtype=int)
    for s in scores:
        counts[scheme.bin_index(s)] += 1
    width = 1.0 / n_bins
    return [
        DistributionRow(
            lo=round(k * width, 12),
            hi=round((k + 1) * width, 12),
            count=int(counts[k]),
            percent=float(100.0 * counts[k] / len(scores)),
        )
        for k in range(n_bins)
    ]


# --- density-model evaluation ---------------------------------------------------

@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    label: float
    truth: float
    confidence: float
    words_used: int


@dataclass(frozen=True)
class PdfEvalResult:
    report: EvalReport
    curve: tuple
    records: tuple
    skipped: tuple  # of (sample_id, reason)


def evaluate_pdf_model(
    model: PdfPersonalityModel,
    store: CorpusStore,
    policy: FilterPolicy | None = None,
    margin: float = DEFAULT_MARGIN,
    thresholds=None,
) -> PdfEvalResult:
    """Predict every scored sample and summarize the errors.

    Samples failing the policy or yielding a degenerate distribution are
    skipped and listed with their reason rather than aborting the run.
    """
    records = []
    skipped = []
    for sample in store.samples:
        if not sample.scores or model.trait not in sample.scores:
            continue
        if policy is not None:
            reason = filter_sample(sample, policy)
            if reason is not None:
                skipped.append((sample.id, reason))
                continue
        try:
            prediction = pdf_predict(model, sample)
        except DegenerateDistributionError:
            skipped.append((sample.id, "degenerate"))
            continue
        records.append(
            PredictionRecord(
                sample_id=sample.id,
                label=prediction.label,
                truth=float(sample.scores[model.trait]),
                confidence=prediction.confidence,
                words_used=prediction.words_used,
            )
        )
    if not records:
        raise DatasetError("no sample survived filtering; nothing to evaluate")
    labels = [r.label for r in records]
    truths = [r.truth for r in records]
    report = evaluate_scores(labels, truths, margin)
    curve = confidence_curve(
        [(r.label, r.truth, r.confidence) for r in records], thresholds
    )
    return PdfEvalResult(
        report=report,
        curve=tuple(curve),
        records=tuple(records),
        skipped=tuple(skipped),
    )
