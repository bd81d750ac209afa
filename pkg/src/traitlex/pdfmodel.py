"""Per-word score densities and their aggregation into trait predictions.

The model holds, for every adjective that survived the frequency cut, a
probability mass vector over the score bins of one trait.  A word's raw
count in bin k is the sum of its per-sample frequencies over training
samples whose score fell in that bin.  Raw counts are corrected for the
uneven number of samples per bin (the g vector) and normalized:

    mass_w[k] ∝ (raw_counts_w[k] + alpha) / g[k]

Prediction multiplies the mass vectors of every word occurrence in a text,
treating occurrences as independent, then renormalizes.  The product runs
in log space so hundreds of occurrences cannot underflow.  A peaked result
is summarized by a confidence factor: the base-10 log of the ratio between
the two largest bin masses, clamped to [0, 10].
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, canonical_json, checksum
from .binning import DEFAULT_BINNING, BinningScheme
from .corpus import CorpusStore, FilterPolicy, TextSample, filter_sample
from .errors import (
    DatasetError,
    DegenerateDistributionError,
    EmptyBinError,
    FilterRejection,
    ModelFormatError,
    ModelIntegrityError,
)

MODEL_FORMAT = "traitlex-pdf-model"
MODEL_FORMAT_VERSION = 1

CONFIDENCE_MAX = 10.0


@dataclass(frozen=True)
class WordPdf:
    """One adjective's raw bin counts and normalized mass."""

    word: str
    raw_counts: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        if self.raw_counts.shape != self.mass.shape:
            raise DatasetError(f"word {self.word!r}: count/mass shape mismatch")
        if np.any(self.mass < 0):
            raise DatasetError(f"word {self.word!r}: negative mass")
        if abs(float(self.mass.sum()) - 1.0) > 1e-9:
            raise DatasetError(f"word {self.word!r}: mass does not sum to 1")
        self.raw_counts.setflags(write=False)
        self.mass.setflags(write=False)

    @classmethod
    def from_counts(cls, word, counts, g, alpha=0.0):
        counts = np.asarray(counts, dtype=float)
        g = np.asarray(g, dtype=float)
        weighted = (counts + alpha) / g
        total = weighted.sum()
        if total <= 0:
            raise DatasetError(f"word {word!r}: no mass in any bin")
        return cls(word=word, raw_counts=counts, mass=weighted / total)


@dataclass(frozen=True)
class PdfPersonalityModel:
    trait: str
    binning: BinningScheme
    g: np.ndarray
    pdfs: dict
    min_word_freq: int
    smoothing_alpha: float

    def __post_init__(self):
        if self.g.shape != (self.binning.n_bins,):
            raise DatasetError("g length does not match the binning")
        if np.any(self.g <= 0):
            raise DatasetError("g must be positive in every bin")
        self.g.setflags(write=False)

    @property
    def vocabulary(self) -> tuple:
        return tuple(self.pdfs)


@dataclass(frozen=True)
class AggregateResult:
    phi: np.ndarray | None
    words_used: int
    degenerate: bool


@dataclass(frozen=True)
class PdfPrediction:
    phi: np.ndarray
    label: float
    confidence: float
    words_used: int


def build_model(
    store: CorpusStore,
    trait: str,
    binning: BinningScheme = DEFAULT_BINNING,
    min_word_freq: int = 300,
    smoothing_alpha: float = 0.0,
) -> PdfPersonalityModel:
    """Estimate per-word mass vectors from a scored corpus.

    Samples without a score for the trait, or with a score outside the
    binning range, are skipped.  Words whose total count over the used
    samples falls below min_word_freq are dropped.  Every bin must receive
    at least one sample, since an empty bin leaves the correction vector
    undefined.
    """
    if smoothing_alpha < 0:
        raise DatasetError("smoothing_alpha must be non-negative")
    n = binning.n_bins
    g = np.zeros(n, dtype=int)
    counts: dict[str, np.ndarray] = {}
    for sample in store.samples:
        if not sample.scores or trait not in sample.scores:
            continue
        score = sample.scores[trait]
        if not binning.contains(score):
            continue
        k = binning.bin_index(score)
        g[k] += 1
        for word, freq in sample.adj_freqs.items():
            row = counts.get(word)
            if row is None:
                row = counts[word] = np.zeros(n, dtype=float)
            row[k] += freq
    if np.any(g == 0):
        empty = ", ".join(str(int(k)) for k in np.flatnonzero(g == 0))
        raise EmptyBinError(f"empty bin {empty}: no training sample landed there")
    pdfs = {
        word: WordPdf.from_counts(word, row, g, smoothing_alpha)
        for word, row in sorted(counts.items())
        if row.sum() >= min_word_freq
    }
    return PdfPersonalityModel(
        trait=trait,
        binning=binning,
        g=g,
        pdfs=pdfs,
        min_word_freq=min_word_freq,
        smoothing_alpha=smoothing_alpha,
    )


def aggregate(model: PdfPersonalityModel, adj_freqs: dict) -> AggregateResult:
    """Combine the mass vectors of every known word occurrence.

    Words absent from the model are ignored.  With no usable word at all
    the result is the uniform distribution.  If every bin ends with zero
    mass the result is flagged degenerate and phi is None.
    """
    n = model.binning.n_bins
    log_phi = np.zeros(n, dtype=float)
    words_used = 0
    with np.errstate(divide="ignore"):
        for word, freq in adj_freqs.items():
            pdf = model.pdfs.get(word)
            if pdf is None:
                continue
            log_phi += freq * np.log(pdf.mass)
            words_used += freq
    if words_used == 0:
        return AggregateResult(phi=np.full(n, 1.0 / n), words_used=0, degenerate=False)
    peak = log_phi.max()
    if not np.isfinite(peak):
        return AggregateResult(phi=None, words_used=words_used, degenerate=True)
    phi = np.exp(log_phi - peak)
    phi /= phi.sum()
    return AggregateResult(phi=phi, words_used=words_used, degenerate=False)


def confidence(phi) -> float:
    """log10 ratio of the two largest entries, clamped to [0, 10]."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or phi.shape[0] < 2:
        raise DatasetError("confidence needs a distribution over at least 2 bins")
    if np.any(phi < 0):
        raise DatasetError("distribution has negative entries")
    if abs(float(phi.sum()) - 1.0) > 1e-6:
        raise DatasetError("distribution does not sum to 1")
    top2 = np.partition(phi, -2)[-2:]
    p2, p1 = float(top2[0]), float(top2[1])
    if p2 == 0.0:
        return CONFIDENCE_MAX
    return float(min(max(np.log10(p1 / p2), 0.0), CONFIDENCE_MAX))


def predict(
    model: PdfPersonalityModel,
    sample: TextSample,
    policy: FilterPolicy | None = None,
) -> PdfPrediction:
    """Aggregate a sample's adjectives and name the winning bin midpoint."""
    if policy is not None:
        reason = filter_sample(sample, policy)
        if reason is not None:
            raise FilterRejection(sample.id, reason)
    result = aggregate(model, sample.adj_freqs)
    if result.degenerate:
        raise DegenerateDistributionError(
            f"sample {sample.id!r}: degenerate distribution (no informative mass)"
        )
    phi = result.phi
    label = model.binning.labels[int(np.argmax(phi))]
    return PdfPrediction(
        phi=phi,
        label=label,
        confidence=confidence(phi),
        words_used=result.words_used,
    )


def _model_payload(model: PdfPersonalityModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "trait": model.trait,
        "binning": model.binning.to_dict(),
        "g": [int(v) for v in model.g],
        "min_word_freq": model.min_word_freq,
        "smoothing_alpha": model.smoothing_alpha,
        "pdfs": {
            word: {
                "raw_counts": [float(v) for v in pdf.raw_counts],
                "mass": [float(v) for v in pdf.mass],
            }
            for word, pdf in model.pdfs.items()
        },
    }


def save_model(model: PdfPersonalityModel, path) -> None:
    payload = _model_payload(model)
    payload["checksum"] = checksum(canonical_json(_model_payload(model)))
    atomic_write_text(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_model(path) -> PdfPersonalityModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError:
        raise ModelIntegrityError(
            f"{path}: not valid JSON (file truncated or corrupt)"
        ) from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: not a trait density model file")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {payload.get('format_version')!r}"
        )
    stated = payload.pop("checksum", None)
    actual = checksum(canonical_json(payload))
    if stated != actual:
        raise ModelIntegrityError(f"{path}: checksum mismatch")
    binning = BinningScheme.from_dict(payload["binning"])
    g = np.asarray(payload["g"], dtype=int)
    pdfs = {
        word: WordPdf(
            word=word,
            raw_counts=np.asarray(entry["raw_counts"], dtype=float),
            mass=np.asarray(entry["mass"], dtype=float),
        )
        for word, entry in payload["pdfs"].items()
    }
    return PdfPersonalityModel(
        trait=payload["trait"],
        binning=binning,
        g=g,
        pdfs=pdfs,
        min_word_freq=int(payload["min_word_freq"]),
        smoothing_alpha=float(payload["smoothing_alpha"]),
    )
