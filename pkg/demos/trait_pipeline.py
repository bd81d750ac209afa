"""
Trait estimation from word densities, end to end
================================================

Builds a synthetic corpus whose true scores are known, fits per-word
densities on it, and checks how well the aggregated densities recover
the scores of a second corpus drawn from the same vocabulary.
"""

from pathlib import Path

import numpy as np

from traitlex.binning import BinningScheme
from traitlex.evaluation import evaluate_pdf_model
from traitlex.pdfmodel import aggregate, build_model, predict, save_model
from traitlex.synthgen import GeneratorSpec, generate_corpus, make_bin_vocab

out = Path(__file__).parent / "out" / "trait"
out.mkdir(parents=True, exist_ok=True)

# One vocabulary, two corpora. Sharing the word tables but not the corpus
# seed gives a genuine train/test split: identical word statistics,
# different texts.
binning = BinningScheme(lo=0.1, hi=0.9, n_bins=8)
vocab = make_bin_vocab(n_bins=8, words_per_bin=30, overlap_fraction=0.5, seed=21)

train = generate_corpus(GeneratorSpec(
    seed=1, n_samples=400, words_per_sample=(600, 1500),
    vocab=vocab, binning=binning,
))
test = generate_corpus(GeneratorSpec(
    seed=2, n_samples=100, words_per_sample=(600, 1500),
    vocab=vocab, binning=binning,
))
print(f"corpora: {len(train)} train samples, {len(test)} test")

# Fit the per-word densities. min_word_freq=0 keeps every word; on real
# text you want a floor so rare words do not contribute noisy densities.
model = build_model(train, trait="N", min_word_freq=0)
print(f"model: {len(model.vocabulary)} words over {model.binning.n_bins} bins")
save_model(model, out / "model.json")

# Score the held-out corpus.
result = evaluate_pdf_model(model, test)
r = result.report
print(f"held out: mae={r.mae:.3f} rmse={r.rmse:.3f} "
      f"marginal accuracy={r.marginal_accuracy:.3f} (margin {r.margin})")

# The confidence factor ranks predictions by how decisive the aggregated
# density was. Walking the threshold up should never make the retained
# predictions worse, only fewer.
print("confidence sweep:")
for point in result.curve[::5]:
    mae = "    -" if point.mae is None else f"{point.mae:.3f}"
    print(f"  >= {point.threshold:4.1f}: mae {mae} over {point.n_retained} samples")

# One sample, the long way around: aggregate its word counts into a mass
# vector, then read the winning bin off it.
sample = test.samples[0]
agg = aggregate(model, sample.adj_freqs)
order = np.argsort(agg.phi)[::-1]
print(f"sample {sample.id}: {agg.words_used} known words")
for k in order[:3]:
    print(f"  bin {k} (midpoint {model.binning.labels[k]:.2f}): mass {agg.phi[k]:.4f}")

p = predict(model, sample)
print(f"predicted {p.label:.2f} with confidence {p.confidence:.2f}, "
      f"truth {sample.scores['N']:.2f}")
