"""Score binning shared by the density model and the label encoders.

Trait scores live on [0, 1] but only a central slice of that range is
considered reliable, so a scheme covers [lo, hi] with n_bins equal-width
bins.  Bin k spans [lo + k*w, lo + (k+1)*w) with w = (hi - lo) / n_bins;
the last bin additionally includes hi itself.  Each bin is named by its
midpoint, which doubles as the numeric label a classifier predicts.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetError

# Scores arrive as decimal literals (0.3, 0.44, ...) whose float forms sit a
# hair below the intended bin edge.  Positions within this fraction of a bin
# width from the upper edge are snapped up before flooring.
EDGE_EPS = 1e-9


@dataclass(frozen=True)
class BinningScheme:
    lo: float = 0.1
    hi: float = 0.9
    n_bins: int = 8
    labels: tuple = field(init=False)

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DatasetError(f"binning requires lo < hi, got {self.lo} >= {self.hi}")
        if self.n_bins < 2:
            raise DatasetError(f"binning requires at least 2 bins, got {self.n_bins}")
        w = (self.hi - self.lo) / self.n_bins
        # Midpoints rounded to 12 decimals so the default scheme yields the
        # exact literals 0.15, 0.25, ..., 0.85 rather than float noise.
        labels = tuple(round(self.lo + (k + 0.5) * w, 12) for k in range(self.n_bins))
        object.__setattr__(self, "labels", labels)

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_bins

    def contains(self, score: float) -> bool:
        span = self.hi - self.lo
        return (self.lo - EDGE_EPS * span) <= score <= (self.hi + EDGE_EPS * span)

    def bin_index(self, score: float) -> int:
        """Map a score to its bin, raising if it falls outside [lo, hi]."""
        if not self.contains(score):
            raise DatasetError(
                f"score {score!r} outside binning range [{self.lo}, {self.hi}]"
            )
        scaled = (score - self.lo) / self.width
        k = int(np.floor(scaled + EDGE_EPS))
        if k >= self.n_bins:  # score == hi, or noise just above it
            k = self.n_bins - 1
        return max(k, 0)

    def bin_indices(self, scores) -> np.ndarray:
        """Vectorized bin_index that names the offending row on error."""
        scores = np.asarray(scores, dtype=float)
        out = np.empty(scores.shape[0], dtype=int)
        for i, s in enumerate(scores):
            try:
                out[i] = self.bin_index(float(s))
            except DatasetError:
                raise DatasetError(
                    f"row {i}: score {s!r} outside binning range "
                    f"[{self.lo}, {self.hi}]"
                ) from None
        return out

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n_bins": self.n_bins}

    @classmethod
    def from_dict(cls, d: dict) -> "BinningScheme":
        return cls(lo=float(d["lo"]), hi=float(d["hi"]), n_bins=int(d["n_bins"]))


DEFAULT_BINNING = BinningScheme()
