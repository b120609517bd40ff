"""Periodic-traffic detection from coalesced measurements via histogramming.

The detector accumulates timestamp differences of many orders (gaps between
measurements one apart, two apart, ... up to max_order) into a fixed-range
histogram, block by block.  Background traffic flattens toward a uniform
density over the range; a periodic component concentrates mass at multiples
of its period.  A Pearson chi-square uniformity test over equal-width
sub-bins turns that concentration into a detection verdict.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaincinv

from .errors import ConfigError, InsufficientDataError


@dataclass(frozen=True)
class PdmmConfig:
    """Histogram range, blocking, and test parameters.

    Differences d with low_cutoff_ns <= d < high_cutoff_ns are counted at
    resolution bin_width_ns; the test aggregates the raw bins into sub_bins
    equal-width cells.  threshold is the false-alarm control: a block
    detects when the chi-square CDF value exceeds 1 - threshold.
    window_blocks, when set, keeps only that many trailing blocks in the
    histogram instead of accumulating forever.
    """

    low_cutoff_ns: int
    high_cutoff_ns: int = 5_000_000
    max_order: int = 10
    block_len: int = 2000
    sub_bins: int = 50
    threshold: float = 0.05
    bin_width_ns: int = 1000
    window_blocks: int | None = None

    def __post_init__(self):
        if self.low_cutoff_ns < 0:
            raise ConfigError("low_cutoff_ns must be non-negative")
        if self.high_cutoff_ns <= self.low_cutoff_ns:
            raise ConfigError("high_cutoff_ns must exceed low_cutoff_ns")
        if self.max_order < 1:
            raise ConfigError("max_order must be >= 1")
        if self.block_len < 2:
            raise ConfigError("block_len must be >= 2")
        if self.sub_bins < 2:
            raise ConfigError("sub_bins must be >= 2")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must be in (0, 1)")
        if self.bin_width_ns < 1:
            raise ConfigError("bin_width_ns must be >= 1")
        span = self.high_cutoff_ns - self.low_cutoff_ns
        if span % (self.sub_bins * self.bin_width_ns) != 0:
            raise ConfigError("histogram span must divide evenly into sub-bins")
        if self.window_blocks is not None and self.window_blocks < 1:
            raise ConfigError("window_blocks must be >= 1 when set")

    @property
    def n_bins(self) -> int:
        return (self.high_cutoff_ns - self.low_cutoff_ns) // self.bin_width_ns


class InterArrivalHistogram:
    """Raw-bin counts of in-range timestamp differences.

    Counts are float64: real accumulation stays integer-exact, and synthetic
    constructions (deviation_histogram) may hold fractional mass.
    """

    def __init__(self, n_bins: int):
        if n_bins < 1:
            raise ConfigError("n_bins must be >= 1")
        self.counts = np.zeros(n_bins, dtype=np.float64)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @classmethod
    def for_config(cls, cfg: PdmmConfig) -> "InterArrivalHistogram":
        return cls(cfg.n_bins)


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of a streaming detection run.

    trajectory holds one (index, statistic, score) triple per tested block
    or window; detection_time_ns is the timestamp closing the detecting
    block, absent when nothing detected.
    """

    detected: bool
    detection_time_ns: int | None
    blocks_processed: int
    trajectory: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.detected != (self.detection_time_ns is not None):
            raise ConfigError("detection_time_ns must be present iff detected")

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "detection_time_ns": self.detection_time_ns,
            "blocks": self.blocks_processed,
            "trajectory": [list(entry) for entry in self.trajectory],
        }


def _block_increment(m_with_history, history_len, cfg: PdmmConfig) -> np.ndarray:
    """Raw-bin counts contributed by one block given its preceding history."""
    m = np.asarray(m_with_history, dtype=np.int64)
    inc = np.zeros(cfg.n_bins, dtype=np.float64)
    n = len(m)
    for order in range(1, cfg.max_order + 1):
        start = max(history_len, order)
        if start >= n:
            break
        d = m[start:] - m[start - order : n - order]
        d = d[(d >= cfg.low_cutoff_ns) & (d < cfg.high_cutoff_ns)]
        if len(d):
            idx = (d - cfg.low_cutoff_ns) // cfg.bin_width_ns
            inc += np.bincount(idx, minlength=cfg.n_bins)
    return inc


def accumulate_block(hist: InterArrivalHistogram, m_with_history, history_len: int, cfg: PdmmConfig) -> None:
    """Count all in-range differences ending inside the block.

    m_with_history concatenates up to max_order prior timestamps (the
    history) with the block's timestamps; only differences whose later
    endpoint lies in the block are counted, each at every order that stays
    within the available past.
    """
    hist.counts += _block_increment(m_with_history, history_len, cfg)


def pearson_chi_square(hist: InterArrivalHistogram, sub_bins: int):
    """Uniformity statistic over equal-width sub-bins and its CDF value.

    Aggregates the raw bins into sub_bins cells, computes
    sum((observed - expected)^2 / expected) against the uniform expectation,
    and returns (chi_square, p) where p is the chi-square CDF with
    sub_bins - 1 degrees of freedom, evaluated via the regularized lower
    incomplete gamma function.
    """
    if sub_bins < 2:
        raise ConfigError("sub_bins must be >= 2")
    if len(hist.counts) % sub_bins != 0:
        raise ConfigError("raw bin count must be a multiple of sub_bins")
    total = hist.total
    if total < 5.0 * sub_bins:
        raise InsufficientDataError(
            f"need at least {5 * sub_bins} counted differences, have {total:.0f}"
        )
    observed = hist.counts.reshape(sub_bins, -1).sum(axis=1)
    expected = total / sub_bins
    chi_square = float(((observed - expected) ** 2 / expected).sum())
    p = float(gammainc((sub_bins - 1) / 2.0, chi_square / 2.0))
    return chi_square, p


def detect_stream(ms, cfg: PdmmConfig) -> DetectionReport:
    """Run the block-wise uniformity test over a measurement series.

    The first block only populates the histogram; every later block is
    accumulated and then tested, halting at the first block whose CDF value
    exceeds 1 - threshold.  Blocks whose histogram is still below the
    chi-square applicability floor are skipped without a verdict.  Fewer
    than two full blocks yields an insufficient-data report.
    """
    m = np.asarray(ms.m_ns, dtype=np.int64)
    n_blocks = len(m) // cfg.block_len
    if n_blocks < 2:
        return DetectionReport(False, None, n_blocks)
    hist = InterArrivalHistogram.for_config(cfg)
    window = deque() if cfg.window_blocks is not None else None
    trajectory = []
    for b in range(n_blocks):
        lo = b * cfg.block_len
        hi = lo + cfg.block_len
        hist_start = max(0, lo - cfg.max_order)
        inc = _block_increment(m[hist_start:hi], lo - hist_start, cfg)
        hist.counts += inc
        if window is not None:
            window.append(inc)
            if len(window) > cfg.window_blocks:
                hist.counts -= window.popleft()
        if b == 0:
            continue
        try:
            chi_square, p = pearson_chi_square(hist, cfg.sub_bins)
        except InsufficientDataError:
            continue
        trajectory.append((b, chi_square, p))
        if p > 1.0 - cfg.threshold:
            return DetectionReport(True, int(m[hi - 1]), b + 1, tuple(trajectory))
    return DetectionReport(False, None, n_blocks, tuple(trajectory))


def deviation_histogram(sub_bins: int, total: float, deviation: float) -> InterArrivalHistogram:
    """Synthetic histogram with one sub-bin raised above uniformity.

    One cell holds (1/sub_bins + deviation) of the total and every other
    cell (1/sub_bins - deviation/(sub_bins-1)), preserving the total; the
    fractional deviation must leave all cells non-negative.
    """
    if sub_bins < 2:
        raise ConfigError("sub_bins must be >= 2")
    if total <= 0:
        raise ConfigError("total must be positive")
    base = 1.0 / sub_bins
    if deviation < 0 or base - deviation / (sub_bins - 1) < 0 or base + deviation > 1:
        raise ConfigError("deviation must keep all sub-bins non-negative")
    hist = InterArrivalHistogram(sub_bins)
    hist.counts[:] = (base - deviation / (sub_bins - 1)) * total
    hist.counts[0] = (base + deviation) * total
    return hist


def closed_form_chi_square(deviation: float, sub_bins: int, total: float) -> float:
    """Chi-square of the one-raised-sub-bin histogram, in closed form."""
    return deviation**2 * total * (sub_bins + sub_bins / (sub_bins - 1))


def min_detectable_deviation(sub_bins: int, total: float, threshold: float) -> float:
    """Smallest uniformity deviation the test flags at the given threshold.

    Inverts the closed form against the chi-square quantile at
    1 - threshold with sub_bins - 1 degrees of freedom.
    """
    if sub_bins < 2:
        raise ConfigError("sub_bins must be >= 2")
    if total <= 0:
        raise ConfigError("total must be positive")
    if not 0.0 < threshold < 1.0:
        raise ConfigError("threshold must be in (0, 1)")
    quantile = 2.0 * gammaincinv((sub_bins - 1) / 2.0, 1.0 - threshold)
    return float(np.sqrt(quantile / (total * (sub_bins + sub_bins / (sub_bins - 1)))))
