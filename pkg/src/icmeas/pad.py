"""Spectral baseline detector over uniformly resampled measurement counts.

Coalesced measurements are rasterized into a packet-count time series at a
fixed sample interval; a periodic traffic component shows up as a narrow
line in the count spectrum.  Detection slides a window over the series,
averages mean-removed periodograms over non-overlapping segments, and flags
a window whose in-band spectral peak exceeds a multiple of the in-band
median floor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pdmm import DetectionReport


@dataclass(frozen=True)
class PadConfig:
    """Rasterization, windowing, and peak-test parameters.

    The search band [min_freq_hz, max_freq_hz] bounds where peaks are
    sought; peak_factor is the detection multiplier over the in-band median
    floor.  Each analysis window is split into `segments` equal parts whose
    periodograms are averaged (more segments: steadier floor, wider bins).
    """

    sample_interval_ns: int = 100_000
    window: int = 8192
    segments: int = 8
    peak_factor: float = 10.0
    min_freq_hz: float = 200.0
    max_freq_hz: float = 3000.0

    def __post_init__(self):
        if self.sample_interval_ns <= 0:
            raise ConfigError("sample_interval_ns must be positive")
        if self.window < 64 or self.window & (self.window - 1) != 0:
            raise ConfigError("window must be a power of two, at least 64")
        if self.segments < 1 or self.window % self.segments != 0:
            raise ConfigError("segments must divide the window evenly")
        if self.peak_factor <= 1.0:
            raise ConfigError("peak_factor must exceed 1")
        if self.min_freq_hz < 0 or self.max_freq_hz <= self.min_freq_hz:
            raise ConfigError("need 0 <= min_freq_hz < max_freq_hz")
        nyquist = 0.5e9 / self.sample_interval_ns
        if self.max_freq_hz > nyquist:
            raise ConfigError(f"max_freq_hz exceeds the Nyquist frequency {nyquist:.1f}")

    @property
    def segment_len(self) -> int:
        return self.window // self.segments


def rasterize(ms, sample_interval_ns: int, n_samples: int | None = None) -> np.ndarray:
    """Bin measurement packet counts onto a uniform time grid.

    series[j] sums the counts of all measurements with timestamp in
    [j*interval, (j+1)*interval).  Without n_samples the grid extends just
    past the last measurement; with it, later measurements are dropped.
    """
    if sample_interval_ns <= 0:
        raise ConfigError("sample_interval_ns must be positive")
    if n_samples is not None and n_samples < 0:
        raise ConfigError("n_samples must be non-negative")
    if len(ms) == 0:
        return np.zeros(0 if n_samples is None else n_samples)
    idx = ms.m_ns // sample_interval_ns
    if n_samples is None:
        n_samples = int(idx[-1]) + 1
    keep = idx < n_samples
    return np.bincount(
        idx[keep].astype(np.int64), weights=ms.count[keep], minlength=n_samples
    )


def periodogram(series) -> np.ndarray:
    """Mean-removed power per non-negative frequency bin.

    Normalized so the bins sum to the series' total squared deviation from
    its mean (interior bins carry both spectral halves).
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 2:
        raise ConfigError("series must hold at least 2 samples")
    spec = np.abs(np.fft.rfft(x - x.mean())) ** 2 / n
    spec[1:] *= 2.0
    if n % 2 == 0:
        spec[-1] /= 2.0
    return spec


def detect_psd(series, cfg: PadConfig) -> DetectionReport:
    """Slide windows over the series and flag in-band spectral peaks.

    Hop is half a window.  Per window, segment periodograms are averaged and
    the in-band maximum is compared against peak_factor times the in-band
    median; detection reports the end timestamp of the first flagged
    window.  A series shorter than one window yields an insufficient-data
    report.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < cfg.window:
        return DetectionReport(False, None, 0)
    seg = cfg.segment_len
    freqs = np.fft.rfftfreq(seg, d=cfg.sample_interval_ns / 1e9)
    band = (freqs >= cfg.min_freq_hz) & (freqs <= cfg.max_freq_hz)
    if not band.any():
        raise ConfigError("search band contains no frequency bins")
    band_freqs = freqs[band]
    trajectory = []
    windows = 0
    for start in range(0, len(x) - cfg.window + 1, cfg.window // 2):
        windows += 1
        psd = np.zeros(seg // 2 + 1)
        for s in range(cfg.segments):
            psd += periodogram(x[start + s * seg : start + (s + 1) * seg])
        psd /= cfg.segments
        in_band = psd[band]
        floor = float(np.median(in_band))
        if floor > 0.0:
            k = int(np.argmax(in_band))
            ratio = float(in_band[k]) / floor
            peak_freq = float(band_freqs[k])
        else:
            ratio, peak_freq = 0.0, 0.0
        trajectory.append((windows - 1, ratio, peak_freq))
        if ratio > cfg.peak_factor:
            end_ns = (start + cfg.window) * cfg.sample_interval_ns
            return DetectionReport(True, int(end_ns), windows, tuple(trajectory))
    return DetectionReport(False, None, windows, tuple(trajectory))
