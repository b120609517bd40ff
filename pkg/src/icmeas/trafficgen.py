"""Synthetic packet-arrival traces: Poisson background, periodic attack, merging.

All timestamps are integer nanoseconds from the start of the trace.  Traces
are kept sorted by timestamp; equal timestamps are allowed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PreconditionError

BACKGROUND = 0
ATTACK = 1

_TRACE_HEADER = "t_ns,size_bytes,label"


@dataclass(frozen=True)
class PacketRecord:
    """One wire arrival."""

    t_ns: int
    size_bytes: int
    label: int = BACKGROUND


@dataclass(frozen=True, eq=False)
class PacketTrace:
    """Column-oriented packet sequence (sorted by t_ns)."""

    t_ns: np.ndarray
    size_bytes: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t_ns", np.asarray(self.t_ns, dtype=np.int64))
        object.__setattr__(self, "size_bytes", np.asarray(self.size_bytes, dtype=np.int64))
        object.__setattr__(self, "label", np.asarray(self.label, dtype=np.uint8))
        if not (len(self.t_ns) == len(self.size_bytes) == len(self.label)):
            raise ConfigError("trace columns must have equal length")

    def __len__(self):
        return len(self.t_ns)

    def __getitem__(self, i) -> PacketRecord:
        return PacketRecord(int(self.t_ns[i]), int(self.size_bytes[i]), int(self.label[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, PacketTrace):
            return NotImplemented
        return (
            np.array_equal(self.t_ns, other.t_ns)
            and np.array_equal(self.size_bytes, other.size_bytes)
            and np.array_equal(self.label, other.label)
        )

    def is_sorted(self) -> bool:
        return len(self) < 2 or bool(np.all(np.diff(self.t_ns) >= 0))

    @classmethod
    def empty(cls) -> "PacketTrace":
        return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.uint8))

    @classmethod
    def from_records(cls, records) -> "PacketTrace":
        records = list(records)
        return cls(
            np.array([r.t_ns for r in records], np.int64),
            np.array([r.size_bytes for r in records], np.int64),
            np.array([r.label for r in records], np.uint8),
        )


@dataclass(frozen=True)
class PoissonConfig:
    """Poisson background traffic: i.i.d. exponential inter-arrival gaps.

    mean_gap_ns is the exponential mean (float ns); duration_ns bounds the
    trace half-open at [0, duration_ns).  size_mix, when given, is a tuple of
    (size_bytes, weight) pairs overriding the fixed size.
    """

    mean_gap_ns: float
    duration_ns: int
    seed: int
    size_bytes: int = 1500
    size_mix: tuple = ()

    def __post_init__(self):
        if self.mean_gap_ns <= 0:
            raise ConfigError("mean_gap_ns must be positive")
        if self.duration_ns < 0:
            raise ConfigError("duration_ns must be non-negative")
        if self.size_mix:
            weights = [w for _, w in self.size_mix]
            if any(s < 1 for s, _ in self.size_mix) or any(w < 0 for w in weights):
                raise ConfigError("size_mix entries must be (size>=1, weight>=0)")
            if abs(sum(weights) - 1.0) > 1e-9:
                raise ConfigError("size_mix weights must sum to 1")
        elif self.size_bytes < 1:
            raise ConfigError("size_bytes must be >= 1")


@dataclass(frozen=True)
class AttackConfig:
    """Strictly periodic packet train, optional truncated Gaussian jitter."""

    period_ns: int
    duration_ns: int
    size_bytes: int = 1500
    start_offset_ns: int = 0
    jitter_stddev_ns: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.period_ns <= 0:
            raise ConfigError("period_ns must be positive")
        if self.duration_ns < 0:
            raise ConfigError("duration_ns must be non-negative")
        if self.start_offset_ns < 0:
            raise ConfigError("start_offset_ns must be non-negative")
        if self.size_bytes < 1:
            raise ConfigError("size_bytes must be >= 1")
        if self.jitter_stddev_ns < 0:
            raise ConfigError("jitter_stddev_ns must be non-negative")
        if self.jitter_stddev_ns >= self.period_ns / 4:
            raise ConfigError("jitter_stddev_ns must be below period_ns / 4")


def _draw_sizes(rng, n, cfg) -> np.ndarray:
    if cfg.size_mix:
        sizes = np.array([s for s, _ in cfg.size_mix], np.int64)
        weights = np.array([w for _, w in cfg.size_mix], float)
        weights = weights / weights.sum()
        return rng.choice(sizes, size=n, p=weights)
    return np.full(n, cfg.size_bytes, np.int64)


def gen_poisson(cfg: PoissonConfig) -> PacketTrace:
    """Generate a Poisson background trace on [0, duration_ns)."""
    if cfg.duration_ns == 0:
        return PacketTrace.empty()
    rng = np.random.default_rng(cfg.seed)
    chunks = []
    acc = 0.0
    while acc < cfg.duration_ns:
        expect = (cfg.duration_ns - acc) / cfg.mean_gap_ns
        n = int(expect * 1.05) + int(4.0 * math.sqrt(expect)) + 16
        gaps = rng.exponential(cfg.mean_gap_ns, n)
        chunks.append(gaps)
        acc += float(gaps.sum())
    t = np.cumsum(np.concatenate(chunks))
    t_ns = np.rint(t[t < cfg.duration_ns]).astype(np.int64)
    t_ns = t_ns[t_ns < cfg.duration_ns]  # rounding may touch the boundary
    sizes = _draw_sizes(rng, len(t_ns), cfg)
    return PacketTrace(t_ns, sizes, np.zeros(len(t_ns), np.uint8))


def gen_periodic(cfg: AttackConfig) -> PacketTrace:
    """Generate the periodic attack trace on [0, duration_ns)."""
    if cfg.duration_ns <= cfg.start_offset_ns:
        return PacketTrace.empty()
    n = -(-(cfg.duration_ns - cfg.start_offset_ns) // cfg.period_ns)  # ceil
    t_ns = cfg.start_offset_ns + cfg.period_ns * np.arange(n, dtype=np.int64)
    if cfg.jitter_stddev_ns > 0:
        rng = np.random.default_rng(cfg.seed)
        jitter = np.rint(rng.normal(0.0, cfg.jitter_stddev_ns, n)).astype(np.int64)
        # clamp so consecutive packets cannot reorder, then clip at t=0
        bound = cfg.period_ns // 2 - 1
        np.clip(jitter, -bound, bound, out=jitter)
        t_ns = np.maximum(t_ns + jitter, 0)
    t_ns = t_ns[t_ns < cfg.duration_ns]
    sizes = np.full(len(t_ns), cfg.size_bytes, np.int64)
    return PacketTrace(t_ns, sizes, np.ones(len(t_ns), np.uint8))


def merge(a: PacketTrace, b: PacketTrace) -> PacketTrace:
    """Merge two sorted traces; ties are ordered background before attack."""
    for name, trace in (("first", a), ("second", b)):
        if not trace.is_sorted():
            raise PreconditionError(f"{name} trace is not sorted by timestamp")
    t = np.concatenate([a.t_ns, b.t_ns])
    size = np.concatenate([a.size_bytes, b.size_bytes])
    label = np.concatenate([a.label, b.label])
    order = np.lexsort((label, t))  # stable: equal (t, label) keep input order
    return PacketTrace(t[order], size[order], label[order])


def save_trace(trace: PacketTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_TRACE_HEADER + "\n")
        out = np.column_stack([trace.t_ns, trace.size_bytes, trace.label.astype(np.int64)])
        np.savetxt(f, out, fmt="%d", delimiter=",", newline="\n")


def load_trace(path) -> PacketTrace:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != _TRACE_HEADER:
            raise PreconditionError(f"unexpected trace header: {header!r}")
        body = f.read()
    if not body.strip():
        return PacketTrace.empty()
    data = np.loadtxt(body.splitlines(), dtype=np.int64, delimiter=",", ndmin=2)
    return PacketTrace(data[:, 0], data[:, 1], data[:, 2])
