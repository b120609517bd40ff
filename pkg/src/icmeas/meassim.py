"""Interrupt-coalescence measurement simulation.

A trace of packet arrivals is pushed through a transfer-delay stage and one
of three coalescing strategies.  Each asserted interrupt yields a measurement
record (m, c): the interrupt timestamp and the number of packets it services.
The interrupt handler itself is modeled as instantaneous, so m is exactly the
timer expiry (or, for count-based coalescing, the triggering arrival).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PreconditionError
from .trafficgen import PacketTrace

_MEAS_HEADER = "m_ns,count"


@dataclass(frozen=True)
class MeasurementRecord:
    """One interrupt: assertion timestamp and packets serviced."""

    m_ns: int
    count: int


@dataclass(frozen=True, eq=False)
class MeasurementSeries:
    """Column-oriented measurement sequence with simulation flags."""

    m_ns: np.ndarray
    count: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "m_ns", np.asarray(self.m_ns, dtype=np.int64))
        object.__setattr__(self, "count", np.asarray(self.count, dtype=np.int64))
        if len(self.m_ns) != len(self.count):
            raise ConfigError("measurement columns must have equal length")

    def __len__(self):
        return len(self.m_ns)

    def __getitem__(self, i) -> MeasurementRecord:
        return MeasurementRecord(int(self.m_ns[i]), int(self.count[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, MeasurementSeries):
            return NotImplemented
        return np.array_equal(self.m_ns, other.m_ns) and np.array_equal(self.count, other.count)

    def total_packets(self) -> int:
        return int(self.count.sum())

    def validate(self) -> None:
        """Assert the series invariants: c >= 1 and strictly increasing m."""
        if len(self) == 0:
            return
        if int(self.count.min()) < 1:
            raise PreconditionError("measurement counts must be >= 1")
        if len(self) > 1 and int(np.diff(self.m_ns).min()) <= 0:
            raise PreconditionError("measurement timestamps must be strictly increasing")


@dataclass(frozen=True)
class TransferConfig:
    """Fixed-rate link: each packet is timestamped after its transfer delay."""

    bit_rate_bps: float = 1_000_000_000.0

    def __post_init__(self):
        if self.bit_rate_bps <= 0:
            raise ConfigError("bit_rate_bps must be positive")


@dataclass(frozen=True)
class TicConfig:
    """Fixed-timer coalescing: the timer starts at a group's first arrival."""

    timer_ns: int

    def __post_init__(self):
        if self.timer_ns <= 0:
            raise ConfigError("timer_ns must be positive")


@dataclass(frozen=True)
class PicConfig:
    """Count-based coalescing: interrupt on every count-th arrival."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("count must be >= 1")


@dataclass(frozen=True)
class HicConfig:
    """Dual-timer coalescing.

    packet_timer_ns restarts on every arrival; absolute_timer_ns runs from a
    group's first arrival.  The interrupt fires at whichever expires first.
    A packet timer at or above the absolute timer defeats the scheme's
    purpose and is rejected unless explicitly allowed.
    """

    packet_timer_ns: int
    absolute_timer_ns: int
    allow_inverted_timers: bool = False

    def __post_init__(self):
        if self.packet_timer_ns <= 0 or self.absolute_timer_ns <= 0:
            raise ConfigError("timers must be positive")
        if self.packet_timer_ns >= self.absolute_timer_ns and not self.allow_inverted_timers:
            raise ConfigError(
                "packet_timer_ns must be below absolute_timer_ns "
                "(set allow_inverted_timers to override)"
            )


CoalescenceConfig = TicConfig | PicConfig | HicConfig


def apply_transfer(trace: PacketTrace, cfg: TransferConfig) -> PacketTrace:
    """Shift each arrival by its serialization delay, re-sorting if needed."""
    if not trace.is_sorted():
        raise PreconditionError("trace is not sorted by timestamp")
    if len(trace) == 0:
        return trace
    delay = np.rint(trace.size_bytes * (8e9 / cfg.bit_rate_bps)).astype(np.int64)
    t = trace.t_ns + delay
    if np.all(np.diff(t) >= 0):
        return PacketTrace(t, trace.size_bytes, trace.label)
    order = np.argsort(t, kind="stable")
    return PacketTrace(t[order], trace.size_bytes[order], trace.label[order])


def _coalesce_tic(t: np.ndarray, cfg: TicConfig):
    arrivals = t.tolist()
    m_out, c_out = [], []
    start = arrivals[0]
    isr = start + cfg.timer_ns
    count = 1
    for x in arrivals[1:]:
        if x < isr:  # half-open: an arrival at the expiry opens the next group
            count += 1
        else:
            m_out.append(isr)
            c_out.append(count)
            isr = x + cfg.timer_ns
            count = 1
    m_out.append(isr)
    c_out.append(count)
    return m_out, c_out, {}


def _coalesce_pic(t: np.ndarray, cfg: PicConfig):
    n = len(t)
    full = n // cfg.count
    m_out = t[cfg.count - 1 :: cfg.count][:full].tolist()
    c_out = [cfg.count] * full
    flags = {}
    rem = n - full * cfg.count
    if rem:
        # trailing packets never reach the threshold: flush at the last arrival
        m_out.append(int(t[-1]))
        c_out.append(rem)
        flags["pic_flushed"] = True
    return m_out, c_out, flags


def _coalesce_hic(t: np.ndarray, cfg: HicConfig):
    arrivals = t.tolist()
    pack = cfg.packet_timer_ns
    hard = cfg.absolute_timer_ns
    m_out, c_out = [], []
    abs_fired = 0
    pack_fired = 0
    start = arrivals[0]
    last = start
    count = 1
    for x in arrivals[1:]:
        expiry = start + hard
        soft = last + pack
        if soft < expiry:
            expiry = soft
        if x < expiry:
            last = x
            count += 1
        else:
            m_out.append(expiry)
            c_out.append(count)
            if expiry == start + hard:
                abs_fired += 1
            else:
                pack_fired += 1
            start = x
            last = x
            count = 1
    expiry = min(start + hard, last + pack)
    m_out.append(expiry)
    c_out.append(count)
    if expiry == start + hard:
        abs_fired += 1
    else:
        pack_fired += 1
    return m_out, c_out, {"hic_abs_fired": abs_fired, "hic_pack_fired": pack_fired}


def coalesce(trace: PacketTrace, cfg: CoalescenceConfig) -> MeasurementSeries:
    """Group a sorted trace into measurements under the given strategy.

    Timers are idle until the next arrival; the last group is closed by its
    own timers (or flushed, for count-based coalescing).  Packet counts are
    conserved: sum(count) == len(trace).
    """
    if not trace.is_sorted():
        raise PreconditionError("trace is not sorted by timestamp")
    if len(trace) == 0:
        return MeasurementSeries(np.empty(0, np.int64), np.empty(0, np.int64))
    if isinstance(cfg, TicConfig):
        m, c, flags = _coalesce_tic(trace.t_ns, cfg)
    elif isinstance(cfg, PicConfig):
        m, c, flags = _coalesce_pic(trace.t_ns, cfg)
    elif isinstance(cfg, HicConfig):
        m, c, flags = _coalesce_hic(trace.t_ns, cfg)
    else:
        raise ConfigError(f"unknown coalescence config: {cfg!r}")
    return MeasurementSeries(np.array(m, np.int64), np.array(c, np.int64), flags)


def measure(
    trace: PacketTrace, transfer: TransferConfig, cfg: CoalescenceConfig
) -> MeasurementSeries:
    """Full measurement pipeline: transfer delay, then coalescence."""
    return coalesce(apply_transfer(trace, transfer), cfg)


def save_measurements(series: MeasurementSeries, path, config: dict | None = None) -> None:
    """Write m/count CSV plus a JSON sidecar with config echo and flags."""
    path = str(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_MEAS_HEADER + "\n")
        out = np.column_stack([series.m_ns, series.count])
        np.savetxt(f, out, fmt="%d", delimiter=",", newline="\n")
    sidecar = {"config": config or {}, "flags": dict(series.flags)}
    with open(path + ".json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_measurements(path) -> MeasurementSeries:
    path = str(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header != _MEAS_HEADER:
            raise PreconditionError(f"unexpected measurement header: {header!r}")
        body = f.read()
    flags = {}
    try:
        with open(path + ".json", "r", encoding="utf-8") as f:
            flags = json.load(f).get("flags", {})
    except OSError:
        pass  # sidecar is optional on load
    if not body.strip():
        return MeasurementSeries(np.empty(0, np.int64), np.empty(0, np.int64), flags)
    data = np.loadtxt(body.splitlines(), dtype=np.int64, delimiter=",", ndmin=2)
    return MeasurementSeries(data[:, 0], data[:, 1], flags)
