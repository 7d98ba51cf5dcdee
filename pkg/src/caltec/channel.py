"""Gilbert-Elliott burst-loss channel: parameterization, traces, statistics.

The channel is a two-state Markov chain with a Good state that always
delivers and a Bad state that always loses. It is parameterized by the
burst loss probability pb and the average burst length lb, converted to
transition probabilities as

    p_bg = 1 / lb
    p_gb = pb / (lb * (1 - pb))
    p_bb = 1 - p_bg
    p_gg = 1 - p_gb

The stationary loss fraction of the chain is pb and the mean length of a
loss burst is lb.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "GEParams",
    "ChannelTrace",
    "TraceStats",
    "ge_convert",
    "gen_trace",
    "trace_stats",
    "save_trace",
]


@dataclass(frozen=True)
class GEParams:
    """Burst-loss parameterization plus the derived transition probabilities."""

    pb: float
    lb: float
    p_bg: float
    p_gb: float
    p_bb: float
    p_gg: float

    @property
    def stationary_bad(self) -> float:
        """Stationary probability of the Bad state; equals pb."""
        return self.p_gb / (self.p_gb + self.p_bg)


def ge_convert(pb: float, lb: float) -> GEParams:
    """Convert (burst loss probability, average burst length) to GEParams.

    Requires 0 <= pb < 1, lb >= 1, and the implied Good-to-Bad probability
    to be at most 1, which bounds the admissible (pb, lb) pairs.
    """
    if not (0.0 <= pb < 1.0):
        raise ValueError(f"burst loss probability must be in [0, 1), got {pb}")
    if not (lb >= 1.0):
        raise ValueError(f"average burst length must be >= 1, got {lb}")
    p_bg = 1.0 / lb
    p_gb = pb / (lb * (1.0 - pb))
    if p_gb > 1.0:
        raise ValueError(
            f"inadmissible pair (pb={pb}, lb={lb}): implied Good-to-Bad probability {p_gb:.6g} > 1"
        )
    return GEParams(pb=float(pb), lb=float(lb), p_bg=p_bg, p_gb=p_gb, p_bb=1.0 - p_bg, p_gg=1.0 - p_gb)


@dataclass(frozen=True)
class ChannelTrace:
    """A realized loss sequence; True = received (Good), False = lost (Bad)."""

    received: np.ndarray
    params: GEParams
    seed: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.received, dtype=bool)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("trace must be a nonempty 1-D sequence")
        arr.flags.writeable = False
        object.__setattr__(self, "received", arr)

    def __len__(self) -> int:
        return self.received.size


def gen_trace(params: GEParams, n: int, seed: int) -> ChannelTrace:
    """Generate a deterministic n-packet trace for the given seed.

    The initial state is drawn from the stationary distribution, so short
    traces are unbiased. The chain is realized as alternating geometric
    sojourn times (memorylessness makes this identical in distribution to
    stepping the two-state chain packet by packet) on a NumPy PCG64 stream.
    """
    if n < 1:
        raise ValueError(f"packet count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    lost = np.zeros(n, dtype=bool)
    bad = bool(rng.random() < params.stationary_bad)
    if params.p_gb == 0.0:
        # Good state is absorbing: at most one initial burst.
        if bad:
            lost[: min(int(rng.geometric(params.p_bg)), n)] = True
        return ChannelTrace(received=~lost, params=params, seed=seed)

    mean_pair = 1.0 / params.p_gb + 1.0 / params.p_bg
    chunks = []
    filled = 0
    while filled < n:
        m = int((n - filled) / mean_pair) + 8
        glen = rng.geometric(params.p_gb, size=m)
        blen = rng.geometric(params.p_bg, size=m)
        lens = np.empty(2 * m, dtype=np.int64)
        flags = np.empty(2 * m, dtype=bool)
        if bad:
            lens[0::2], lens[1::2] = blen, glen
            flags[0::2], flags[1::2] = True, False
        else:
            lens[0::2], lens[1::2] = glen, blen
            flags[0::2], flags[1::2] = False, True
        chunk = np.repeat(flags, lens)
        chunks.append(chunk)
        filled += chunk.size
        # Each batch holds an even number of runs, so the next state repeats `bad`.
    lost = np.concatenate(chunks)[:n]
    return ChannelTrace(received=~lost, params=params, seed=seed)


class TraceStats(NamedTuple):
    loss_fraction: float
    mean_burst_length: float
    burst_count: int


def trace_stats(trace: ChannelTrace) -> TraceStats:
    """Empirical loss fraction and burst statistics of a trace.

    A burst is a maximal run of lost packets. A trace with no bursts reports
    mean burst length 0.
    """
    lost = ~trace.received
    loss_fraction = float(lost.mean())
    edges = np.diff(np.concatenate(([0], lost.astype(np.int8), [0])))
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0]
    count = starts.size
    mean_len = float((ends - starts).mean()) if count else 0.0
    return TraceStats(loss_fraction=loss_fraction, mean_burst_length=mean_len, burst_count=count)


def save_trace(trace: ChannelTrace, path) -> None:
    """Serialize a trace as a uint8 NPY vector, 1 = received."""
    arr = trace.received.astype(np.uint8)
    with open(path, "wb") as f:
        np.lib.format.write_array(f, arr, version=(1, 0), allow_pickle=False)
