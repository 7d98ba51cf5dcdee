"""Packetization of tensor channels into r-row packets and reassembly.

Each channel of a quantized tensor is split into groups of r consecutive
rows; the last group is zero-padded to r rows when h is not divisible by r.
Packets are laid out in a linear transmission order (channel-major by
default), and reassembly dequantizes the received packets back into an
h x w x c tensor, zeroing the elements of lost packets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTrace
from .tensors import FeatureTensor, QuantizedTensor

__all__ = [
    "PacketGrid",
    "LossMask",
    "PacketStream",
    "PACKET_ORDERS",
    "packetize",
    "vectorize_packet",
    "reassemble",
    "save_mask",
    "load_mask",
]

PACKET_ORDERS = ("channel-major", "row-major")


@dataclass(frozen=True)
class PacketGrid:
    """Partition of h rows into packets of r rows each."""

    h: int
    w: int
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"rows per packet must be >= 1, got {self.r}")
        if self.h < 1 or self.w < 1:
            raise ValueError(f"grid dimensions must be positive, got ({self.h}, {self.w})")

    @property
    def n_packets(self) -> int:
        return -(-self.h // self.r)

    @property
    def pad_rows(self) -> int:
        return -self.h % self.r

    def rows(self, i: int) -> tuple[int, int]:
        """Half-open row interval [start, stop) actually covered by packet i."""
        if not (0 <= i < self.n_packets):
            raise IndexError(f"packet index {i} out of range [0, {self.n_packets})")
        return i * self.r, min((i + 1) * self.r, self.h)


@dataclass(frozen=True)
class LossMask:
    """Per-packet received/lost flags, shape (c, n_packets); True = received."""

    received: np.ndarray
    grid: PacketGrid

    def __post_init__(self):
        arr = np.ascontiguousarray(self.received, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"loss mask must be 2-D, got rank {arr.ndim}")
        if arr.shape[1] != self.grid.n_packets:
            raise ValueError(
                f"mask has {arr.shape[1]} packets per channel, grid expects {self.grid.n_packets}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "received", arr)

    @property
    def c(self) -> int:
        return self.received.shape[0]

    @property
    def n_lost(self) -> int:
        return int((~self.received).sum())

    def lost_packets(self) -> list[tuple[int, int]]:
        """All lost (packet index, channel) pairs, channel-major order."""
        chans, idxs = np.nonzero(~self.received)
        return [(int(i), int(j)) for j, i in zip(chans, idxs)]


def save_mask(mask: LossMask, path) -> None:
    """Serialize a mask as a uint8 NPY matrix (c, n_packets), 1 = received."""
    arr = np.ascontiguousarray(mask.received, dtype=np.uint8)
    with open(path, "wb") as f:
        np.lib.format.write_array(f, arr, version=(1, 0), allow_pickle=False)


def load_mask(path, grid: PacketGrid) -> LossMask:
    """Load a mask written by :func:`save_mask`, attaching packet geometry."""
    with open(path, "rb") as f:
        arr = np.lib.format.read_array(f, allow_pickle=False)
    if arr.ndim != 2:
        raise ValueError(f"{path}: expected a 2-D mask, got rank {arr.ndim}")
    return LossMask(received=arr.astype(bool), grid=grid)


@dataclass(frozen=True)
class PacketStream:
    """Packets of one tensor in transmission order, plus dequantization metadata."""

    packets: np.ndarray  # (c * n_packets, r, w)
    grid: PacketGrid
    c: int
    vmin: float
    vmax: float
    bits: int
    order: str = "channel-major"

    def __post_init__(self):
        if self.order not in PACKET_ORDERS:
            raise ValueError(f"unknown packet order {self.order!r}, expected one of {PACKET_ORDERS}")

    @property
    def n_total(self) -> int:
        return self.c * self.grid.n_packets

    def linear_index(self, i: int, j: int) -> int:
        """Transmission position of packet i of channel j."""
        if self.order == "channel-major":
            return j * self.grid.n_packets + i
        return i * self.c + j

    def unravel(self, pos: int) -> tuple[int, int]:
        """Inverse of :meth:`linear_index`: (packet index, channel)."""
        if self.order == "channel-major":
            return pos % self.grid.n_packets, pos // self.grid.n_packets
        return pos // self.c, pos % self.c


def packetize(q: QuantizedTensor, r: int, order: str = "channel-major") -> PacketStream:
    """Split every channel into r-row packets, zero-padding the last one.

    Channel-major order transmits all packets of channel 0 by increasing row
    index, then channel 1, and so on; row-major order interleaves packet i of
    every channel before packet i+1.
    """
    grid = PacketGrid(h=q.h, w=q.w, r=r)
    n = grid.n_packets
    padded = np.zeros((n * r, q.w, q.c), dtype=q.qdata.dtype)
    padded[: q.h] = q.qdata
    # (n, r, w, c) -> transmission-ordered (c * n, r, w)
    blocks = padded.reshape(n, r, q.w, q.c)
    if order == "channel-major":
        packets = blocks.transpose(3, 0, 1, 2).reshape(q.c * n, r, q.w)
    elif order == "row-major":
        packets = blocks.transpose(0, 3, 1, 2).reshape(q.c * n, r, q.w)
    else:
        raise ValueError(f"unknown packet order {order!r}, expected one of {PACKET_ORDERS}")
    return PacketStream(
        packets=np.ascontiguousarray(packets),
        grid=grid,
        c=q.c,
        vmin=q.vmin,
        vmax=q.vmax,
        bits=q.bits,
        order=order,
    )


def vectorize_packet(p: np.ndarray) -> np.ndarray:
    """Row-major flattening of an r x w packet block into a length r*w vector."""
    p = np.asarray(p)
    if p.ndim != 2:
        raise ValueError(f"packet block must be 2-D, got rank {p.ndim}")
    return np.ascontiguousarray(p).reshape(-1)


def reassemble(stream: PacketStream, trace: ChannelTrace) -> tuple[FeatureTensor, LossMask]:
    """Rebuild a tensor from the packets a channel trace marks as received.

    Received packets are dequantized into place; every element covered by a
    lost packet is set to 0 (not dequantize(0)). Padding rows are dropped, so
    the result has exactly h rows.
    """
    grid = stream.grid
    n = grid.n_packets
    if len(trace) != stream.n_total:
        raise ValueError(
            f"trace length {len(trace)} does not match packet count {stream.n_total}"
        )
    # Same operation order as dequantize so the two agree bit for bit.
    levels = (1 << stream.bits) - 1
    deq = stream.vmin + stream.packets.astype(np.float64) / levels * (stream.vmax - stream.vmin)
    deq[~trace.received] = 0.0

    received = np.empty((stream.c, n), dtype=bool)
    if stream.order == "channel-major":
        received[:] = trace.received.reshape(stream.c, n)
        blocks = deq.reshape(stream.c, n, grid.r, grid.w).transpose(1, 2, 3, 0)
    else:
        received[:] = trace.received.reshape(n, stream.c).T
        blocks = deq.reshape(n, stream.c, grid.r, grid.w).transpose(0, 2, 3, 1)
    full = blocks.reshape(n * grid.r, grid.w, stream.c)
    tensor = FeatureTensor(full[: grid.h])
    return tensor, LossMask(received=received, grid=grid)
