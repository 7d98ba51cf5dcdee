"""Content-adaptive linear tensor completion (CALTeC).

Each missing packet is recovered from the most locally similar channel:
take the nearest correctly received packet in the same channel, search all
channels that received both packet positions for the highest Pearson
correlation against that neighbor, fit an affine map a*source + b on the
neighbor position by least squares, and apply it to the collocated packet
of the winning channel. A channel that lost every packet is zeroed.

Sources are always drawn from received data, never from packets repaired
earlier, so the result is independent of the processing order.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .packets import LossMask, PacketGrid
from .tensors import FeatureTensor

__all__ = [
    "NeighborChoice",
    "AffineCoefficients",
    "RepairReport",
    "select_neighbor",
    "pearson",
    "find_best_channel",
    "fit_affine",
    "recover_packet",
    "repair_tensor",
]


@dataclass(frozen=True)
class NeighborChoice:
    """Nearest received packet in the same channel as a lost packet.

    ``neighbor`` is None only when the entire channel was lost. When two
    received packets are equally close, the one below (larger index) wins.
    """

    packet: int
    channel: int
    neighbor: int | None
    distance: int | None


@dataclass(frozen=True)
class AffineCoefficients:
    """Least-squares fit target ~ a*source + b.

    ``singular`` marks a degenerate (constant-source) system solved by the
    offset-only fallback a=0, b=mean(target).
    """

    a: float
    b: float
    source_channel: int | None
    rss: float
    singular: bool = False


@dataclass
class RepairReport:
    """Per-tensor recovery accounting, shared by all completion methods.

    ``repaired`` counts lost packets filled by any per-packet rule; packets
    of wholly lost channels are zeroed instead and counted per channel in
    ``zero_filled_channels``. ``neighbor_copy_fallbacks`` counts packets
    filled by copying the neighbor because no candidate channel had both
    packet positions; ``singular_fits`` counts degenerate fits (constant
    neighbor or constant source).
    """

    method: str
    repaired: int = 0
    zero_filled_channels: int = 0
    neighbor_copy_fallbacks: int = 0
    singular_fits: int = 0
    repair_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "repaired": self.repaired,
            "zero_filled_channels": self.zero_filled_channels,
            "neighbor_copy_fallbacks": self.neighbor_copy_fallbacks,
            "singular_fits": self.singular_fits,
            "repair_ms": self.repair_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def select_neighbor(mask: LossMask, i: int, j: int) -> NeighborChoice:
    """Pick the spatially closest received packet in channel j for lost packet i."""
    received = mask.received[j]
    if received[i]:
        raise ValueError(f"packet ({i}, {j}) is not lost")
    candidates = np.nonzero(received)[0]
    if candidates.size == 0:
        return NeighborChoice(packet=i, channel=j, neighbor=None, distance=None)
    dist = np.abs(candidates - i)
    dmin = int(dist.min())
    # At most two candidates at minimal distance; ties go to the one below.
    neighbor = int(candidates[dist == dmin].max())
    return NeighborChoice(packet=i, channel=j, neighbor=neighbor, distance=dmin)


def pearson(u: np.ndarray, v: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length vectors.

    Computed as (u-mu_u).(v-mu_v) / sqrt(|u-mu_u|^2 |v-mu_v|^2), identical
    to the population-statistics form. Returns -inf when either vector is
    constant, so degenerate candidates always lose an argmax.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1 or u.size != v.size:
        raise ValueError(f"expected equal-length vectors, got shapes {u.shape} and {v.shape}")
    if u.size < 2:
        raise ValueError(f"vectors must have length >= 2, got {u.size}")
    du = u - u.mean()
    dv = v - v.mean()
    denom_sq = (du @ du) * (dv @ dv)
    if denom_sq == 0.0:
        return -math.inf
    return float((du @ dv) / math.sqrt(denom_sq))


def _packet_vector(
    data: np.ndarray, grid: PacketGrid, i: int, j: int, include_padding: bool
) -> np.ndarray:
    """Row-major vector of packet i of channel j, zero-padded to r*w by default."""
    a, b = grid.rows(i)
    block = data[a:b, :, j]
    if include_padding and b - a < grid.r:
        full = np.zeros((grid.r, grid.w), dtype=np.float64)
        full[: b - a] = block
        block = full
    return block.reshape(-1)


def find_best_channel(
    tensor: FeatureTensor,
    mask: LossMask,
    i: int,
    i_neighbor: int,
    j: int,
    include_padding: bool = True,
) -> int | None:
    """Channel most correlated with channel j at the neighbor packet position.

    Only channels k != j that received both packets i and i_neighbor are
    eligible; constant candidates are excluded. Exact score ties resolve to
    the lowest channel index. Returns None when no usable candidate exists.
    """
    received = mask.received
    target = _packet_vector(tensor.data, mask.grid, i_neighbor, j, include_padding)
    best_k = None
    best_score = -math.inf
    for k in range(mask.c):
        if k == j or not (received[k, i] and received[k, i_neighbor]):
            continue
        score = pearson(target, _packet_vector(tensor.data, mask.grid, i_neighbor, k, include_padding))
        if score > best_score:
            best_score = score
            best_k = k
    if best_score == -math.inf:
        return None
    return best_k


def fit_affine(
    target: np.ndarray, source: np.ndarray, source_channel: int | None = None
) -> AffineCoefficients:
    """Closed-form least squares for target ~ a*source + b.

    Solves the 2x2 normal equations explicitly. A numerically singular
    system (constant source) falls back to a=0, b=mean(target), the least
    squares solution restricted to the offset term.
    """
    t = np.asarray(target, dtype=np.float64)
    s = np.asarray(source, dtype=np.float64)
    if t.ndim != 1 or s.ndim != 1 or t.size != s.size:
        raise ValueError(f"expected equal-length vectors, got shapes {t.shape} and {s.shape}")
    n = t.size
    if n < 2:
        raise ValueError(f"vectors must have length >= 2, got {n}")
    s1 = float(s.sum())
    s2 = float(s @ s)
    t1 = float(t.sum())
    st = float(s @ t)
    det = n * s2 - s1 * s1
    scale = max(n * s2, s1 * s1, 1e-300)
    if abs(det) < 1e-12 * scale:
        a, b, singular = 0.0, t1 / n, True
    else:
        a = (n * st - s1 * t1) / det
        b = (s2 * t1 - s1 * st) / det
        singular = False
    resid = t - (a * s + b)
    return AffineCoefficients(
        a=a, b=b, source_channel=source_channel, rss=float(resid @ resid), singular=singular
    )


def recover_packet(coeffs: AffineCoefficients, source_packet: np.ndarray) -> np.ndarray:
    """Element-wise affine map a*source + b of a collocated source packet."""
    return coeffs.a * np.asarray(source_packet, dtype=np.float64) + coeffs.b


def _check_shapes(tensor: FeatureTensor, mask: LossMask) -> None:
    grid = mask.grid
    if (tensor.h, tensor.w, tensor.c) != (grid.h, grid.w, mask.c):
        raise ValueError(
            f"tensor shape {tensor.shape} does not match mask geometry "
            f"({grid.h}, {grid.w}, {mask.c})"
        )


def repair_tensor(
    tensor: FeatureTensor, mask: LossMask, include_padding: bool = True
) -> tuple[FeatureTensor, RepairReport]:
    """Recover every lost packet of a reassembled tensor.

    Received data passes through bit-exactly. ``include_padding`` controls
    whether the zero rows padding a short final packet take part in the
    correlation and fit vectors (they do by default).
    """
    _check_shapes(tensor, mask)
    grid = mask.grid
    data = tensor.data
    out = np.array(data)
    report = RepairReport(method="caltec")
    t0 = time.perf_counter()
    for j in range(mask.c):
        lost = np.nonzero(~mask.received[j])[0]
        if lost.size == 0:
            continue
        if lost.size == grid.n_packets:
            out[:, :, j] = 0.0
            report.zero_filled_channels += 1
            continue
        for i in lost:
            choice = select_neighbor(mask, int(i), j)
            a, b = grid.rows(int(i))
            tvec = _packet_vector(data, grid, choice.neighbor, j, include_padding)
            if tvec.min() == tvec.max():
                # Constant neighbor: correlation is undefined, fill with the constant.
                out[a:b, :, j] = tvec[0]
                report.repaired += 1
                report.singular_fits += 1
                continue
            k = find_best_channel(tensor, mask, int(i), choice.neighbor, j, include_padding)
            if k is None:
                na, nb = grid.rows(choice.neighbor)
                block = np.zeros((grid.r, grid.w), dtype=np.float64)
                block[: nb - na] = data[na:nb, :, j]
                out[a:b, :, j] = block[: b - a]
                report.repaired += 1
                report.neighbor_copy_fallbacks += 1
                continue
            svec = _packet_vector(data, grid, choice.neighbor, k, include_padding)
            coeffs = fit_affine(tvec, svec, source_channel=k)
            if coeffs.singular:
                report.singular_fits += 1
            out[a:b, :, j] = recover_packet(coeffs, data[a:b, :, k])
            report.repaired += 1
    report.repair_ms = (time.perf_counter() - t0) * 1e3
    return FeatureTensor(out), report
