"""Reference completion methods: zero fill, neighbor copy, linear interpolation.

All three share the repair interface and report schema of the main method
and preserve received data bit-exactly.
"""

from __future__ import annotations

import time

import numpy as np

from .packets import LossMask
from .repair import RepairReport, _check_shapes, select_neighbor
from .tensors import FeatureTensor

__all__ = ["zero_fill", "neighbor_copy", "linear_interp"]


def zero_fill(tensor: FeatureTensor, mask: LossMask) -> tuple[FeatureTensor, RepairReport]:
    """Set every element covered by a lost packet to zero (no completion)."""
    _check_shapes(tensor, mask)
    grid = mask.grid
    out = np.array(tensor.data)
    report = RepairReport(method="zero_fill")
    t0 = time.perf_counter()
    for j in range(mask.c):
        lost = np.nonzero(~mask.received[j])[0]
        if lost.size == grid.n_packets:
            report.zero_filled_channels += 1
        for i in lost:
            a, b = grid.rows(int(i))
            out[a:b, :, j] = 0.0
    report.repair_ms = (time.perf_counter() - t0) * 1e3
    return FeatureTensor(out), report


def neighbor_copy(tensor: FeatureTensor, mask: LossMask) -> tuple[FeatureTensor, RepairReport]:
    """Replace each lost packet with its nearest received packet in the channel.

    Uses the same neighbor selection rule as the main method (ties go to the
    packet below); wholly lost channels are zero-filled.
    """
    _check_shapes(tensor, mask)
    grid = mask.grid
    data = tensor.data
    out = np.array(data)
    report = RepairReport(method="neighbor_copy")
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
            na, nb = grid.rows(choice.neighbor)
            block = np.zeros((grid.r, grid.w), dtype=np.float64)
            block[: nb - na] = data[na:nb, :, j]
            out[a:b, :, j] = block[: b - a]
            report.repaired += 1
    report.repair_ms = (time.perf_counter() - t0) * 1e3
    return FeatureTensor(out), report


def linear_interp(tensor: FeatureTensor, mask: LossMask) -> tuple[FeatureTensor, RepairReport]:
    """Interpolate each lost row per column between the nearest received rows.

    Rows inside a gap are linearly interpolated between the closest received
    row above and below; gaps touching the tensor edge extend the nearest
    received row; wholly lost channels are zero-filled.
    """
    _check_shapes(tensor, mask)
    grid = mask.grid
    data = tensor.data
    out = np.array(data)
    report = RepairReport(method="linear_interp")
    t0 = time.perf_counter()
    for j in range(mask.c):
        lost = np.nonzero(~mask.received[j])[0]
        if lost.size == 0:
            continue
        if lost.size == grid.n_packets:
            out[:, :, j] = 0.0
            report.zero_filled_channels += 1
            continue
        rec_rows = np.concatenate(
            [np.arange(*grid.rows(int(i))) for i in np.nonzero(mask.received[j])[0]]
        )
        lost_rows = np.concatenate([np.arange(*grid.rows(int(i))) for i in lost])
        pos = np.searchsorted(rec_rows, lost_rows)
        for y, p in zip(lost_rows, pos):
            if p == 0:
                out[y, :, j] = data[rec_rows[0], :, j]
            elif p == rec_rows.size:
                out[y, :, j] = data[rec_rows[-1], :, j]
            else:
                lo, hi = rec_rows[p - 1], rec_rows[p]
                w = (y - lo) / (hi - lo)
                out[y, :, j] = (1.0 - w) * data[lo, :, j] + w * data[hi, :, j]
        report.repaired += lost.size
    report.repair_ms = (time.perf_counter() - t0) * 1e3
    return FeatureTensor(out), report
