"""Packet-based deep feature tensor transmission with content-adaptive recovery.

Pipeline: a feature tensor is min-max quantized to 8 bits, split per channel
into packets of r rows, sent through a Gilbert-Elliott burst-loss channel,
reassembled with zeros in the gaps, and repaired either by CALTeC
(content-adaptive linear tensor completion) or by one of the reference
baselines. A seeded Monte Carlo harness sweeps the (pb, lb) grid and writes
replayable CSV results.
"""

from .baselines import linear_interp, neighbor_copy, zero_fill
from .channel import ChannelTrace, GEParams, TraceStats, ge_convert, gen_trace, save_trace, trace_stats
from .harness import ExperimentConfig, derive_seed, mask_digest, run_sweep, summarize
from .packets import (
    LossMask,
    PacketGrid,
    PacketStream,
    load_mask,
    packetize,
    reassemble,
    save_mask,
    vectorize_packet,
)
from .repair import (
    AffineCoefficients,
    NeighborChoice,
    RepairReport,
    find_best_channel,
    fit_affine,
    pearson,
    recover_packet,
    repair_tensor,
    select_neighbor,
)
from .tensors import (
    ChannelRecipe,
    FeatureTensor,
    QuantizedTensor,
    TensorIOError,
    dequantize,
    gen_synthetic,
    load_tensor,
    quantize,
    save_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCoefficients",
    "ChannelRecipe",
    "ChannelTrace",
    "ExperimentConfig",
    "FeatureTensor",
    "GEParams",
    "LossMask",
    "NeighborChoice",
    "PacketGrid",
    "PacketStream",
    "QuantizedTensor",
    "RepairReport",
    "TensorIOError",
    "TraceStats",
    "dequantize",
    "derive_seed",
    "find_best_channel",
    "fit_affine",
    "ge_convert",
    "gen_synthetic",
    "gen_trace",
    "linear_interp",
    "load_mask",
    "load_tensor",
    "mask_digest",
    "neighbor_copy",
    "packetize",
    "pearson",
    "quantize",
    "reassemble",
    "recover_packet",
    "repair_tensor",
    "run_sweep",
    "save_mask",
    "save_tensor",
    "select_neighbor",
    "summarize",
    "save_trace",
    "trace_stats",
    "vectorize_packet",
    "zero_fill",
]
