"""Feature tensors, min-max quantization, NPY file I/O, and synthetic test data.

A feature tensor is an h x w x c array of finite real values, stored
internally as float64 in C order regardless of the on-disk element width.
Quantization maps it to unsigned integers using the global min and max of
the tensor; dequantization inverts the mapping up to half a quantizer step.
"""

from __future__ import annotations


from dataclasses import dataclass

import numpy as np

__all__ = [
    "FeatureTensor",
    "QuantizedTensor",
    "ChannelRecipe",
    "TensorIOError",
    "quantize",
    "dequantize",
    "load_tensor",
    "save_tensor",
    "gen_synthetic",
]


class TensorIOError(ValueError):
    """Raised when a tensor file cannot be read or violates the file contract."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FeatureTensor:
    """An h x w x c real-valued feature array.

    ``data`` is normalized to a read-only float64 C-order array at
    construction. All values must be finite.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"feature tensor must be 3-D, got rank {arr.ndim}")
        if min(arr.shape) < 1:
            raise ValueError(f"feature tensor dimensions must be positive, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("feature tensor contains non-finite values (NaN or Inf)")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def h(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]

    @property
    def c(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass(frozen=True)
class QuantizedTensor:
    """Integer-quantized tensor plus the (vmin, vmax) needed to invert it.

    Elements lie in [0, 2**bits - 1]; 8-bit elements are stored as uint8.
    ``vmin == vmax`` marks a constant source tensor and all elements are 0.
    """

    qdata: np.ndarray
    vmin: float
    vmax: float
    bits: int = 8

    def __post_init__(self):
        if not (1 <= self.bits <= 16):
            raise ValueError(f"bits must be in [1, 16], got {self.bits}")
        dtype = np.uint8 if self.bits <= 8 else np.uint16
        arr = np.ascontiguousarray(self.qdata, dtype=dtype)
        if arr.ndim != 3:
            raise ValueError(f"quantized tensor must be 3-D, got rank {arr.ndim}")
        levels = (1 << self.bits) - 1
        if arr.size and int(arr.max()) > levels:
            raise ValueError(f"quantized values exceed {levels}")
        if not (self.vmin <= self.vmax):
            raise ValueError(f"vmin must not exceed vmax, got ({self.vmin}, {self.vmax})")
        if self.vmin == self.vmax and arr.any():
            raise ValueError("degenerate range (vmin == vmax) requires all-zero elements")
        object.__setattr__(self, "qdata", _freeze(arr))

    @property
    def h(self) -> int:
        return self.qdata.shape[0]

    @property
    def w(self) -> int:
        return self.qdata.shape[1]

    @property
    def c(self) -> int:
        return self.qdata.shape[2]

    @property
    def levels(self) -> int:
        """Largest quantized value, 2**bits - 1."""
        return (1 << self.bits) - 1


def quantize(t: FeatureTensor, bits: int = 8) -> QuantizedTensor:
    """Min-max quantize a tensor to ``bits`` bits per element.

    q = round((x - vmin) / (vmax - vmin) * (2**bits - 1)), with ties rounding
    half away from zero. A constant tensor quantizes to all zeros.
    """
    if not (1 <= bits <= 16):
        raise ValueError(f"bits must be in [1, 16], got {bits}")
    vmin = float(t.data.min())
    vmax = float(t.data.max())
    levels = (1 << bits) - 1
    if vmax == vmin:
        q = np.zeros(t.shape, dtype=np.int64)
    else:
        # Dividing by the range first keeps the scale finite even when the
        # range is subnormal (levels / range would overflow to inf).
        scaled = (t.data - vmin) / (vmax - vmin) * levels
        # scaled >= 0, so floor(x + 0.5) rounds half away from zero.
        q = np.floor(scaled + 0.5).astype(np.int64)
        np.clip(q, 0, levels, out=q)
    return QuantizedTensor(qdata=q, vmin=vmin, vmax=vmax, bits=bits)


def dequantize(q: QuantizedTensor) -> FeatureTensor:
    """Invert :func:`quantize`: x = vmin + q / (2**bits - 1) * (vmax - vmin)."""
    x = q.vmin + q.qdata.astype(np.float64) / q.levels * (q.vmax - q.vmin)
    return FeatureTensor(x)


_SUPPORTED_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


def load_tensor(path) -> FeatureTensor:
    """Load a 3-D float32/float64 C-order NPY file as a FeatureTensor."""
    try:
        with open(path, "rb") as f:
            arr = np.lib.format.read_array(f, allow_pickle=False)
    except OSError as exc:
        raise TensorIOError(f"cannot read tensor file {path}: {exc}") from exc
    except Exception as exc:
        raise TensorIOError(f"truncated or invalid NPY file {path}: {exc}") from exc
    if arr.ndim != 3:
        raise TensorIOError(f"{path}: expected a 3-D array, got rank {arr.ndim}")
    if arr.dtype not in _SUPPORTED_DTYPES:
        raise TensorIOError(
            f"{path}: unsupported element type {arr.dtype} (expected float32 or float64)"
        )
    if arr.ndim > 1 and not arr.flags["C_CONTIGUOUS"]:
        raise TensorIOError(f"{path}: Fortran-order arrays are not supported")
    return FeatureTensor(arr)


def save_tensor(t: FeatureTensor, path, dtype=np.float64) -> None:
    """Write a tensor as an NPY v1.0 file that :func:`load_tensor` reads back.

    The default float64 element width round-trips the in-memory values
    bit-exactly; pass ``np.float32`` for compact interchange files.
    """
    dtype = np.dtype(dtype)
    if dtype not in _SUPPORTED_DTYPES:
        raise TensorIOError(f"unsupported element type {dtype} (expected float32 or float64)")
    arr = np.ascontiguousarray(t.data, dtype=dtype)
    with open(path, "wb") as f:
        np.lib.format.write_array(f, arr, version=(1, 0), allow_pickle=False)


@dataclass(frozen=True)
class ChannelRecipe:
    """How a derived synthetic channel was built: channel = scale*base + offset + noise."""

    channel: int
    base: int
    scale: float
    offset: float


def _smooth_field(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Bilinear upsampling of a coarse Gaussian grid; smooth by construction.

    The coarse grid has at most 5 points per axis regardless of output size,
    so the correlation length scales with the tensor: nearby rows stay
    strongly correlated, the way feature-map activations do.
    """
    gh = max(2, min(5, h))
    gw = max(2, min(5, w))
    g = rng.normal(size=(gh, gw))
    y = np.linspace(0.0, gh - 1.0, h)
    x = np.linspace(0.0, gw - 1.0, w)
    y0 = np.minimum(np.floor(y).astype(np.intp), gh - 2)
    x0 = np.minimum(np.floor(x).astype(np.intp), gw - 2)
    wy = (y - y0)[:, None]
    wx = (x - x0)[None, :]
    a = g[np.ix_(y0, x0)]
    b = g[np.ix_(y0, x0 + 1)]
    c = g[np.ix_(y0 + 1, x0)]
    d = g[np.ix_(y0 + 1, x0 + 1)]
    return (1 - wy) * (1 - wx) * a + (1 - wy) * wx * b + wy * (1 - wx) * c + wy * wx * d


def gen_synthetic(
    h: int,
    w: int,
    c: int,
    base_channels: int,
    noise_sigma: float,
    seed: int,
) -> tuple[FeatureTensor, list[ChannelRecipe]]:
    """Generate a tensor whose later channels are affine maps of earlier ones.

    Channels [0, base_channels) are independent smooth random fields. Every
    remaining channel j is scale*base + offset + N(0, noise_sigma^2), with
    scale drawn from [0.5, 2.0] and offset from [-1, 1]. The returned recipes
    record (channel, base, scale, offset) for each derived channel, giving
    tests an exact reconstruction oracle when noise_sigma is 0.

    Deterministic in ``seed``: base fields, then per-derived-channel draws in
    channel order (base index, scale, offset, noise field).
    """
    if h < 1 or w < 1 or c < 1:
        raise ValueError(f"tensor dimensions must be positive, got ({h}, {w}, {c})")
    if not (1 <= base_channels <= c):
        raise ValueError(f"base_channels must be in [1, {c}], got {base_channels}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be non-negative, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    data = np.empty((h, w, c), dtype=np.float64)
    for b in range(base_channels):
        data[:, :, b] = _smooth_field(rng, h, w)
    recipes: list[ChannelRecipe] = []
    for j in range(base_channels, c):
        base = int(rng.integers(0, base_channels))
        scale = float(rng.uniform(0.5, 2.0))
        offset = float(rng.uniform(-1.0, 1.0))
        noise = rng.normal(0.0, noise_sigma, size=(h, w))
        data[:, :, j] = scale * data[:, :, base] + offset + noise
        recipes.append(ChannelRecipe(channel=j, base=base, scale=scale, offset=offset))
    return FeatureTensor(data), recipes
