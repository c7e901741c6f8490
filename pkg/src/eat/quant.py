"""Block-wise k-bit absmax quantization with optional double quantization.

Codes live in the symmetric range ``[-(2**(k-1) - 1), 2**(k-1) - 1]``; the block
constant is ``c = (2**(k-1) - 1) / absmax``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

CONSTANT_BITS = 8
CONSTANT_BLOCK_SIZE = 256


def qmax(bits: int) -> int:
    return 2 ** (bits - 1) - 1


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass(frozen=True)
class QuantizedBlock:
    constant: float
    values: np.ndarray
    bits: int
    absmax: Optional[float] = None

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class QuantizedTensor:
    blocks: tuple[QuantizedBlock, ...]
    block_size: int
    original_length: int
    double_quantized_constants: Optional[tuple[QuantizedBlock, ...]] = None

    def constants(self) -> np.ndarray:
        """Per-block constants as seen by dequantization."""
        if self.double_quantized_constants is None:
            return np.array([b.constant for b in self.blocks], dtype=np.float64)
        return np.concatenate([dequantize_block(b) for b in self.double_quantized_constants])


def _check_bits(bits):
    if not 2 <= bits <= 8:
        raise ValueError(f"bits must be in 2..8, got {bits}")


def quantize_block(values, bits: int) -> QuantizedBlock:
    _check_bits(bits)
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("cannot quantize an empty block")
    if not np.all(np.isfinite(v)):
        raise ValueError("block contains non-finite values")
    q = qmax(bits)
    absmax = float(np.max(np.abs(v)))
    if absmax == 0.0:
        return QuantizedBlock(1.0, np.zeros(v.size, dtype=np.int8), bits, 0.0)
    c = q / absmax
    codes = np.clip(round_half_away(c * v), -q, q).astype(np.int8)
    return QuantizedBlock(c, codes, bits, absmax)


def dequantize_block(block: QuantizedBlock, constant: Optional[float] = None) -> np.ndarray:
    """codes / constant.

    When the block's own absmax is known and no replacement constant is given,
    the equivalent ``codes / qmax * absmax`` is used so that ±absmax reconstructs
    bit-exactly.
    """
    codes = np.asarray(block.values, dtype=np.float64)
    if constant is None and block.absmax is not None:
        if block.absmax == 0.0:
            return np.zeros_like(codes)
        return codes / qmax(block.bits) * block.absmax
    c = block.constant if constant is None else constant
    if c == 0:
        raise ZeroDivisionError("quantization constant is zero")
    return codes / c


def _chunks(v: np.ndarray, size: int):
    return [v[i:i + size] for i in range(0, v.size, size)]


def quantize_tensor(values, bits: int, block_size: int, double_quant: bool = False) -> QuantizedTensor:
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    v = np.asarray(values, dtype=np.float64).ravel()
    blocks = tuple(quantize_block(chunk, bits) for chunk in _chunks(v, block_size))
    dq = None
    if double_quant and blocks:
        constants = np.array([b.constant for b in blocks])
        dq = tuple(quantize_block(chunk, CONSTANT_BITS) for chunk in _chunks(constants, CONSTANT_BLOCK_SIZE))
        if any(np.any(b.values == 0) for b in dq):
            raise ValueError("block constants span too wide a range for 8-bit double quantization")
    return QuantizedTensor(blocks, block_size, int(v.size), dq)


def dequantize_tensor(qt: QuantizedTensor) -> np.ndarray:
    if not qt.blocks:
        return np.zeros(0)
    if qt.double_quantized_constants is None:
        parts = [dequantize_block(b) for b in qt.blocks]
    else:
        constants = qt.constants()
        parts = [dequantize_block(b, c) for b, c in zip(qt.blocks, constants)]
    out = np.concatenate(parts)
    assert out.size == qt.original_length
    return out
