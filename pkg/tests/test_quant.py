import numpy as np
import pytest
from hypothesis import given, strategies as st

from eat.quant import (
    QuantizedBlock,
    dequantize_block,
    dequantize_tensor,
    qmax,
    quantize_block,
    quantize_tensor,
    round_half_away,
)

# slack for float rounding in c * v and codes / c; far below any half step
EPS = 1e-12


def test_hand_arithmetic_block():
    b = quantize_block([1, -2, 3, -4], 4)
    assert b.constant == 1.75
    assert b.values.tolist() == [2, -4, 5, -7]
    np.testing.assert_allclose(dequantize_block(b), [2 / 1.75, -4 / 1.75, 5 / 1.75, -4.0], rtol=0, atol=1e-15)
    assert dequantize_block(b)[3] == -4.0


def test_round_half_away():
    assert round_half_away(np.array([0.5, -0.5, 1.5, -2.5, 2.4])).tolist() == [1, -1, 2, -3, 2]


def test_all_zero_block():
    b = quantize_block([0.0, 0.0, -0.0], 4)
    assert b.constant == 1.0 and b.values.tolist() == [0, 0, 0]
    assert dequantize_block(b).tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("bits", [2, 4, 8])
def test_extremes_map_to_qmax(bits):
    b = quantize_block([-3.5, 3.5, 3.5], bits)
    assert b.values.tolist() == [-qmax(bits), qmax(bits), qmax(bits)]
    assert dequantize_block(b).tolist() == [-3.5, 3.5, 3.5]


def test_preconditions():
    for bits in (1, 9):
        with pytest.raises(ValueError):
            quantize_block([1.0], bits)
    with pytest.raises(ValueError):
        quantize_block([], 4)
    with pytest.raises(ValueError):
        quantize_block([1.0, float("nan")], 4)
    with pytest.raises(ValueError):
        quantize_tensor([1.0], 4, 0)
    with pytest.raises(ZeroDivisionError):
        dequantize_block(QuantizedBlock(0.0, np.array([1], dtype=np.int8), 4))


def test_chunking():
    qt = quantize_tensor(np.arange(10, dtype=float), 4, 4)
    assert [len(b) for b in qt.blocks] == [4, 4, 2]
    assert dequantize_tensor(qt).shape == (10,)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(finite, min_size=1, max_size=64), st.integers(2, 8))
def test_half_step_bound(values, bits):
    b = quantize_block(values, bits)
    assert np.all(np.abs(b.values) <= qmax(bits))
    err = np.abs(dequantize_block(b) - np.asarray(values))
    assert np.all(err <= 0.5 / b.constant * (1 + EPS) + EPS)


@given(st.lists(finite, min_size=1, max_size=64), st.integers(2, 8))
def test_absmax_exact(values, bits):
    v = np.asarray(values)
    out = dequantize_block(quantize_block(v, bits))
    i = int(np.argmax(np.abs(v)))
    assert out[i] == v[i]


@given(st.lists(finite, min_size=1, max_size=200), st.integers(1, 50), st.integers(2, 8))
def test_tensor_round_trip_bound(values, block_size, bits):
    v = np.asarray(values)
    qt = quantize_tensor(v, bits, block_size)
    out = dequantize_tensor(qt)
    assert out.shape == v.shape
    for blk, start in zip(qt.blocks, range(0, v.size, block_size)):
        seg = slice(start, start + len(blk))
        assert np.all(np.abs(out[seg] - v[seg]) <= 0.5 / blk.constant * (1 + EPS) + EPS)


def test_double_quant_gap_bounded():
    rng = np.random.default_rng(3)
    for _ in range(20):
        # whole blocks only: a tiny-absmax tail block would dwarf the other constants
        v = rng.normal(size=64 * rng.integers(1, 64)) * rng.uniform(0.5, 2.0)
        single = quantize_tensor(v, 4, 64)
        double = quantize_tensor(v, 4, 64, double_quant=True)
        c = single.constants()
        c_hat = double.constants()
        assert len(double.double_quantized_constants) == -(-len(c) // 256)
        # constants error is within their own half step
        for dq, start in zip(double.double_quantized_constants, range(0, c.size, 256)):
            seg = slice(start, start + len(dq))
            assert np.all(np.abs(c_hat[seg] - c[seg]) <= 0.5 / dq.constant + EPS)
        # propagate through codes / c: |q/c_hat - q/c| = |q| |c - c_hat| / (c c_hat)
        gap = np.abs(dequantize_tensor(double) - dequantize_tensor(single))
        codes = np.concatenate([b.values for b in single.blocks]).astype(float)
        per_elem_c = np.repeat(c, [len(b) for b in single.blocks])
        per_elem_hat = np.repeat(c_hat, [len(b) for b in single.blocks])
        bound = np.abs(codes) * np.abs(per_elem_c - per_elem_hat) / (per_elem_c * per_elem_hat)
        assert np.all(gap <= bound * (1 + 1e-9) + EPS)


def test_double_quant_rejects_zero_constant_codes():
    v = np.concatenate([np.full(4, 1e-6), np.full(4, 1e6)])
    with pytest.raises(ValueError):
        quantize_tensor(v, 4, 4, double_quant=True)


def test_empty_tensor():
    qt = quantize_tensor([], 4, 8)
    assert qt.blocks == () and dequantize_tensor(qt).size == 0
