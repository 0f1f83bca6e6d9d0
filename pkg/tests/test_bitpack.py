import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramlin import DimensionError, FormatError
from gramlin.bitpack import pack_ints, packed_size, unpack_ints, width_for


@pytest.mark.parametrize(
    "value,width",
    [(0, 1), (1, 1), (2, 2), (3, 2), (4, 3), (255, 8), (256, 9), (2**40, 41)],
)
def test_width_for(value, width):
    assert width_for(value) == width


def test_packed_size():
    assert packed_size(0, 7) == 0
    assert packed_size(8, 1) == 1
    assert packed_size(9, 1) == 2
    assert packed_size(3, 10) == 4  # 30 bits -> 4 bytes


@settings(max_examples=80, deadline=None)
@given(
    values=st.lists(st.integers(0, 2**48 - 1), max_size=300),
    extra_width=st.integers(0, 5),
)
def test_round_trip_property(values, extra_width):
    arr = np.array(values, dtype=np.int64)
    width = min(63, width_for(int(arr.max(initial=0))) + extra_width)
    data = pack_ints(arr, width)
    assert len(data) == packed_size(len(arr), width)
    assert np.array_equal(unpack_ints(data, len(arr), width), arr)


def test_round_trip_spans_chunk_boundary():
    rng = np.random.default_rng(41)
    n = (1 << 17) + 1000  # crosses the internal chunk size
    arr = rng.integers(0, 2**11, size=n)
    data = pack_ints(arr, 11)
    assert np.array_equal(unpack_ints(data, n, 11), arr)


def test_value_overflow_rejected():
    with pytest.raises(DimensionError):
        pack_ints(np.array([8]), width=3)
    with pytest.raises(DimensionError):
        pack_ints(np.array([1]), width=0)
    with pytest.raises(DimensionError):
        pack_ints(np.array([1]), width=64)


def test_truncated_payload_rejected():
    data = pack_ints(np.arange(100), width=7)
    with pytest.raises(FormatError):
        unpack_ints(data[:-1], 100, 7)


def test_width_for_rejects_negative():
    with pytest.raises(DimensionError):
        width_for(-1)
