"""Packetization geometry, transmission ordering, and reassembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caltec import (
    ChannelTrace,
    FeatureTensor,
    LossMask,
    PacketGrid,
    dequantize,
    ge_convert,
    gen_trace,
    load_mask,
    packetize,
    quantize,
    reassemble,
    save_mask,
    vectorize_packet,
)


def make_stream(h=8, w=4, c=3, r=4, seed=0, order="channel-major"):
    rng = np.random.default_rng(seed)
    t = FeatureTensor(rng.normal(size=(h, w, c)))
    q = quantize(t)
    return q, packetize(q, r, order=order)


def trace_for(stream, received_flags):
    flags = np.asarray(received_flags, dtype=bool)
    assert flags.size == stream.n_total
    return ChannelTrace(received=flags, params=ge_convert(0.2, 2.0), seed=0)


class TestPacketGrid:
    def test_even_split(self):
        g = PacketGrid(h=56, w=56, r=8)
        assert g.n_packets == 7
        assert g.pad_rows == 0
        assert g.rows(0) == (0, 8)
        assert g.rows(6) == (48, 56)

    def test_even_split_narrow(self):
        g = PacketGrid(h=28, w=28, r=4)
        assert g.n_packets == 7
        assert g.pad_rows == 0

    def test_ragged_split_pads_last_packet(self):
        g = PacketGrid(h=30, w=5, r=4)
        assert g.n_packets == 8
        assert g.pad_rows == 2
        assert g.rows(7) == (28, 30)

    def test_single_packet_per_channel(self):
        g = PacketGrid(h=3, w=5, r=8)
        assert g.n_packets == 1
        assert g.pad_rows == 5
        assert g.rows(0) == (0, 3)

    def test_rows_rejects_out_of_range(self):
        g = PacketGrid(h=30, w=5, r=4)
        with pytest.raises(IndexError):
            g.rows(8)
        with pytest.raises(IndexError):
            g.rows(-1)

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            PacketGrid(h=0, w=5, r=4)
        with pytest.raises(ValueError):
            PacketGrid(h=5, w=5, r=0)


class TestPacketize:
    def test_channel_major_layout(self):
        q, stream = make_stream(h=4, w=2, c=3, r=2)
        assert stream.n_total == 6
        g = stream.grid
        for j in range(3):
            for i in range(g.n_packets):
                pos = stream.linear_index(i, j)
                assert pos == j * g.n_packets + i
                a, b = g.rows(i)
                np.testing.assert_array_equal(
                    stream.packets[pos], q.qdata[a:b, :, j]
                )

    def test_row_major_layout(self):
        q, stream = make_stream(h=4, w=2, c=3, r=2, order="row-major")
        g = stream.grid
        for j in range(3):
            for i in range(g.n_packets):
                pos = stream.linear_index(i, j)
                assert pos == i * 3 + j
                a, b = g.rows(i)
                np.testing.assert_array_equal(
                    stream.packets[pos], q.qdata[a:b, :, j]
                )

    def test_padding_rows_are_zero_codes(self):
        q, stream = make_stream(h=5, w=3, c=2, r=4)
        g = stream.grid
        assert g.pad_rows == 3
        last = stream.packets[stream.linear_index(g.n_packets - 1, 0)]
        np.testing.assert_array_equal(last[1:], 0)

    def test_unravel_inverts_linear_index(self):
        for order in ("channel-major", "row-major"):
            _, stream = make_stream(h=30, w=4, c=5, r=4, order=order)
            g = stream.grid
            seen = set()
            for j in range(stream.c):
                for i in range(g.n_packets):
                    pos = stream.linear_index(i, j)
                    assert 0 <= pos < stream.n_total
                    assert stream.unravel(pos) == (i, j)
                    seen.add(pos)
            assert len(seen) == stream.n_total

    def test_rejects_unknown_order(self):
        rng = np.random.default_rng(0)
        q = quantize(FeatureTensor(rng.normal(size=(4, 4, 2))))
        with pytest.raises(ValueError):
            packetize(q, 2, order="diagonal")


class TestVectorizePacket:
    def test_row_major_flattening(self):
        block = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(vectorize_packet(block), [1.0, 2.0, 3.0, 4.0])

    def test_rejects_non_matrix(self):
        with pytest.raises(ValueError):
            vectorize_packet(np.zeros(4))


class TestReassemble:
    def test_lossless_round_trip_is_dequantize(self):
        for order in ("channel-major", "row-major"):
            q, stream = make_stream(h=8, w=4, c=3, r=4, order=order)
            trace = trace_for(stream, np.ones(stream.n_total, dtype=bool))
            out, mask = reassemble(stream, trace)
            np.testing.assert_array_equal(out.data, dequantize(q).data)
            assert np.all(mask.received)
            assert mask.n_lost == 0

    def test_single_loss_zeroes_exactly_one_packet(self):
        q, stream = make_stream(h=8, w=4, c=3, r=4)
        g = stream.grid
        flags = np.ones(stream.n_total, dtype=bool)
        pos = stream.linear_index(1, 2)
        flags[pos] = False
        out, mask = reassemble(stream, trace_for(stream, flags))
        ref = dequantize(q).data
        a, b = g.rows(1)
        assert np.all(out.data[a:b, :, 2] == 0.0)
        expect = ref.copy()
        expect[a:b, :, 2] = 0.0
        np.testing.assert_array_equal(out.data, expect)
        assert mask.n_lost == 1
        assert mask.lost_packets() == [(1, 2)]

    def test_loss_fill_is_zero_not_dequantized_zero_code(self):
        # vmin is nonzero here, so dequantize(code 0) would be vmin != 0.
        rng = np.random.default_rng(4)
        t = FeatureTensor(rng.uniform(5.0, 9.0, size=(4, 3, 2)))
        q = quantize(t)
        assert q.vmin > 0
        stream = packetize(q, 2)
        flags = np.ones(stream.n_total, dtype=bool)
        flags[stream.linear_index(0, 0)] = False
        out, _ = reassemble(stream, trace_for(stream, flags))
        assert np.all(out.data[0:2, :, 0] == 0.0)

    def test_padding_never_leaks_into_output(self):
        q, stream = make_stream(h=30, w=4, c=3, r=4)
        trace = trace_for(stream, np.ones(stream.n_total, dtype=bool))
        out, _ = reassemble(stream, trace)
        assert out.shape == (30, 4, 3)
        np.testing.assert_array_equal(out.data, dequantize(q).data)

    def test_everything_lost_gives_zero_tensor(self):
        q, stream = make_stream(h=8, w=4, c=3, r=4)
        out, mask = reassemble(
            stream, trace_for(stream, np.zeros(stream.n_total, dtype=bool))
        )
        assert np.all(out.data == 0.0)
        assert mask.n_lost == stream.n_total

    def test_mask_agrees_with_trace_layout(self):
        for order in ("channel-major", "row-major"):
            _, stream = make_stream(h=8, w=4, c=3, r=4, order=order)
            rng = np.random.default_rng(12)
            flags = rng.random(stream.n_total) < 0.6
            _, mask = reassemble(stream, trace_for(stream, flags))
            for j in range(stream.c):
                for i in range(stream.grid.n_packets):
                    assert mask.received[j, i] == flags[stream.linear_index(i, j)]

    def test_rejects_trace_length_mismatch(self):
        _, stream = make_stream(h=8, w=4, c=3, r=4)
        p = ge_convert(0.2, 2.0)
        short = gen_trace(p, stream.n_total - 1, seed=0)
        with pytest.raises(ValueError, match="trace length"):
            reassemble(stream, short)

    @given(
        st.integers(min_value=1, max_value=12),
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=0, max_value=2**16),
    )
    @settings(max_examples=80, deadline=None)
    def test_received_regions_always_match_reference(self, h, w, c, r, seed):
        rng = np.random.default_rng(seed)
        t = FeatureTensor(rng.normal(size=(h, w, c)))
        q = quantize(t)
        stream = packetize(q, r)
        flags = rng.random(stream.n_total) < 0.5
        if not flags.any():
            flags[0] = True
        out, mask = reassemble(stream, trace_for(stream, flags))
        ref = dequantize(q).data
        for j in range(c):
            for i in range(stream.grid.n_packets):
                a, b = stream.grid.rows(i)
                if mask.received[j, i]:
                    np.testing.assert_array_equal(out.data[a:b, :, j], ref[a:b, :, j])
                else:
                    assert np.all(out.data[a:b, :, j] == 0.0)


class TestMaskIO:
    def test_round_trip(self, tmp_path):
        g = PacketGrid(h=8, w=4, r=4)
        rng = np.random.default_rng(3)
        received = rng.random((5, g.n_packets)) < 0.5
        mask = LossMask(received=received, grid=g)
        path = tmp_path / "mask.npy"
        save_mask(mask, path)
        back = load_mask(path, g)
        np.testing.assert_array_equal(back.received, mask.received)
        assert back.grid == g

    def test_stored_as_uint8(self, tmp_path):
        g = PacketGrid(h=4, w=4, r=2)
        mask = LossMask(received=np.ones((2, g.n_packets), dtype=bool), grid=g)
        path = tmp_path / "mask.npy"
        save_mask(mask, path)
        assert np.load(path).dtype == np.uint8

    def test_load_rejects_geometry_mismatch(self, tmp_path):
        g = PacketGrid(h=8, w=4, r=4)
        mask = LossMask(received=np.ones((5, g.n_packets), dtype=bool), grid=g)
        path = tmp_path / "mask.npy"
        save_mask(mask, path)
        other = PacketGrid(h=12, w=4, r=4)
        with pytest.raises(ValueError):
            load_mask(path, other)
