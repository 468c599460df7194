import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bicmlab.constellation import (
    Constellation,
    Labeling,
    brgc,
    build_psk,
    build_qam,
    by_name,
    gray_labeling,
    load_constellation,
    save_constellation,
    subset,
)

from oracles import hamming

PSK_ORDERS = [2, 4, 8, 16, 32, 64]
QAM_ORDERS = [4, 16, 64, 256]


def _all_builtins():
    return [build_psk(M) for M in PSK_ORDERS] + [build_qam(M) for M in QAM_ORDERS]


class TestPSK:
    def test_bpsk_points(self):
        np.testing.assert_allclose(build_psk(2).points, [1, -1], atol=1e-15)

    def test_qpsk_quarters(self):
        np.testing.assert_allclose(build_psk(4).points, [1, 1j, -1, -1j], atol=1e-15)

    def test_psk8_spacing(self):
        p = build_psk(8).points
        np.testing.assert_allclose(np.abs(p), 1.0, atol=1e-15)
        steps = np.angle(np.roll(p, -1) / p)
        np.testing.assert_allclose(steps, np.pi / 4, atol=1e-12)

    @pytest.mark.parametrize("M", [0, 1, 3, 6, 12, 2.5])
    def test_rejects_non_power_of_two(self, M):
        with pytest.raises(ValueError):
            build_psk(M)


class TestQAM:
    def test_qpsk_scaling(self):
        p = build_qam(4).points
        np.testing.assert_allclose(np.sort_complex(p), np.sort_complex(np.array([-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j]) / np.sqrt(2)))

    def test_qam16_scale(self):
        p = build_qam(16).points
        np.testing.assert_allclose(np.unique(np.round(p.real * np.sqrt(10), 12)), [-3, -1, 1, 3])

    @pytest.mark.parametrize("M", [8, 32, 128, 12])
    def test_rejects_non_square(self, M):
        with pytest.raises(ValueError):
            build_qam(M)


class TestInvariants:
    @pytest.mark.parametrize("c", _all_builtins(), ids=lambda c: c.name)
    def test_unit_energy(self, c):
        assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) < 1e-12

    @pytest.mark.parametrize("c", _all_builtins(), ids=lambda c: c.name)
    def test_distinct_points(self, c):
        assert len(np.unique(np.round(c.points, 12))) == c.M

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Constellation(np.array([2.0, -2.0]), name="loud")

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            Constellation(np.array([1.0, 1.0, -1.0, -1.0]), name="dup")

    @pytest.mark.parametrize("c", _all_builtins(), ids=lambda c: c.name)
    def test_partition_every_position(self, c):
        l = gray_labeling(c)
        for j in range(1, c.m + 1):
            s0, s1 = subset(c, l, j, 0), subset(c, l, j, 1)
            assert len(s0) == len(s1) == c.M // 2
            assert sorted(np.concatenate([s0, s1]).tolist()) == list(range(c.M))


class TestBRGC:
    def test_m1_identity(self):
        np.testing.assert_array_equal(brgc(1).labels, [0, 1])

    def test_psk8_ring_labels(self):
        l = brgc(3)
        assert [l.bitstring(k) for k in range(8)] == ["000", "001", "011", "010", "110", "111", "101", "100"]

    @pytest.mark.parametrize("m", range(1, 7))
    def test_ring_neighbors_differ_in_one_bit(self, m):
        labels = brgc(m).labels
        M = 1 << m
        assert all(hamming(labels[k], labels[(k + 1) % M]) == 1 for k in range(M) if M > 2 or k == 0)

    @pytest.mark.parametrize("m", [2, 4, 6])
    def test_grid_neighbors_differ_in_one_bit(self, m):
        c = build_qam(1 << m)
        l = gray_labeling(c)
        L = 1 << (m // 2)
        for i, q in itertools.product(range(L), range(L)):
            k = i * L + q
            if i + 1 < L:
                assert hamming(l.labels[k], l.labels[k + L]) == 1
            if q + 1 < L:
                assert hamming(l.labels[k], l.labels[k + 1]) == 1

    @pytest.mark.parametrize("m", range(1, 7))
    def test_gray_neighbors_are_nearest_points(self, m):
        # geometric check: every nearest-neighbour pair differs in one bit
        for c in (build_psk(1 << m),) + ((build_qam(1 << m),) if m % 2 == 0 else ()):
            l = gray_labeling(c)
            d = np.abs(c.points[:, None] - c.points[None, :])
            np.fill_diagonal(d, np.inf)
            dmin = d.min()
            for a, b in zip(*np.nonzero(np.isclose(d, dmin))):
                assert hamming(l.labels[a], l.labels[b]) == 1

    def test_rejects_m0(self):
        with pytest.raises(ValueError):
            brgc(0)


class TestSubset:
    def test_bpsk(self, bpsk):
        c, l = bpsk
        (idx,) = subset(c, l, 1, 0)
        assert c.points[idx] == 1

    @pytest.mark.parametrize("j", [0, 5, -1])
    def test_out_of_range(self, qam16, j):
        c, l = qam16
        with pytest.raises(ValueError):
            subset(c, l, j, 0)

    def test_bad_bit(self, qam16):
        with pytest.raises(ValueError):
            subset(*qam16, 1, 2)


class TestLabeling:
    @given(st.integers(1, 6).flatmap(lambda m: st.permutations(list(range(1 << m)))))
    def test_bits_roundtrip(self, perm):
        l = Labeling(perm)
        recon = (l.bits.astype(int) << np.arange(l.m - 1, -1, -1)).sum(axis=1)
        np.testing.assert_array_equal(recon, perm)
        np.testing.assert_array_equal(l.point_of_label[l.labels], np.arange(len(perm)))

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Labeling([0, 0, 1, 2])


class TestByName:
    @pytest.mark.parametrize("name,M", [("bpsk", 2), ("qpsk", 4), ("psk8", 8), ("qam16", 16), ("QAM64", 64)])
    def test_known(self, name, M):
        c, l = by_name(name)
        assert c.M == M and l.m == c.m

    @pytest.mark.parametrize("name", ["qam17", "apsk16", "", "psk"])
    def test_unknown(self, name):
        with pytest.raises(ValueError):
            by_name(name)


class TestFileFormat:
    def test_roundtrip(self, tmp_path, psk8):
        c, l = psk8
        path = tmp_path / "psk8.txt"
        save_constellation(path, c, l)
        c2, l2, scale = load_constellation(path)
        np.testing.assert_allclose(c2.points, c.points, atol=1e-15)
        np.testing.assert_array_equal(l2.labels, l.labels)
        assert scale == pytest.approx(1.0)

    def test_renormalizes_and_reports_scale(self, tmp_path):
        path = tmp_path / "bpsk.txt"
        path.write_text("# raw amplitude 3\n0 3 0\n1 -3 0\n")
        c, l, scale = load_constellation(path)
        np.testing.assert_allclose(c.points, [1, -1])
        assert scale == pytest.approx(1 / 3)

    @pytest.mark.parametrize(
        "body,line",
        [("0 1 0\n1 -1\n", 2), ("0 1 0\n10 -1 0\n", 2), ("0 1 0\nx -1 0\n", 2), ("00 1 0\n01 x 0\n", 2)],
    )
    def test_errors_name_the_line(self, tmp_path, body, line):
        path = tmp_path / "bad.txt"
        path.write_text(body)
        with pytest.raises(ValueError, match=f":{line}:"):
            load_constellation(path)
