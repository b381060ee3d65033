import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hitchsov import parabolic as pb
from hitchsov.errors import (IndeterminateDimension, NotIntegral,
                             TruncationInsufficient, ValidationError)


def partitions(n, cap=None):
    if cap is None:
        cap = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, cap), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


class TestPartitions:
    def test_dual_examples(self):
        assert pb.dual_partition((2, 2)) == (2, 2)
        assert pb.dual_partition((3, 1)) == (2, 1, 1)
        assert pb.dual_partition((1, 1, 1, 1)) == (4,)

    @pytest.mark.parametrize("r", range(1, 13))
    def test_dual_involution(self, r):
        for p in partitions(r):
            assert pb.dual_partition(pb.dual_partition(p)) == p
            assert sum(pb.dual_partition(p)) == r

    def test_levels(self):
        assert pb.levels((2, 2)) == (1, 1, 2, 2)
        assert pb.levels((3, 1)) == (1, 1, 2, 3)
        assert pb.levels((4,)) == (1, 2, 3, 4)

    @pytest.mark.parametrize("r", range(1, 9))
    def test_levels_weakly_increasing(self, r):
        for p in partitions(r):
            lv = pb.levels(p)
            assert all(a <= b for a, b in zip(lv, lv[1:]))
            assert lv[-1] == p[0]

    def test_invalid_partition(self):
        with pytest.raises(ValidationError):
            pb.dual_partition((1, 2))
        with pytest.raises(ValidationError):
            pb.dual_partition((2, 0))


class TestDims:
    # hand-computed Riemann-Roch values: (genus, rank, partitions, dims)
    CASES = [
        (2, 4, [(2, 2)], [2, 4, 6, 9]),
        (2, 4, [(1, 1, 1, 1)], [2, 4, 7, 10]),
        (2, 2, [(1, 1)], [2, 4]),
        (2, 2, [(2,)], [2, 3]),
        (2, 3, [(1, 1, 1)], [2, 4, 7]),
        (2, 3, [(2, 1)], [2, 4, 6]),
        (2, 3, [(3,)], [2, 3, 5]),
        (3, 2, [(1, 1)], [3, 7]),
        (3, 2, [(2,)], [3, 6]),
        (2, 2, [(1, 1), (1, 1)], [2, 5]),
    ]

    @pytest.mark.parametrize("genus,rank,parts,expect", CASES)
    def test_hand_cases(self, genus, rank, parts, expect):
        ptype = pb.ParabolicType(genus, rank,
                                 [pb.MarkedPoint(p) for p in parts])
        dims, total = pb.parabolic_base_dims(ptype)
        assert dims == expect
        assert total == sum(expect)

    def test_indeterminate_range(self):
        # genus 1, single-block marking: d_2 = 0 lands in [0, 2g-2]
        bad = pb.ParabolicType(1, 2, [pb.MarkedPoint((2,))])
        with pytest.raises(IndeterminateDimension):
            pb.parabolic_base_dims(bad)


class TestDeltaP:
    def test_full_flag_gives_one(self):
        for r in (2, 3, 4, 6):
            ptype = pb.ParabolicType(2, r, [pb.MarkedPoint((1,) * r)])
            assert pb.delta_p(ptype) == 1

    def test_two_two(self):
        ptype = pb.ParabolicType(2, 4, [pb.MarkedPoint((2, 2))])
        assert pb.delta_p(ptype) == 2

    @pytest.mark.parametrize("r", range(2, 7))
    def test_divides_counts(self, r):
        for p in partitions(r):
            ptype = pb.ParabolicType(2, r, [pb.MarkedPoint(p)])
            d = pb.delta_p(ptype)
            mu = pb.dual_partition(p)
            for i in range(1, r + 1):
                cnt = sum(1 for m in mu if m == i)
                if cnt:
                    assert cnt % d == 0

    def test_full_flag_anywhere_gives_one(self):
        ptype = pb.ParabolicType(2, 4, [pb.MarkedPoint((2, 2)),
                                        pb.MarkedPoint((1, 1, 1, 1))])
        assert pb.delta_p(ptype) == 1


class TestParabolicDegree:
    def test_zero_weights(self):
        ptype = pb.ParabolicType(2, 2, [pb.MarkedPoint((1, 1), (0, 0))])
        assert pb.parabolic_degree(3, ptype) == 3

    def test_direct_sum(self):
        from fractions import Fraction
        ptype = pb.ParabolicType(
            2, 2, [pb.MarkedPoint((1, 1), (0, Fraction(1, 2)))])
        assert pb.parabolic_degree(0, ptype) == Fraction(1, 2)

    def test_mehta_seshadri_zero(self):
        from fractions import Fraction
        ptype = pb.ParabolicType(
            2, 2, [pb.MarkedPoint((1, 1), (Fraction(1, 4),
                                           Fraction(3, 4)))])
        assert pb.parabolic_degree(-1, ptype) == 0


class TestNewtonEisenstein:
    def test_reference_ord_pattern(self):
        # ord(a1..a4) = (1,1,2,2) -> two Eisenstein factors of degree 2
        f = pb.LocalCharPoly.from_lists(
            [[0, 1], [0, 3], [0, 0, 1], [0, 0, 2]])
        rep = pb.newton_eisenstein_check(f, expected_mu=(2, 2))
        assert rep["orders"] == [1, 1, 2, 2]
        assert rep["factor_degrees"] == (2, 2)
        assert rep["matches_expected"]
        assert rep["distinguished"]

    def test_classical_eisenstein(self):
        for r in (2, 3, 5):
            coeffs = [[0]] * (r - 1) + [[0, 1]]
            f = pb.LocalCharPoly.from_lists(coeffs)
            rep = pb.newton_eisenstein_check(f)
            assert rep["factor_degrees"] == (r,)
            assert rep["distinguished"]

    def test_square_not_distinguished(self):
        # (lambda^2 + t)^2: repeated residual root
        f = pb.LocalCharPoly.from_lists([[0], [0, 2], [0], [0, 0, 1]])
        rep = pb.newton_eisenstein_check(f)
        assert rep["factor_degrees"] == (2, 2)
        assert not rep["distinguished"]

    def test_unit_factor_rejected(self):
        f = pb.LocalCharPoly.from_lists([[1], [0, 1]])
        with pytest.raises(NotIntegral):
            pb.newton_eisenstein_check(f)

    def test_truncation_insufficient(self):
        f = pb.LocalCharPoly.from_lists([[0, 1], [0]], trunc=4)
        with pytest.raises(TruncationInsufficient):
            pb.newton_eisenstein_check(f)

    def test_generate_and_verify(self):
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 100:
            k = int(rng.integers(1, 4))
            mu = sorted(rng.integers(1, 4, size=k).tolist(), reverse=True)
            if sum(mu) > 6:
                continue
            f = pb.synthesize_eisenstein(mu, rng, trunc=12)
            rep = pb.newton_eisenstein_check(f, expected_mu=mu)
            assert rep["matches_expected"], (mu, rep["factor_degrees"])
            checked += 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=6))
def test_dual_involution_property(parts):
    p = tuple(sorted(parts, reverse=True))
    assert pb.dual_partition(pb.dual_partition(p)) == p
