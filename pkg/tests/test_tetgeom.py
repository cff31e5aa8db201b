"""Unit and property tests for the single-tetrahedron angle kernels."""

import math
import random

import pytest

from crflow.errors import NumericError
from crflow.tetgeom import (
    HALF_UPPER_LENGTH,
    UPPER_LENGTH,
    TetLengths31,
    TetLengths40,
    TetXCoords,
    clamp_plus,
    corner_bound,
    equilateral_forward,
    equilateral_inverse,
    equilateral_inverse_lengths,
    extended_angles,
    is_real,
    longest_edge_angle_exceeds,
    phi31_hyper,
    phi31_hyper_x,
    phi31_ideal,
    phi40,
    phi_partials,
    small_edge_angle_bound,
    tau_profile,
)

ACOSH2 = math.acosh(2.0)


def rand31(rng, ideal_span=(-1.0, 1.2), hyper_span=(0.05, 2.0)):
    return TetLengths31(
        rng.uniform(*ideal_span), rng.uniform(*ideal_span), rng.uniform(*ideal_span),
        rng.uniform(*hyper_span), rng.uniform(*hyper_span), rng.uniform(*hyper_span),
    )


def rand40(rng, span=(0.05, 2.0)):
    return TetLengths40(*(rng.uniform(*span) for _ in range(6)))


def constrained31(x2, x4, x6):
    """Unit-equilateral tetrahedron from its ideal x-coordinates."""
    x1, x3, x5 = equilateral_forward(x2, x4, x6)
    return TetXCoords(x1, x2, x3, x4, x5, x6).lengths()


def rand_constrained(rng, lo=0.55, hi=3.0):
    while True:
        x2, x4, x6 = (rng.uniform(lo, hi) for _ in range(3))
        x1, x3, x5 = equilateral_forward(x2, x4, x6)
        if min(x1, x3, x5) >= 1.0:
            return constrained31(x2, x4, x6)


class TestClamp:
    def test_31_clamps_hyper_only(self):
        l = TetLengths31(-1.0, 2.0, 0.5, -0.3, 1.0, 2.0)
        assert clamp_plus(l).as_tuple() == (-1.0, 2.0, 0.5, 0.0, 1.0, 2.0)

    def test_40_clamps_everything(self):
        l = TetLengths40(*([-0.7] * 6))
        assert clamp_plus(l).as_tuple() == (0.0,) * 6

    def test_idempotent(self):
        l = TetLengths31(0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
        assert clamp_plus(l) == l


class TestPhi31Hyper:
    def test_zero_length_edge_gives_one(self):
        l = TetLengths31(0.3, -0.2, 0.1, 0.0, 0.7, 0.9)
        assert phi31_hyper(l, (2, 3)) == pytest.approx(1.0, abs=1e-14)

    def test_symmetric_constrained_value(self):
        # x-odd all 2 forces x-even all sqrt(3/2) and phi = 1/sqrt(2)
        tet = constrained31(*(math.sqrt(1.5),) * 3)
        for pair in ((2, 3), (2, 4), (3, 4)):
            assert phi31_hyper(tet, pair) == pytest.approx(1 / math.sqrt(2), abs=1e-13)

    def test_refined_corner_maximum(self):
        corners = [
            (2, 8 / 5, 2, 8 / 5, 2, 4 / 5),
            (2, 8 / 5, 2, 8 / 5, 1, 4 / 5),
            (2, 8 / 5, 2, 4 / 5, 2, 4 / 5),
            (2, 8 / 5, 2, 4 / 5, 1, 4 / 5),
        ]
        top = max(phi31_hyper_x(*c) for c in corners)
        assert top == pytest.approx(7 * math.sqrt(2) / 12, abs=1e-12)

    def test_x_form_matches_length_form(self):
        rng = random.Random(11)
        for _ in range(200):
            l = rand31(rng)
            x = TetXCoords.from_lengths(l)
            assert phi31_hyper(l, (2, 3)) == pytest.approx(
                phi31_hyper_x(*x.as_tuple()), abs=1e-12)

    def test_pair_symmetry(self):
        rng = random.Random(12)
        for _ in range(100):
            l = rand31(rng)
            assert phi31_hyper(l, (2, 4)) == phi31_hyper(l, (4, 2))

    def test_overflow_raises(self):
        l = TetLengths31(400.0, 400.0, 400.0, 500.0, 500.0, 500.0)
        with pytest.raises(NumericError):
            phi31_hyper(l, (2, 3))


class TestPhi31Ideal:
    def test_equilateral_angle_law(self):
        rng = random.Random(13)
        for _ in range(300):
            tet = rand_constrained(rng)
            for i in (2, 3, 4):
                assert phi31_ideal(tet, (1, i)) == pytest.approx(0.5, abs=1e-12)

    def test_fully_symmetric_point(self):
        l = TetLengths31(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        for i in (2, 3, 4):
            assert phi31_ideal(l, (1, i)) == pytest.approx(0.5, abs=1e-15)

    def test_perturbation_breaks_the_law(self):
        tet = rand_constrained(random.Random(14))
        bumped = TetLengths31(tet.l12 + 1.0, tet.l13, tet.l14,
                              tet.l23, tet.l24, tet.l34)
        assert abs(phi31_ideal(bumped, (1, 2)) - 0.5) > 1e-3

    def test_angle_sum_is_pi_for_real_tets(self):
        # the three ideal-edge angles are the angles of the horospherical
        # triangle, so they sum to pi whenever the tetrahedron is real
        rng = random.Random(15)
        found = 0
        while found < 50:
            l = rand31(rng, ideal_span=(-0.4, 0.6), hyper_span=(0.2, 1.2))
            if not is_real(l):
                continue
            found += 1
            angles = extended_angles(l)
            total = sum(angles.alpha((1, i)) for i in (2, 3, 4))
            assert total == pytest.approx(math.pi, abs=1e-10)


def tet40_from_x(x1, x2, x3, x4, x5, x6):
    """4-0 lengths from display coordinates: the measured edge carries x1,
    its opposite edge x4, the adjacent faces read (x1, x2, x6), (x1, x3, x5)."""
    ac = math.acosh
    return TetLengths40(l12=ac(x1), l13=ac(x2), l14=ac(x3),
                        l23=ac(x6), l24=ac(x5), l34=ac(x4))


class TestPhi40:
    def test_display_form(self):
        # specialized quotient with the opposite-edge slot pinned to 2
        rng = random.Random(16)
        for _ in range(100):
            x1, x2, x3, x5, x6 = (rng.uniform(1.0, 3.0) for _ in range(5))
            num = x2 * x3 + x5 * x6 + x1 * x2 * x5 + x1 * x3 * x6 - 2 * x1 ** 2 + 2
            den = math.sqrt((2 * x1 * x2 * x6 + x1 ** 2 + x2 ** 2 + x6 ** 2 - 1)
                            * (2 * x1 * x3 * x5 + x1 ** 2 + x3 ** 2 + x5 ** 2 - 1))
            tet = tet40_from_x(x1, x2, x3, 2.0, x5, x6)
            assert phi40(tet, (1, 2)) == pytest.approx(num / den, abs=1e-12)

    def test_corner_scan_max_is_7_9(self):
        corners = [(2, 2, 2, 1, 2, 2), (2, 2, 1, 1, 2, 1), (2, 2, 2, 1, 2, 1)]
        vals = [phi40(tet40_from_x(*c), (1, 2)) for c in corners]
        assert max(vals) == pytest.approx(7 / 9, abs=1e-12)

    def test_regular_tetrahedron(self):
        tet = TetLengths40(*(ACOSH2,) * 6)
        for pair in ((1, 2), (1, 3), (2, 4), (3, 4)):
            assert phi40(tet, pair) == pytest.approx(2 / 3, abs=1e-14)

    def test_zero_length_gives_one(self):
        rng = random.Random(17)
        for _ in range(30):
            l = list(rand40(rng).as_tuple())
            l[2] = 0.0  # l14
            assert phi40(TetLengths40(*l), (1, 4)) == pytest.approx(1.0, abs=1e-13)

    def test_pair_symmetry(self):
        rng = random.Random(18)
        for _ in range(50):
            l = rand40(rng)
            assert phi40(l, (2, 4)) == phi40(l, (4, 2))


class TestExtendedAngles:
    def test_zero_hyper_edge_angle_zero(self):
        l = TetLengths31(0.1, 0.1, 0.1, 0.0, 0.4, 0.5)
        assert extended_angles(l).alpha((2, 3)) == pytest.approx(0.0, abs=1e-7)

    def test_cosine_below_minus_one_clamps_to_pi(self):
        # widely separated truncation triangles with a huge opposite
        # decoration push the raw cosine far below -1
        l = TetLengths31(math.log(0.01), math.log(0.01), math.log(100.0),
                         math.acosh(5.0), 0.0, 0.0)
        angles = extended_angles(l)
        assert angles.phi((2, 3)) < -1.0
        assert angles.alpha((2, 3)) == pytest.approx(math.pi)

    def test_clamps_negative_inputs_internally(self):
        l = TetLengths31(0.2, 0.1, -0.1, -0.5, 0.6, 0.7)
        assert extended_angles(l).alphas == extended_angles(clamp_plus(l)).alphas

    def test_angles_in_range(self):
        rng = random.Random(19)
        for _ in range(100):
            for a in extended_angles(rand31(rng)).alphas:
                assert 0.0 <= a <= math.pi


class TestRealness:
    def test_constrained_box_is_real(self):
        rng = random.Random(20)
        for _ in range(300):
            lengths = [rng.uniform(1e-3, ACOSH2) for _ in range(3)]
            l12, l13, l14 = equilateral_inverse_lengths(*lengths)
            tet = TetLengths31(l12, l13, l14, *lengths)
            assert is_real(tet)
            assert all(abs(p) < 1.0 for p in extended_angles(tet).phis)

    def test_zero_edge_is_degenerate(self):
        tet = constrained31(*(math.sqrt(1.5),) * 3)
        flat = TetLengths31(tet.l12, tet.l13, tet.l14, 0.0, tet.l24, tet.l34)
        assert not is_real(flat)

    def test_40_box_is_real_and_acute(self):
        rng = random.Random(21)
        for _ in range(300):
            tet = TetLengths40(*(rng.uniform(1e-3, ACOSH2 - 1e-9) for _ in range(6)))
            angles = extended_angles(tet)
            assert all(0.0 < p < 1.0 for p in angles.phis)
            assert is_real(tet)


class TestEquilateralMaps:
    def test_forward_fixed_point(self):
        assert equilateral_forward(1, 1, 1) == pytest.approx((1, 1, 1))

    def test_forward_symmetric(self):
        a = math.sqrt(1.5)
        assert equilateral_forward(a, a, a) == pytest.approx((2, 2, 2), abs=1e-14)

    def test_forward_arithmetic(self):
        x2, x4, x6 = 0.6, 0.9, 1.2
        g = lambda m, n: 2 * m * n - 0.5 * (m / n + n / m)
        assert equilateral_forward(x2, x4, x6) == pytest.approx(
            (g(x2, x4), g(x4, x6), g(x2, x6)))

    def test_inverse_fixed_point(self):
        assert equilateral_inverse(1, 1, 1) == pytest.approx((1, 1, 1), abs=1e-12)

    def test_inverse_symmetric(self):
        a = math.sqrt(1.5)
        assert equilateral_inverse(2, 2, 2) == pytest.approx((a, a, a), abs=1e-12)

    def test_roundtrip_and_bounds(self):
        rng = random.Random(22)
        for _ in range(500):
            target = tuple(rng.uniform(1.0, 10.0) for _ in range(3))
            sol = equilateral_inverse(*target)
            back = equilateral_forward(*sol)
            assert max(abs(a - b) for a, b in zip(back, target)) < 1e-9
            A = max(target)
            lo = (2 * (A + 1) + math.sqrt(2 * (A + 1))) / (4 * A + 2)
            hi = (A + math.sqrt(A * A + 3)) / 3
            assert lo - 1e-9 <= min(sol) and max(sol) <= hi + 1e-9
            assert min(sol) > 0.5

    def test_against_plain_bisection_oracle(self):
        # oracle: scalar bisection only, written out independently
        def oracle(x1, x3, x5):
            A = max(x1, x3, x5)

            def other(k, a):
                return a * (k + math.sqrt(k * k + 4 * a * a - 1)) / (4 * a * a - 1)

            def f(a):
                m, n = other(x1, a), other(x5, a)
                return 2 * m * n - 0.5 * (m / n + n / m) - x3

            lo, hi = 0.5 + 1e-12, A * (1 + 1e-12) + 1e-12
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if f(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            a = 0.5 * (lo + hi)
            return (a, other(x1, a), other(x5, a))

        rng = random.Random(23)
        for _ in range(100):
            target = tuple(rng.uniform(1.0, 10.0) for _ in range(3))
            got = equilateral_inverse(*target)
            want = oracle(*target)
            assert max(abs(a - b) for a, b in zip(got, want)) < 1e-9

    def test_inverse_lengths_symmetric_value(self):
        vals = equilateral_inverse_lengths(ACOSH2, ACOSH2, ACOSH2)
        assert vals == pytest.approx((math.log(math.sqrt(1.5)),) * 3, abs=1e-12)

    def test_inverse_rejects_bad_input(self):
        with pytest.raises(ValueError):
            equilateral_inverse(0.5, 1.0, 1.0)


class TestPhiPartials:
    @staticmethod
    def fd(f, x, i, h=1e-6):
        up = list(x)
        dn = list(x)
        up[i] += h
        dn[i] -= h
        return (f(*up) - f(*dn)) / (2 * h)

    def test_matches_finite_differences(self):
        rng = random.Random(24)
        for _ in range(100):
            x = [rng.uniform(1.05, 3.0)] + [rng.uniform(0.3, 3.0) for _ in range(5)]
            p = phi_partials(*x)
            for slot, val in zip((1, 2, 3, 4), (p.d2, p.d3, p.d4, p.d5)):
                ref = self.fd(phi31_hyper_x, x, slot)
                assert val == pytest.approx(ref, rel=1e-5, abs=1e-9)

    def test_d6_negative(self):
        rng = random.Random(25)
        for _ in range(200):
            x = [rng.uniform(1.0 + 1e-6, 3.0)] + [rng.uniform(0.3, 3.0) for _ in range(5)]
            assert self.fd(phi31_hyper_x, x, 5) < 0.0

    def test_swap_symmetry(self):
        rng = random.Random(26)
        for _ in range(200):
            x1, x2, x3, x4, x5, x6 = (rng.uniform(0.3, 3.0) for _ in range(6))
            assert phi31_hyper_x(x1, x2, x3, x4, x5, x6) == pytest.approx(
                phi31_hyper_x(x1, x4, x5, x2, x3, x6), abs=1e-13)

    def test_sign_disjunction(self):
        rng = random.Random(27)
        for _ in range(2000):
            x = [rng.uniform(1.0 + 1e-9, 4.0)] + [rng.uniform(0.05, 4.0) for _ in range(5)]
            p = phi_partials(*x)
            assert (p.d2 > 0 and p.d3 > 0) or (p.d4 > 0 and p.d5 > 0)

    def test_paired_monotone_persistence(self):
        # a nonnegative slope in slot i stays nonnegative when i and its
        # partner slot both increase
        rng = random.Random(28)
        for _ in range(300):
            x = [rng.uniform(1.05, 3.0)] + [rng.uniform(0.3, 3.0) for _ in range(5)]
            p = phi_partials(*x)
            t, s = rng.uniform(0, 2), rng.uniform(0, 2)
            if p.d2 >= 0:
                y = list(x)
                y[1] += t
                y[2] += s
                assert phi_partials(*y).d2 >= -1e-15
            if p.d4 >= 0:
                y = list(x)
                y[3] += t
                y[4] += s
                assert phi_partials(*y).d4 >= -1e-15

    def test_degenerate_slab(self):
        p = phi_partials(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        assert p.degenerate and (p.d2, p.d3, p.d4, p.d5) == (0, 0, 0, 0)


class TestCornerBound:
    def test_h_values_at_k2(self):
        k = 2.0
        expected = {
            (k, k, k, k, k, 0.5): 5 / (4 * math.sqrt(2)),
            (k, k, k, k, 1.0, 0.5): 33 / (16 * math.sqrt(6)),
            (k, k, k, 0.5, k, 0.5): 3 / math.sqrt(11),
            (k, k, k, 0.5, 1.0, 0.5): 21 / (4 * math.sqrt(33)),
        }
        for corner, value in expected.items():
            assert phi31_hyper_x(*corner) == pytest.approx(value, abs=1e-12)
        assert corner_bound(k, k, k) == pytest.approx(21 / (4 * math.sqrt(33)), abs=1e-12)

    def test_dominates_box(self):
        rng = random.Random(29)
        a, b = 1.8, 2.5
        for _ in range(2000):
            x1 = rng.uniform(1.0, 3.0)
            x = (x1, rng.uniform(0.5, a), rng.uniform(1.0, b),
                 rng.uniform(0.5, a), rng.uniform(1.0, b), rng.uniform(0.5, a))
            assert phi31_hyper_x(*x) <= corner_bound(x1, a, b) + 1e-12

    def test_refined_floor(self):
        assert corner_bound(2.0, 8 / 5, 2.0, floor=4 / 5) == pytest.approx(
            7 * math.sqrt(2) / 12, abs=1e-12)


class TestTauProfile:
    def test_value_one_at_one(self):
        assert tau_profile(1.0) == pytest.approx((1.0,) * 4, abs=1e-12)

    def test_closed_forms(self):
        def closed(x):
            return (
                (-x * x + 16 * x + 17) / (4 * math.sqrt((2 + 2 * x) * (x * x + 8 * x + 7))),
                (-x * x + 12 * x + 13) / (4 * (x + 2) * math.sqrt(2 + 2 * x)),
                (-x * x + 10 * x + 11) / math.sqrt((8 * x + 17) * (x * x + 8 * x + 7)),
                (-x * x + 9 * x + 7) / ((x + 2) * math.sqrt(8 * x + 17)),
            )

        for x in (1.0, 1.2, 1.5, 1.8, 2.0):
            assert tau_profile(x) == pytest.approx(closed(x), abs=1e-13)

    def test_monotone_decreasing(self):
        grid = [1.0 + 0.05 * i for i in range(21)]
        profiles = [tau_profile(x) for x in grid]
        for cur, nxt in zip(profiles, profiles[1:]):
            assert all(n < c + 1e-15 for c, n in zip(cur, nxt))


class TestSmallEdgeBound:
    def test_paper_constant_at_c2(self):
        assert small_edge_angle_bound(2.0, 0.5) == pytest.approx(
            0.25 / (6 * math.pi ** 2), abs=1e-15)

    def test_monotone_in_eps(self):
        deltas = [small_edge_angle_bound(2.0, e) for e in (0.01, 0.1, 0.5, 1.0)]
        assert deltas == sorted(deltas)
        assert deltas[0] > 0

    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
    def test_implication_c2(self, eps):
        delta = small_edge_angle_bound(2.0, eps)
        rng = random.Random(int(eps * 1000))
        for _ in range(2000):
            x = (rng.uniform(1.0, 1.0 + delta),
                 rng.uniform(0.5, 2.0), rng.uniform(1.0, 2.0),
                 rng.uniform(0.5, 2.0), rng.uniform(1.0, 2.0),
                 rng.uniform(0.5, 2.0))
            phi = phi31_hyper_x(*x)
            alpha = math.acos(min(1.0, max(-1.0, phi)))
            assert alpha <= eps + 1e-12

    def test_general_c_implication(self):
        eps, C = 0.4, 3.0
        delta = small_edge_angle_bound(C, eps)
        assert 0 < delta < 0.5 / C
        rng = random.Random(31)
        for _ in range(1000):
            x = (rng.uniform(1.0, 1.0 + delta),
                 rng.uniform(0.5, C), rng.uniform(1.0, C),
                 rng.uniform(0.5, C), rng.uniform(1.0, C),
                 rng.uniform(0.5, C))
            alpha = math.acos(min(1.0, max(-1.0, phi31_hyper_x(*x))))
            assert alpha <= eps + 1e-12


class TestLongestEdgeAngle:
    def test_symmetric_tet_angle(self):
        tet = constrained31(*(math.sqrt(1.5),) * 3)
        angles = extended_angles(tet)
        assert angles.alpha((2, 3)) == pytest.approx(math.pi / 4, abs=1e-12)
        assert longest_edge_angle_exceeds((ACOSH2,) * 3)

    def test_random_constrained_with_max_at_wall(self):
        rng = random.Random(32)
        for _ in range(100):
            rest = sorted(rng.uniform(0.05, ACOSH2) for _ in range(2))
            order = rng.randrange(3)
            lengths = [0.0, 0.0, 0.0]
            lengths[order] = ACOSH2
            lengths[(order + 1) % 3], lengths[(order + 2) % 3] = rest
            assert longest_edge_angle_exceeds(tuple(lengths))

    def test_analytic_floor(self):
        assert math.acos(7 * math.sqrt(2) / 12) > 2 * math.pi / 11
