"""Log-ratio and power-family coordinate transforms.

Checks hand-computed coordinate values, round-trip identities, the
Helmert contrast matrix, numerical stability of the inverse maps under
extreme coordinates, and the small-exponent limit of the power-family
transform.
"""

import math

import numpy as np
import pytest

from simplexreg import (
    OutOfRangeError,
    ValidationError,
    ZeroNotAllowedError,
    alpha_inverse,
    alpha_transform,
    alr,
    alr_inverse,
    check_alpha,
    closure,
    clr,
    clr_inverse,
    helmert_submatrix,
    ilr,
    ilr_inverse,
    power_transform,
)


def random_compositions(rng, n, D):
    return closure(rng.random((n, D)) + 0.05)


class TestCheckAlpha:
    def test_accepts_range(self):
        assert check_alpha(-1.0) == -1.0
        assert check_alpha(0.0) == 0.0
        assert check_alpha(1.0) == 1.0

    def test_rejects_outside(self):
        for bad in (1.0000001, -1.5, 2.0):
            with pytest.raises(ValidationError):
                check_alpha(bad)

    def test_rejects_nonfinite(self):
        for bad in (np.nan, np.inf, -np.inf):
            with pytest.raises(ValidationError):
                check_alpha(bad)

    def test_rejects_non_numeric(self):
        with pytest.raises(ValidationError):
            check_alpha("half")


class TestHelmert:
    def test_d2(self):
        H = helmert_submatrix(2)
        assert np.allclose(H, [[1 / math.sqrt(2), -1 / math.sqrt(2)]])

    def test_d3(self):
        H = helmert_submatrix(3)
        s2, s6 = math.sqrt(2), math.sqrt(6)
        expect = [[1 / s2, -1 / s2, 0.0], [1 / s6, 1 / s6, -2 / s6]]
        assert np.allclose(H, expect, atol=1e-15)

    def test_rows_orthonormal(self):
        for D in (2, 3, 5, 11):
            H = helmert_submatrix(D)
            assert H.shape == (D - 1, D)
            assert np.allclose(H @ H.T, np.eye(D - 1), atol=1e-12)

    def test_rows_orthogonal_to_ones(self):
        for D in (2, 4, 9):
            H = helmert_submatrix(D)
            assert np.allclose(H @ np.ones(D), 0.0, atol=1e-12)

    def test_cached_and_readonly(self):
        H = helmert_submatrix(4)
        assert helmert_submatrix(4) is H
        assert not H.flags.writeable
        with pytest.raises(ValueError):
            H[0, 0] = 99.0

    def test_bad_size(self):
        with pytest.raises(ValidationError):
            helmert_submatrix(1)
        with pytest.raises(ValidationError):
            helmert_submatrix(2.5)


class TestAlr:
    def test_known_value(self):
        # log(0.8 / 0.2) = log 4
        v = alr([0.2, 0.8])
        assert v.shape == (1,)
        assert abs(v[0] - math.log(4.0)) <= 1e-15

    def test_matrix_shape(self):
        rng = np.random.default_rng(0)
        U = random_compositions(rng, 20, 6)
        assert alr(U).shape == (20, 5)

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        for D in (2, 3, 5, 10):
            U = random_compositions(rng, 100, D)
            back = alr_inverse(alr(U))
            assert np.max(np.abs(back - U)) <= 1e-12

    def test_inverse_round_trip_from_coordinates(self):
        rng = np.random.default_rng(2)
        V = rng.normal(size=(50, 4)) * 3
        again = alr(alr_inverse(V))
        assert np.max(np.abs(again - V)) <= 1e-10

    def test_inverse_overflow_safe(self):
        # softmax with an implicit leading zero must survive huge logits
        u = alr_inverse([800.0, 0.0])
        assert np.all(np.isfinite(u))
        assert abs(u.sum() - 1.0) <= 1e-12
        assert u[1] == pytest.approx(1.0)
        u2 = alr_inverse([-800.0, -900.0])
        assert u2[0] == pytest.approx(1.0)

    def test_zero_rejected(self):
        with pytest.raises(ZeroNotAllowedError):
            alr([0.0, 1.0])


class TestClr:
    def test_known_value(self):
        # log u minus its mean; for (0.2, 0.8) that is +/- log(4)/2
        y = clr([0.2, 0.8])
        half = math.log(4.0) / 2
        assert np.allclose(y, [-half, half], atol=1e-15)

    def test_coordinates_sum_to_zero(self):
        rng = np.random.default_rng(3)
        Y = clr(random_compositions(rng, 200, 7))
        assert np.max(np.abs(Y.sum(axis=1))) <= 1e-12

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        U = random_compositions(rng, 100, 5)
        assert np.max(np.abs(clr_inverse(clr(U)) - U)) <= 1e-12

    def test_inverse_shift_invariant(self):
        rng = np.random.default_rng(5)
        Y = rng.normal(size=(30, 4))
        a = clr_inverse(Y)
        b = clr_inverse(Y + 17.5)
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_inverse_overflow_safe(self):
        u = clr_inverse([1000.0, 0.0, -1000.0])
        assert np.all(np.isfinite(u))
        assert u[0] == pytest.approx(1.0)


class TestIlr:
    def test_uniform_maps_to_origin(self):
        z = ilr([1 / 3, 1 / 3, 1 / 3])
        assert np.array_equal(z, np.zeros(2))

    def test_known_value_d2(self):
        # first Helmert contrast of clr(0.2, 0.8): (log(0.2/0.8)) / sqrt(2)
        z = ilr([0.2, 0.8])
        assert abs(z[0] - math.log(0.25) / math.sqrt(2)) <= 1e-12

    def test_norm_matches_clr(self):
        # the Helmert rows are orthonormal on the clr plane
        rng = np.random.default_rng(6)
        U = random_compositions(rng, 100, 6)
        n_ilr = np.linalg.norm(ilr(U), axis=1)
        n_clr = np.linalg.norm(clr(U), axis=1)
        assert np.max(np.abs(n_ilr - n_clr)) <= 1e-12

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        for D in (2, 3, 5, 10):
            U = random_compositions(rng, 100, D)
            assert np.max(np.abs(ilr_inverse(ilr(U)) - U)) <= 1e-12

    def test_round_trip_from_coordinates(self):
        rng = np.random.default_rng(8)
        Z = rng.normal(size=(50, 6)) * 2
        assert np.max(np.abs(ilr(ilr_inverse(Z)) - Z)) <= 1e-10

    def test_zero_rejected(self):
        with pytest.raises(ZeroNotAllowedError):
            ilr([0.5, 0.5, 0.0])


class TestPowerTransform:
    def test_alpha_one_identity(self):
        rng = np.random.default_rng(9)
        U = random_compositions(rng, 40, 5)
        assert np.array_equal(power_transform(U, 1.0), U)

    def test_alpha_zero_uniform(self):
        out = power_transform([0.1, 0.2, 0.7], 0.0)
        assert np.array_equal(out, np.full(3, 1 / 3))

    def test_known_value(self):
        # squares of (0.2, 0.8) re-closed: (0.04, 0.64) -> (1/17, 16/17)
        out = power_transform([0.2, 0.8], 1.0)
        assert np.allclose(out, [0.2, 0.8])
        sq = power_transform(np.array([[0.2, 0.8]]), 0.5)
        root = np.sqrt([0.2, 0.8])
        assert np.allclose(sq[0], root / root.sum(), atol=1e-15)

    def test_stays_on_simplex(self):
        rng = np.random.default_rng(10)
        U = random_compositions(rng, 50, 4)
        for a in (-1.0, -0.5, 0.5, 1.0):
            out = power_transform(U, a)
            assert np.all(out >= 0)
            assert np.max(np.abs(out.sum(axis=1) - 1.0)) <= 1e-12

    def test_zeros_need_positive_alpha(self):
        u = [0.0, 0.4, 0.6]
        out = power_transform(u, 0.5)
        assert out[0] == 0.0
        for a in (0.0, -0.5):
            with pytest.raises(ZeroNotAllowedError):
                power_transform(u, a)


class TestAlphaTransform:
    def test_zero_alpha_is_ilr(self):
        rng = np.random.default_rng(11)
        U = random_compositions(rng, 30, 5)
        assert np.array_equal(alpha_transform(U, 0.0), ilr(U))

    def test_uniform_maps_to_origin(self):
        u = np.full(4, 0.25)
        for a in (-1.0, -0.3, 0.4, 1.0):
            assert np.allclose(alpha_transform(u, a), 0.0, atol=1e-12)

    def test_known_value_d2(self):
        # D * closure(u^1) - 1 = (0.2, -0.2); contrast gives 0.4 / sqrt(2)
        z = alpha_transform([0.6, 0.4], 1.0)
        assert abs(z[0] - 0.4 / math.sqrt(2)) <= 1e-12

    def test_round_trip(self):
        rng = np.random.default_rng(12)
        for D in (3, 5, 10):
            U = random_compositions(rng, 100, D)
            for a in (-1.0, -0.5, 0.5, 1.0):
                back = alpha_inverse(alpha_transform(U, a), a)
                assert np.max(np.abs(back - U)) <= 1e-10

    def test_small_alpha_near_ilr(self):
        rng = np.random.default_rng(13)
        U = random_compositions(rng, 100, 4)
        gap = np.max(np.abs(alpha_transform(U, 1e-4) - ilr(U)))
        assert gap < 1e-3

    def test_gap_shrinks_with_alpha(self):
        rng = np.random.default_rng(14)
        U = random_compositions(rng, 100, 4)
        Z0 = ilr(U)
        gaps = [
            np.max(np.abs(alpha_transform(U, a) - Z0))
            for a in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
        ]
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))

    def test_zeros_need_positive_alpha(self):
        u = [0.0, 0.4, 0.6]
        alpha_transform(u, 0.5)
        for a in (0.0, -0.5):
            with pytest.raises(ZeroNotAllowedError):
                alpha_transform(u, a)

    def test_out_of_range_alpha(self):
        with pytest.raises(ValidationError):
            alpha_transform([0.5, 0.5], 1.01)


class TestAlphaInverse:
    def test_origin_maps_to_uniform(self):
        # 2 coordinates at the origin invert to the uniform 3-part composition
        for a in (-1.0, -0.5, 0.5, 1.0):
            u = alpha_inverse(np.zeros(2), a)
            assert np.allclose(u, 1 / 3, atol=1e-15)

    def test_zero_alpha_is_ilr_inverse(self):
        rng = np.random.default_rng(15)
        Z = rng.normal(size=(20, 4))
        assert np.array_equal(alpha_inverse(Z, 0.0), ilr_inverse(Z))

    def test_rejects_coordinates_outside_image(self):
        # alpha = 1, D = 2: t = z * H^T + 1 goes negative for large z
        with pytest.raises(OutOfRangeError):
            alpha_inverse([10.0], 1.0)

    def test_boundary_round_trip(self):
        # coordinates of (1, 0) sit on the image boundary and stay
        # invertible for positive alpha
        z = alpha_transform([1.0, 0.0], 1.0)
        u = alpha_inverse(z, 1.0)
        assert np.allclose(u, [1.0, 0.0], atol=1e-12)

    def test_zero_preimage_needs_positive_alpha(self):
        # z chosen so that one pre-image part is exactly 0: fine for
        # alpha > 0, impossible to raise to a negative power
        h = helmert_submatrix(2)[0, 0]
        z = np.array([1.0 / h])
        assert np.allclose(alpha_inverse(z, 1.0), [1.0, 0.0], atol=1e-15)
        with pytest.raises(OutOfRangeError):
            alpha_inverse(-z, -1.0)
        with pytest.raises(OutOfRangeError):
            alpha_inverse(z, -1.0)

    def test_matrix_shape(self):
        rng = np.random.default_rng(16)
        Z = rng.normal(size=(25, 2)) * 0.1
        U = alpha_inverse(Z, 0.5)
        assert U.shape == (25, 3)
        assert np.max(np.abs(U.sum(axis=1) - 1.0)) <= 1e-12
