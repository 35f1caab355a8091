"""Closure and validation gates.

Covers the closure operator (scale invariance, idempotence, degenerate
input rejection), the composition/predictor ingestion gates with their
row-naming error messages, and the zero-pattern report.
"""

import numpy as np
import pytest

from simplexreg import (
    SUM_TOL,
    DegenerateInputError,
    ValidationError,
    as_composition,
    as_composition_matrix,
    as_predictor_matrix,
    closure,
    validate_composition_matrix,
)


class TestClosure:
    def test_halves(self):
        out = closure([2.0, 2.0])
        assert np.array_equal(out, [0.5, 0.5])

    def test_known_vector(self):
        # 1 + 3 + 4 = 8, all parts dyadic so the quotients are exact
        out = closure([1.0, 3.0, 4.0])
        assert np.array_equal(out, [0.125, 0.375, 0.5])

    def test_already_closed_is_fixed_point(self):
        x = np.array([0.3, 0.7])
        assert np.array_equal(closure(x), x)

    def test_idempotent_exactly(self):
        rng = np.random.default_rng(11)
        x = rng.random((50, 7)) * 10
        once = closure(x)
        assert np.array_equal(closure(once), once)

    def test_scale_invariance(self):
        rng = np.random.default_rng(12)
        x = rng.random((30, 5)) + 0.01
        for c in (1e-6, 0.5, 3.0, 1e6):
            assert np.allclose(closure(c * x), closure(x), atol=1e-12)

    def test_output_sums_to_one(self):
        rng = np.random.default_rng(13)
        out = closure(rng.random((200, 9)) * 100)
        assert np.max(np.abs(out.sum(axis=1) - 1.0)) <= 1e-12

    def test_axis_argument(self):
        x = np.array([[1.0, 1.0], [3.0, 1.0]])
        out = closure(x, axis=0)
        assert np.allclose(out.sum(axis=0), 1.0)

    def test_zeros_allowed_when_slice_positive(self):
        out = closure([0.0, 1.0, 3.0])
        assert np.array_equal(out, [0.0, 0.25, 0.75])

    def test_all_zero_slice_rejected(self):
        with pytest.raises(DegenerateInputError):
            closure([0.0, 0.0, 0.0])
        with pytest.raises(DegenerateInputError):
            closure([[1.0, 1.0], [0.0, 0.0]])

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            closure([0.5, -0.1, 0.6])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            closure([0.5, np.nan])
        with pytest.raises(ValidationError):
            closure([0.5, np.inf])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            closure([])


class TestAsComposition:
    def test_reclose_within_tolerance(self):
        u = as_composition([0.3, 0.7 + 5e-10])
        assert abs(u.sum() - 1.0) <= 1e-12

    def test_reject_outside_tolerance(self):
        with pytest.raises(ValidationError):
            as_composition([0.3, 0.71])

    def test_tolerance_boundary(self):
        # 2x the ingestion tolerance must be rejected, half accepted
        with pytest.raises(ValidationError):
            as_composition([0.5, 0.5 + 2 * SUM_TOL])
        as_composition([0.5, 0.5 + SUM_TOL / 2])

    def test_single_part_rejected(self):
        with pytest.raises(ValidationError):
            as_composition([1.0])

    def test_scalar_rejected(self):
        with pytest.raises(ValidationError):
            as_composition(0.5)

    def test_exactly_closed_returned_as_is(self):
        u = np.array([0.25, 0.25, 0.5])
        assert as_composition(u) is u


class TestAsCompositionMatrix:
    def test_accepts_valid(self):
        U = np.array([[0.2, 0.8], [0.5, 0.5]])
        out = as_composition_matrix(U)
        assert out is U

    def test_error_names_offending_row(self):
        U = [[0.2, 0.8], [0.2, 0.9]]
        with pytest.raises(ValidationError, match="row 1"):
            as_composition_matrix(U)

    def test_negative_row_named(self):
        U = [[0.2, 0.8], [1.2, -0.2]]
        with pytest.raises(ValidationError, match="row 1"):
            as_composition_matrix(U)

    def test_1d_rejected(self):
        with pytest.raises(ValidationError):
            as_composition_matrix([0.2, 0.8])

    def test_zero_rows_rejected(self):
        with pytest.raises(ValidationError):
            as_composition_matrix(np.empty((0, 3)))

    def test_reclosure_leaves_clean_rows_alone(self):
        U = np.array([[0.25, 0.75], [0.5, 0.5 + 4e-10]])
        out = as_composition_matrix(U)
        assert np.array_equal(out[0], [0.25, 0.75])
        assert abs(out[1].sum() - 1.0) <= 1e-12


class TestAsPredictorMatrix:
    def test_1d_promoted_to_column(self):
        X = as_predictor_matrix([1.0, 2.0, 3.0])
        assert X.shape == (3, 1)

    def test_2d_passthrough(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert as_predictor_matrix(X) is X

    def test_nonfinite_named(self):
        with pytest.raises(ValidationError, match="row 1"):
            as_predictor_matrix([[1.0], [np.nan]])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            as_predictor_matrix(np.empty((0, 2)))


class TestZeroReport:
    def test_zero_free(self):
        U = np.array([[0.2, 0.8], [0.5, 0.5]])
        rep = validate_composition_matrix(U)
        assert rep.rows == 2
        assert rep.zero_rows == 0
        assert not rep.has_zeros
        assert rep.column_zero_counts == (0, 0)

    def test_counts(self):
        U = np.array(
            [
                [0.0, 0.5, 0.5],
                [0.25, 0.75, 0.0],
                [0.2, 0.3, 0.5],
                [0.0, 0.0, 1.0],
            ]
        )
        rep = validate_composition_matrix(U)
        assert rep.rows == 4
        assert rep.zero_rows == 3
        assert rep.has_zeros
        assert rep.column_zero_counts == (2, 1, 1)

    def test_synthetic_zero_row_count(self):
        # 92 rows, exactly 42 of them carry at least one zero part
        rng = np.random.default_rng(5)
        U = closure(rng.random((92, 6)) + 0.05)
        pick = rng.choice(92, size=42, replace=False)
        U[pick, 0] = 0.0
        U = closure(U)
        rep = validate_composition_matrix(U)
        assert rep.rows == 92
        assert rep.zero_rows == 42

    def test_does_not_mutate(self):
        U = closure(np.random.default_rng(6).random((10, 4)))
        before = U.copy()
        validate_composition_matrix(U)
        assert np.array_equal(U, before)

    def test_invalid_rows_rejected(self):
        with pytest.raises(ValidationError):
            validate_composition_matrix([[0.2, 0.9]])
