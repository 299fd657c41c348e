"""Transition-matrix estimation and stationary distributions."""

import numpy as np
import pytest

from droughtcast import (
    InsufficientDataError,
    NoUniqueStationaryError,
    TransitionMatrixSet,
    estimate_transitions,
    matrices_from_counts,
    stationary,
    steady_state_lag,
)

from conftest import random_codes, scheme_with, sequence_from_codes


def brute_force_counts(codes, d, lag):
    """[DERIVED] pair enumeration with the explicit gap-free-window rule."""
    counts = np.zeros((d, d), dtype=int)
    for k in range(len(codes) - lag):
        window = codes[k : k + lag + 1]
        if all(c is not None for c in window):
            counts[codes[k], codes[k + lag]] += 1
    return counts


class TestEstimation:
    def test_counts_match_exhaustive_enumeration(self):
        rng = np.random.default_rng(200)
        for _ in range(25):
            d = int(rng.integers(2, 8))
            codes = random_codes(rng, int(rng.integers(5, 150)), d, gap_rate=0.12)
            seq = sequence_from_codes(codes, scheme_with(d))
            max_lag = int(rng.integers(1, 8))
            try:
                result = estimate_transitions(seq, max_lag)
            except InsufficientDataError:
                assert all(
                    brute_force_counts(codes, d, lag).sum() == 0
                    for lag in range(1, max_lag + 1)
                )
                continue
            for lag in range(1, max_lag + 1):
                expected = brute_force_counts(codes, d, lag)
                assert np.array_equal(result.count_matrix(lag), expected)

    def test_rows_are_count_ratios_exactly(self):
        seq = sequence_from_codes([0, 0, 1, 0, 1, 1, 0], scheme_with(2))
        result = estimate_transitions(seq, 1)
        counts = result.count_matrix(1)
        # transitions: 0->0, 0->1, 1->0, 0->1, 1->1, 1->0
        assert np.array_equal(counts, [[1, 2], [2, 1]])
        assert result.matrix(1) == pytest.approx(
            np.array([[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
        )

    def test_unseen_source_state_row_is_zero(self):
        # state 2 never appears: its row has no support
        seq = sequence_from_codes([0, 1, 0, 1], scheme_with(3))
        result = estimate_transitions(seq, 1)
        assert result.support(1).tolist() == [True, True, False]
        assert result.matrix(1)[2] == pytest.approx((0.0, 0.0, 0.0))

    def test_deep_lag_unavailable_is_tolerated(self):
        seq = sequence_from_codes([0, 1, 0], scheme_with(2))
        result = estimate_transitions(seq, 5)
        assert result.available == (True, True, False, False, False)
        assert result.available_lags() == (1, 2)

    def test_no_pairs_at_all_raises(self):
        seq = sequence_from_codes([0, None, 1], scheme_with(2))
        with pytest.raises(InsufficientDataError, match="no contiguous run"):
            estimate_transitions(seq, 3)

    def test_smoothing_fills_cells_and_keeps_rows_stochastic(self):
        seq = sequence_from_codes([0, 0, 0, 1], scheme_with(3))
        result = estimate_transitions(seq, 1, smoothing=0.5)
        m = result.matrix(1)
        assert np.all(m > 0.0)
        assert m.sum(axis=1) == pytest.approx(np.ones(3))
        # row 0 saw 2 departures to state 0 and 1 to state 1
        assert m[0] == pytest.approx(((2 + 0.5) / 4.5, (1 + 0.5) / 4.5, 0.5 / 4.5))
        # state 2 was never a source; smoothing makes its row uniform
        assert m[2] == pytest.approx((1 / 3, 1 / 3, 1 / 3))

    def test_negative_smoothing_rejected(self):
        seq = sequence_from_codes([0, 1], scheme_with(2))
        with pytest.raises(ValueError, match="smoothing"):
            estimate_transitions(seq, 1, smoothing=-1.0)

    def test_unknown_mode_rejected(self):
        seq = sequence_from_codes([0, 1], scheme_with(2))
        with pytest.raises(ValueError, match="mode"):
            estimate_transitions(seq, 1, mode="spectral")


class TestPowerMode:
    def test_deep_lags_are_matrix_powers(self):
        rng = np.random.default_rng(210)
        codes = random_codes(rng, 500, 3, 0.0)
        seq = sequence_from_codes(codes, scheme_with(3))
        result = estimate_transitions(seq, 4, mode="power")
        p1 = result.matrix(1)
        for lag in range(2, 5):
            assert result.matrix(lag) == pytest.approx(
                np.linalg.matrix_power(p1, lag), abs=1e-12
            )
            assert result.count_matrix(lag).sum() == 0  # powers carry no counts

    def test_power_mode_keeps_lag1_counts(self):
        seq = sequence_from_codes([0, 1, 0, 1, 1], scheme_with(2))
        empirical = estimate_transitions(seq, 3)
        powered = estimate_transitions(seq, 3, mode="power")
        assert np.array_equal(powered.count_matrix(1), empirical.count_matrix(1))
        assert powered.matrix(1) == pytest.approx(empirical.matrix(1))

    def test_unsupported_row_stays_blank_under_powering(self):
        # state 2 never observed as a source; its rows must stay zero at
        # every lag instead of leaking mass via the powering
        seq = sequence_from_codes([0, 1, 0, 1], scheme_with(3))
        result = estimate_transitions(seq, 3, mode="power")
        for lag in range(1, 4):
            assert result.matrix(lag)[2] == pytest.approx((0.0, 0.0, 0.0))
            assert result.support(lag).tolist() == [True, True, False]
            # supported rows remain stochastic
            assert result.matrix(lag)[:2].sum(axis=1) == pytest.approx((1.0, 1.0))


class TestMatrixSetValidation:
    def test_rejects_almost_stochastic_row(self):
        with pytest.raises(ValueError, match="sum to 1"):
            TransitionMatrixSet(
                class_count=2,
                max_lag=1,
                matrices=(((0.6, 0.5), (0.5, 0.5)),),
                counts=(((1, 1), (1, 1)),),
                row_support=((True, True),),
            )

    def test_rejects_negative_probability(self):
        with pytest.raises(ValueError, match="finite and >= 0"):
            TransitionMatrixSet(
                class_count=2,
                max_lag=1,
                matrices=(((1.5, -0.5), (0.5, 0.5)),),
                counts=(((1, 1), (1, 1)),),
                row_support=((True, True),),
            )

    def test_lag_accessors_bounds(self):
        seq = sequence_from_codes([0, 1, 0], scheme_with(2))
        result = estimate_transitions(seq, 2)
        with pytest.raises(ValueError, match="lag"):
            result.matrix(0)
        with pytest.raises(ValueError, match="lag"):
            result.matrix(3)


class TestStationary:
    def test_two_state_analytic_solution(self):
        # for [[1-a, a], [b, 1-b]] the fixed point is (b, a) / (a + b)
        for a, b in [(0.1, 0.5), (0.3, 0.2), (0.95, 0.05)]:
            result = stationary([[1 - a, a], [b, 1 - b]])
            assert result.probabilities == pytest.approx(
                (b / (a + b), a / (a + b)), abs=1e-9
            )
            assert result.residual <= 1e-8

    def test_fixed_point_property_random_matrices(self):
        rng = np.random.default_rng(220)
        for _ in range(40):
            k = int(rng.integers(2, 8))
            P = rng.dirichlet(np.ones(k) * rng.uniform(0.5, 3.0), size=k)
            P = 0.97 * P + 0.03 / k  # strictly positive => irreducible
            result = stationary(P)
            pi = np.array(result.probabilities)
            assert np.abs(pi @ P - pi).max() < 1e-8
            assert pi.min() >= 0.0
            assert pi.sum() == pytest.approx(1.0, abs=1e-10)

    def test_start_vector_does_not_change_the_answer(self):
        P = [[0.9, 0.1], [0.5, 0.5]]
        a = stationary(P)
        b = stationary(P, start=(0.01, 0.99))
        assert a.probabilities == pytest.approx(b.probabilities, abs=1e-9)

    def test_identity_matrix_has_no_unique_fixed_point(self):
        with pytest.raises(NoUniqueStationaryError, match="closed communicating"):
            stationary(np.eye(3))

    def test_reducible_two_block_chain_rejected(self):
        P = [
            [0.5, 0.5, 0.0, 0.0],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.0, 0.0, 0.5, 0.5],
        ]
        with pytest.raises(NoUniqueStationaryError):
            stationary(P)

    def test_periodic_chain_solved_by_linear_solve(self):
        # bipartite chain with a non-uniform fixed point: power iteration
        # oscillates between (2/3, 1/6, 1/6) and (1/3, 1/3, 1/3)
        P = [[0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
        result = stationary(P)
        assert result.method == "linear-solve"
        assert result.probabilities == pytest.approx((0.5, 0.25, 0.25), abs=1e-9)

    def test_symmetric_swap_chain_fixed_point(self):
        result = stationary([[0.0, 1.0], [1.0, 0.0]])
        assert result.probabilities == pytest.approx((0.5, 0.5), abs=1e-9)

    def test_absorbing_state_reached_from_transient(self):
        result = stationary([[0.5, 0.5], [0.0, 1.0]])
        assert result.probabilities == pytest.approx((0.0, 1.0), abs=1e-9)

    def test_unsupported_rows_are_excluded(self):
        # state 2 has no departures; chain restricted to states 0-1
        P = np.array([[0.9, 0.1, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0]])
        result = stationary(P)
        assert result.probabilities == pytest.approx((5 / 6, 1 / 6, 0.0), abs=1e-9)

    def test_leak_into_unsupported_state_rejected(self):
        P = np.array([[0.5, 0.3, 0.2], [0.4, 0.6, 0.0], [0.0, 0.0, 0.0]])
        with pytest.raises(NoUniqueStationaryError, match="leaks"):
            stationary(P)

    def test_all_zero_matrix_rejected(self):
        with pytest.raises(NoUniqueStationaryError, match="no supported rows"):
            stationary(np.zeros((2, 2)))

    def test_shape_and_value_validation(self):
        with pytest.raises(ValueError, match="square"):
            stationary(np.ones((2, 3)))
        with pytest.raises(ValueError, match="finite"):
            stationary([[np.nan, 1.0], [0.5, 0.5]])
        with pytest.raises(ValueError, match="sum to 1"):
            stationary([[0.7, 0.7], [0.5, 0.5]])


class TestSteadyStateLag:
    def test_rows_already_stationary_gives_lag_one(self):
        # every row equals the stationary vector at lag 1
        pi = (0.25, 0.75)
        counts = np.array([[25, 75], [25, 75]])
        ms = matrices_from_counts([counts, counts])
        assert steady_state_lag(ms, tolerance=0.01) == 1
        assert np.array(ms.matrix(1)[0]) == pytest.approx(pi)

    def test_convergence_depth_reflects_mixing_speed(self):
        # a sticky chain: lag-1 rows far from pi; powers converge later
        # (second eigenvalue ~0.6, so rows settle within tolerance ~lag 5)
        rng = np.random.default_rng(230)
        codes = [0]
        P = np.array([[0.8, 0.2], [0.2, 0.8]])
        for _ in range(20000):
            codes.append(int(rng.choice(2, p=P[codes[-1]])))
        seq = sequence_from_codes(codes, scheme_with(2))
        ms = estimate_transitions(seq, 12, mode="power")
        lag = steady_state_lag(ms, tolerance=0.05)
        assert 1 < lag <= 12
        pi = np.array(stationary(ms.matrix(1)).probabilities)
        gap = np.abs(ms.matrix(lag) - pi).max()
        assert gap < 0.05
        prev_gap = np.abs(ms.matrix(lag - 1) - pi).max()
        assert prev_gap >= 0.05

    def test_falls_back_to_max_lag_when_never_close(self):
        counts = np.array([[99, 1], [1, 99]])
        ms = matrices_from_counts([counts, counts])
        assert steady_state_lag(ms, tolerance=0.001) == 2
