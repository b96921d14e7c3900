import numpy as np
import pytest

import chains
from dampedchain import (
    DampingVector,
    IllConditionedError,
    RegimeError,
    SpectralStructureError,
    StochasticMatrix,
    decompose,
    expansion,
    spectral_coefficients,
    spectrum,
    stationary_series,
)


class TestSpectrum:
    def test_five_node_eigenvalues(self, five_node):
        P, _ = five_node
        spec = spectrum(P)
        got = sorted(spec.eigenvalues, key=lambda z: z.real)
        expected = sorted(chains.FIVE_NODE_EIGENVALUES)
        for g, e in zip(got, expected):
            assert abs(g - e) < 1e-8
        # The repeated eigenvalue merges into one representative of multiplicity 2.
        multiplicities = {round(rep.real, 6): mult for rep, mult in spec.distinct}
        assert multiplicities[round(-1 / 3, 6)] == 2
        assert len(spec.distinct) == 4

    def test_four_node_eigenvalues(self, four_node):
        P, _ = four_node
        spec = spectrum(P)
        got = sorted(spec.eigenvalues, key=lambda z: z.real)
        for g, e in zip(got, sorted(chains.FOUR_NODE_EIGENVALUES)):
            assert abs(g - e) < 1e-8

    def test_identity_collapses_to_single_eigenvalue(self):
        spec = spectrum(StochasticMatrix(np.eye(4)))
        assert spec.distinct == ((1.0 + 0.0j, 4),)

    def test_leading_eigenvalue_snapped_to_one(self, four_node):
        P, _ = four_node
        assert spectrum(P).distinct[0][0] == 1.0

    def test_second_modulus(self, five_node):
        P, _ = five_node
        assert spectrum(P).second_modulus == pytest.approx(1 / 3, abs=1e-10)


class TestSpectralCoefficients:
    def test_five_node_repeated_eigenvalue_has_zero_weight(self, five_node):
        # The damping-averaged trajectory does not excite the eigenvalue -1/3.
        P, d = five_node
        sc = spectral_coefficients(P, d, spectrum(P))
        idx = [i for i, rho in enumerate(sc.rates) if abs(rho + 1 / 3) < 1e-8]
        assert len(idx) == 1
        np.testing.assert_allclose(np.abs(sc.coeffs[idx[0]]), 0.0, atol=1e-12)

    def test_four_node_third_state_weights(self, four_node):
        P, d = four_node
        sc = spectral_coefficients(P, d, spectrum(P))
        assert sc.constant[2] == pytest.approx(0.25, abs=1e-12)
        moduli = sorted(abs(c) for c in sc.coeffs[:, 2])
        # Weights are 0 (for -1/2) and sqrt(33)/132 for the conjugate pair.
        assert moduli[0] == pytest.approx(0.0, abs=1e-12)
        assert moduli[1] == pytest.approx(np.sqrt(33) / 132, abs=1e-12)
        assert moduli[2] == pytest.approx(np.sqrt(33) / 132, abs=1e-12)

    def test_rank_one_matrix_has_constant_trajectory(self):
        d = DampingVector(np.array([0.1, 0.2, 0.3, 0.4]))
        D = d.matrix()
        sc = spectral_coefficients(D, d, spectrum(D))
        np.testing.assert_allclose(np.abs(sc.coeffs), 0.0, atol=1e-12)
        np.testing.assert_allclose(sc.constant, d.weights, atol=1e-12)

    @pytest.mark.parametrize("chain_name", ["five_node", "four_node"])
    def test_reconstruction_matches_trajectory(self, chain_name, request):
        P, d = request.getfixturevalue(chain_name)
        sc = spectral_coefficients(P, d, spectrum(P))
        mbar = len(sc.rates) + 1
        v = d.weights
        for n in range(2 * mbar):
            rebuilt = sc.reconstruct(n)
            assert np.max(np.abs(rebuilt.real - v)) < 1e-8
            assert np.max(np.abs(rebuilt.imag)) < 1e-10
            v = v @ P.entries

    def test_defective_matrix_is_detected(self):
        # Upper-triangular chain: eigenvalue 1/2 twice with a single eigenvector.
        P = StochasticMatrix(
            np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]])
        )
        d = DampingVector.uniform(3)
        with pytest.raises(SpectralStructureError, match="defective"):
            spectral_coefficients(P, d, spectrum(P))

    def test_unmerged_near_duplicates_are_rejected(self, five_node):
        P, d = five_node
        with pytest.raises(IllConditionedError, match="cluster_tol"):
            spectral_coefficients(P, d, spectrum(P, cluster_tol=0.0))


class TestExpansion:
    def test_five_node_first_order_rationals(self, five_node):
        P, d = five_node
        series = expansion(P, d, decompose(P), n_max=2)
        expected = [307 / 2178, -50 / 1089, -23 / 726, -23 / 726, -23 / 726]
        np.testing.assert_allclose(series.coeffs[0], expected, atol=1e-12)

    def test_five_node_five_decimal_table(self, five_node):
        P, d = five_node
        series = expansion(P, d, decompose(P), n_max=2)
        first = [round(c, 5) for c in series.coeffs[0]]
        second = [round(c, 5) for c in series.coeffs[1]]
        assert first == [0.14096, -0.04591, -0.03168, -0.03168, -0.03168]
        assert second == [-0.01946, 0.00456, 0.00497, 0.00497, 0.00497]

    def test_four_node_exact_rationals(self, four_node):
        P, d = four_node
        series = expansion(P, d, decompose(P), n_max=2)
        np.testing.assert_allclose(series.base.probs, chains.FOUR_NODE_PI, atol=1e-12)
        np.testing.assert_allclose(series.coeffs, chains.FOUR_NODE_COEFFS, atol=1e-9)

    def test_eight_node_table(self, eight_node):
        P, d = eight_node
        series = expansion(P, d, decompose(P), n_max=2)
        np.testing.assert_allclose(series.base.probs, chains.EIGHT_NODE_BASE, atol=1e-12)
        np.testing.assert_allclose(series.coeffs, chains.EIGHT_NODE_COEFFS, atol=1e-9)

    @pytest.mark.parametrize("chain_name", ["five_node", "four_node", "eight_node"])
    def test_coefficient_rows_sum_to_zero(self, chain_name, request):
        P, d = request.getfixturevalue(chain_name)
        series = expansion(P, d, decompose(P), n_max=4)
        for row in series.coeffs:
            assert abs(row.sum()) < 1e-9

    def test_unsupported_regime_is_rejected(self):
        P = StochasticMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        d = DampingVector.uniform(2)
        with pytest.raises(RegimeError):
            expansion(P, d, decompose(P))

    def test_split_chain_regular_path_is_rejected(self, eight_node):
        # Forcing the whole-matrix path on a two-class chain trips the
        # repeated-eigenvalue-at-1 guard.
        from dampedchain import ChainStructure, ClosedClass, Regime

        P, d = eight_node
        fake = ChainStructure((ClosedClass(tuple(range(8)), 1),), (), Regime.REGULAR)
        with pytest.raises(RegimeError, match="multiplicity|singular"):
            expansion(P, d, fake)


class TestEvaluate:
    def test_zero_epsilon_returns_base(self, five_node):
        P, d = five_node
        series = expansion(P, d, decompose(P))
        np.testing.assert_array_equal(series.evaluate(0.0), series.base.probs)

    def test_five_node_first_state_at_point_two(self, five_node):
        P, d = five_node
        series = expansion(P, d, decompose(P), n_max=2)
        value = series.evaluate(0.2)[0]
        assert value == pytest.approx(5 / 66 + 0.14096 * 0.2 - 0.01946 * 0.04, abs=5e-6)
        # The first-order term is about 37.22% of the limiting probability.
        first_term = series.coeffs[0][0] * 0.2
        assert round(first_term, 5) == 0.02819
        assert first_term / (5 / 66) == pytest.approx(0.3722, abs=5e-4)

    def test_order_difference_is_last_term(self, four_node):
        P, d = four_node
        s = decompose(P)
        eps = 0.3
        full = expansion(P, d, s, n_max=3)
        truncated = expansion(P, d, s, n_max=2)
        diff = full.evaluate(eps) - truncated.evaluate(eps)
        np.testing.assert_allclose(diff, full.coeffs[2] * eps**3, atol=1e-15)

    def test_mass_defect_is_reported(self, four_node):
        P, d = four_node
        series = expansion(P, d, decompose(P), n_max=2)
        defect = series.mass_defect(0.3)
        assert defect == pytest.approx(series.evaluate(0.3).sum() - 1.0, abs=1e-16)


@pytest.mark.parametrize("chain_name", ["five_node", "four_node", "eight_node"])
def test_empirical_convergence_order(chain_name, request):
    P, d = request.getfixturevalue(chain_name)
    structure = decompose(P)
    n_max = 2
    series = expansion(P, d, structure, n_max=n_max)
    errors = []
    for eps in (0.1, 0.05, 0.025):
        truth = stationary_series(P, d, eps, tol=1e-14).pi.probs
        errors.append(np.max(np.abs(series.evaluate(eps) - truth)))
    limit = 0.5 ** (n_max + 1) * 1.5
    assert errors[1] <= errors[0] * limit
    assert errors[2] <= errors[1] * limit
