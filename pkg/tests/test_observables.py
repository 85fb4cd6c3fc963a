"""Tests for reduced densities, entropy and occupation bookkeeping."""

import numpy as np
import pytest

from src.errors import NumericalError
from src.observables import (
    basis_labels,
    basis_occupations,
    expectation,
    magnetization_class_labels,
    magnetization_classes,
    purity,
    reduced_density,
    reduced_density_from_state,
    site_observables,
    von_neumann_entropy,
)
from src.spin_algebra import HalfInteger

HALF = HalfInteger(1)
ONE = HalfInteger(2)


def naive_partial_trace(rho, site, n_sites, d):
    """Reference partial trace by explicit index loops."""
    dim = d**n_sites
    result = np.zeros((d, d), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            da = np.base_repr(a, d).zfill(n_sites)
            db = np.base_repr(b, d).zfill(n_sites)
            rest_a = da[: site - 1] + da[site:]
            rest_b = db[: site - 1] + db[site:]
            if rest_a == rest_b:
                result[int(da[site - 1]), int(db[site - 1])] += rho[a, b]
    return result


class TestReducedDensity:
    @pytest.mark.parametrize("n_sites, d", [(2, 2), (3, 2), (2, 3)])
    def test_matches_naive_loop(self, random_density, n_sites, d):
        rho = random_density(d**n_sites)
        for site in range(1, n_sites + 1):
            np.testing.assert_allclose(
                reduced_density(rho, site, n_sites, d),
                naive_partial_trace(rho, site, n_sites, d),
                atol=1e-12,
            )

    def test_state_fast_path(self, random_state):
        psi = random_state(27)
        rho = np.outer(psi, psi.conj())
        for site in (1, 2, 3):
            np.testing.assert_allclose(
                reduced_density_from_state(psi, site, 3, 3), reduced_density(rho, site, 3, 3), atol=1e-12
            )

    def test_product_state_factorizes(self, random_state):
        a, b = random_state(3), random_state(3)
        psi = np.kron(a, b)
        np.testing.assert_allclose(reduced_density_from_state(psi, 1, 2, 3), np.outer(a, a.conj()), atol=1e-12)
        np.testing.assert_allclose(reduced_density_from_state(psi, 2, 2, 3), np.outer(b, b.conj()), atol=1e-12)

    def test_dimension_errors(self):
        with pytest.raises(ValueError):
            reduced_density(np.eye(8) / 8, 4, 3, 2)
        with pytest.raises(ValueError):
            reduced_density(np.eye(6) / 6, 1, 3, 2)


class TestEntropy:
    def test_pure_state_has_zero_entropy(self, random_state):
        psi = random_state(3)
        assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(3) / 3) == pytest.approx(np.log2(3))

    def test_bell_state_one_bit(self):
        psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
        rho1 = reduced_density_from_state(psi, 1, 2, 2)
        assert von_neumann_entropy(rho1) == pytest.approx(1.0)
        assert purity(rho1) == pytest.approx(0.5)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NumericalError):
            von_neumann_entropy(np.diag([1.1, -0.1]).astype(complex))

    def test_tiny_negative_eigenvalue_clamped(self):
        assert von_neumann_entropy(np.diag([1.0 + 1e-12, -1e-12]).astype(complex)) == pytest.approx(0.0, abs=1e-9)


class TestSiteObservables:
    def test_product_state_full_length(self):
        psi = np.zeros(9, dtype=complex)
        psi[0] = 1.0
        sites = site_observables(psi, 2, ONE)
        for site in sites:
            np.testing.assert_allclose(site.vector, [0.0, 0.0, 1.0], atol=1e-15)
            assert site.length == pytest.approx(1.0)
            assert site.entropy == pytest.approx(0.0, abs=1e-12)

    def test_entangled_pair_shrinks_spins(self):
        psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
        sites = site_observables(psi, 2, HALF)
        for site in sites:
            assert site.length == pytest.approx(0.0, abs=1e-12)
            assert site.entropy == pytest.approx(1.0)

    def test_length_bounded_by_spin(self, random_state):
        for _ in range(10):
            psi = random_state(27)
            for site in site_observables(psi, 3, ONE):
                assert site.length <= 1.0 + 1e-12
                assert 0.0 <= site.entropy <= np.log2(3) + 1e-12

    def test_expectation_vector_and_density(self, random_state, random_hermitian):
        psi, op = random_state(4), random_hermitian(4)
        rho = np.outer(psi, psi.conj())
        assert expectation(psi, op) == pytest.approx(expectation(rho, op))
        with pytest.raises(ValueError):
            expectation(psi, np.eye(3))


class TestOccupations:
    def test_spin_half_labels(self):
        assert basis_labels(3, HALF) == ["uuu", "uud", "udu", "udd", "duu", "dud", "ddu", "ddd"]

    def test_spin_one_labels(self):
        labels = basis_labels(2, ONE)
        assert labels[0] == "+1_+1"
        assert labels[1] == "+1_0"
        assert labels[-1] == "-1_-1"

    def test_magnetization_class_labels(self):
        assert magnetization_class_labels(3, HALF) == ["+3/2", "+1/2", "-1/2", "-3/2"]
        assert magnetization_class_labels(2, ONE) == ["+2", "+1", "0", "-1", "-2"]

    def test_probabilities_sum_to_one(self, random_state):
        psi = random_state(8)
        occupations = basis_occupations(psi, 3, HALF)
        classes = magnetization_classes(psi, 3, HALF)
        assert sum(occupations.values()) == pytest.approx(1.0)
        assert sum(classes.values()) == pytest.approx(1.0)
        expected = occupations["uud"] + occupations["udu"] + occupations["duu"]
        assert classes["+1/2"] == pytest.approx(expected)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            basis_occupations(np.ones(4, dtype=complex), 3, HALF)
