"""Tests for classical LL/LLG integration and the stochastic Heun step."""

import numpy as np
import pytest

from src.classical_dynamics import (
    ClassicalConfig,
    heun_step,
    integrate_classical,
    ll_rhs,
    llg_rhs,
    rk4_step,
    stochastic_llg_step,
)
from src.errors import ConfigError
from src.model import EquationForm, NoiseSpec, PulseSpec, SystemSpec
from src.observables import site_observables
from src.quantum_dynamics import IntegratorConfig, evolve_pure
from src.spin_algebra import HalfInteger

LL = EquationForm.LL
LLG = EquationForm.LLG


def single(field_z=1.0, damping=0.0, spin=HalfInteger(1), pulse=None):
    return SystemSpec(n_sites=1, spin=spin, field_z=field_z, damping=damping, pulse=pulse)


def tilted(theta, length=1.0):
    return ClassicalConfig(
        spins=np.array([[length * np.sin(theta), 0.0, length * np.cos(theta)]]), length=length
    )


class TestClassicalConfig:
    def test_polarized(self):
        config = ClassicalConfig.polarized(3, 1.5)
        np.testing.assert_allclose(config.spins, [[0, 0, 1.5]] * 3)
        assert config.n_sites == 3

    def test_rejects_wrong_length(self):
        with pytest.raises(ConfigError):
            ClassicalConfig(spins=np.array([[0.0, 0.0, 2.0]]), length=1.0)
        with pytest.raises(ConfigError):
            ClassicalConfig(spins=np.zeros((2, 2)), length=1.0)


class TestRightHandSide:
    def test_precession_sense(self):
        spec = single(field_z=2.0)
        rate = ll_rhs(np.array([[1.0, 0.0, 0.0]]), spec, 0.0)
        # S x B with B along +z turns +x towards -y.
        np.testing.assert_allclose(rate, [[0.0, -2.0, 0.0]])

    def test_damping_pulls_towards_field(self):
        spec = single(field_z=1.0, damping=0.5)
        rate = ll_rhs(np.array([[1.0, 0.0, 0.0]]), spec, 0.0)
        assert rate[0, 2] == pytest.approx(0.5)

    def test_llg_rescaling(self, rng):
        spec = SystemSpec(n_sites=3, spin=HalfInteger(2), exchange=1.0, field_z=0.2, damping=0.7)
        spins = rng.normal(size=(3, 3))
        np.testing.assert_allclose(llg_rhs(spins, spec, 0.0), ll_rhs(spins, spec, 0.0) / 1.49)

    def test_rate_is_orthogonal_to_spin(self, rng):
        spec = SystemSpec(n_sites=3, spin=HalfInteger(2), exchange=1.0, field_z=0.2, damping=0.7)
        spins = rng.normal(size=(3, 3))
        rate = ll_rhs(spins, spec, 0.0)
        np.testing.assert_allclose(np.sum(rate * spins, axis=1), 0.0, atol=1e-12)


class TestIntegration:
    def test_undamped_precession_matches_rotation(self):
        spec = single(field_z=2.0)
        config0 = tilted(0.4)
        trajectory = integrate_classical(config0, spec, IntegratorConfig(dt=0.001, sample_every=100), LL, 3.0)
        s0 = config0.spins[0]
        for t, s in zip(trajectory.times, trajectory.spins[:, 0]):
            angle = 2.0 * t
            expected = [s0[0] * np.cos(angle), -s0[0] * np.sin(angle), s0[2]]
            np.testing.assert_allclose(s, expected, atol=1e-10)

    def test_lengths_are_preserved(self):
        spec = SystemSpec(
            n_sites=3, spin=HalfInteger(2), exchange=1.0, field_z=0.1, damping=0.1,
            pulse=PulseSpec(3.27, 1.0, 0.02),
        )
        trajectory = integrate_classical(
            ClassicalConfig.polarized(3, 1.0), spec, IntegratorConfig(dt=0.001, sample_every=50), LLG, 2.0
        )
        np.testing.assert_allclose(np.linalg.norm(trajectory.spins, axis=2), 1.0, atol=1e-12)

    def test_damped_spin_aligns_with_field(self):
        spec = single(field_z=-2.0, damping=0.5)
        trajectory = integrate_classical(tilted(0.3), spec, IntegratorConfig(dt=0.005), LLG, 30.0)
        np.testing.assert_allclose(trajectory.spins[-1, 0], [0.0, 0.0, -1.0], atol=1e-6)
        assert np.all(np.diff(trajectory.energies) <= 1e-12)

    def test_matches_single_spin_quantum_expectation(self):
        # A spin-coherent state under a linear Hamiltonian follows the classical equation.
        spin = HalfInteger(2)
        spec = single(field_z=-1.5, damping=0.3, spin=spin)
        theta = 0.8
        config0 = tilted(theta, length=1.0)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        psi0 = np.array([c * c, np.sqrt(2) * c * s, s * s], dtype=complex)
        cfg = IntegratorConfig(dt=0.001, sample_every=250)
        quantum = evolve_pure(psi0, spec, cfg, LLG, 5.0)
        classical = integrate_classical(config0, spec, cfg, LLG, 5.0)
        for psi, spins in zip(quantum.states, classical.spins):
            vector = site_observables(psi, 1, spin)[0].vector
            np.testing.assert_allclose(vector, spins[0], atol=1e-8)

    def test_llg_is_ll_on_rescaled_time(self):
        damping = 0.6
        spec = SystemSpec(n_sites=3, spin=HalfInteger(1), exchange=1.0, field_z=-0.8, damping=damping)
        config0 = ClassicalConfig(
            spins=0.5 * np.array([[np.sin(0.7), 0.0, np.cos(0.7)], [0.0, 0.0, 1.0], [0.0, np.sin(0.3), np.cos(0.3)]]),
            length=0.5,
        )
        factor = 1.0 + damping**2
        llg = integrate_classical(config0, spec, IntegratorConfig(dt=0.0007, sample_every=100), LLG, 2.0)
        ll = integrate_classical(
            config0, spec, IntegratorConfig(dt=0.0007 / factor, sample_every=100), LL, 2.0 / factor
        )
        assert len(ll.times) == len(llg.times)
        np.testing.assert_allclose(ll.times * factor, llg.times, rtol=1e-12)
        np.testing.assert_allclose(ll.spins, llg.spins, atol=1e-10)

    def test_undamped_chain_conserves_energy(self):
        spec = SystemSpec(n_sites=3, spin=HalfInteger(2), exchange=1.0, field_z=0.3)
        spins = np.array([[np.sin(0.5), 0.0, np.cos(0.5)], [0.0, 0.0, 1.0], [0.0, np.sin(1.1), np.cos(1.1)]])
        trajectory = integrate_classical(
            ClassicalConfig(spins=spins, length=1.0), spec, IntegratorConfig(dt=0.001, sample_every=100), LLG, 10.0
        )
        assert np.max(np.abs(trajectory.energies - trajectory.energies[0])) < 1e-9
        assert not np.allclose(trajectory.spins[-1], spins)

    def test_site_count_mismatch(self):
        with pytest.raises(ValueError):
            integrate_classical(ClassicalConfig.polarized(2, 0.5), single(), IntegratorConfig(), LLG, 1.0)


class TestStochastic:
    def test_heun_without_noise_is_second_order(self):
        spec = single(field_z=1.0, damping=0.2)
        spins = tilted(0.5).spins
        reference = spins
        for k in range(1000):
            reference = rk4_step(reference, spec, k * 1e-4, 1e-4, LLG)
        coarse = spins
        for k in range(10):
            coarse = heun_step(coarse, spec, k * 1e-2, 1e-2, LLG)
        assert np.max(np.abs(coarse - reference)) < 1e-4

    def test_zero_noise_reproduces_deterministic_run(self):
        spec = SystemSpec(n_sites=3, spin=HalfInteger(1), exchange=4.0, field_z=-2.0, damping=0.1,
                          pulse=PulseSpec(3.27, 0.5, 0.02))
        config0 = ClassicalConfig.polarized(3, 0.5)
        cfg = IntegratorConfig(dt=0.001, sample_every=100)
        plain = integrate_classical(config0, spec, cfg, LLG, 1.0)
        quiet = integrate_classical(config0, spec, cfg, LLG, 1.0, noise=NoiseSpec(0.0, seed=9))
        np.testing.assert_allclose(quiet.spins, plain.spins, atol=1e-12, rtol=0.0)

    def test_zero_noise_step_is_projected_heun(self):
        spec = single(field_z=1.0, damping=0.2)
        config = tilted(0.5, length=0.5)
        stepped = stochastic_llg_step(config, spec, NoiseSpec(0.0), 0.01)
        expected = heun_step(config.spins, spec, 0.0, 0.01, LLG)
        expected *= 0.5 / np.linalg.norm(expected)
        np.testing.assert_allclose(stepped.spins, expected, atol=1e-15)

    def test_seeded_runs_are_identical(self):
        spec = SystemSpec(n_sites=2, spin=HalfInteger(1), exchange=1.0, damping=0.1)
        config0 = ClassicalConfig.polarized(2, 0.5)
        cfg = IntegratorConfig(dt=0.01, sample_every=10)
        noise = NoiseSpec(0.01, seed=123)
        a = integrate_classical(config0, spec, cfg, LLG, 2.0, noise=noise)
        b = integrate_classical(config0, spec, cfg, LLG, 2.0, noise=noise)
        c = integrate_classical(config0, spec, cfg, LLG, 2.0, noise=noise.for_member(1))
        np.testing.assert_array_equal(a.spins, b.spins)
        assert not np.array_equal(a.spins, c.spins)
        np.testing.assert_allclose(np.linalg.norm(a.spins, axis=2), 0.5, atol=1e-12)
