"""Classical LL, LLG and stochastic LLG integration for chains of fixed-length spins."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigError, NumericalError
from .model import (
    EquationForm,
    NoiseSpec,
    SystemSpec,
    classical_effective_fields,
    classical_energy,
    sample_noise_fields,
)
from .quantum_dynamics import IntegratorConfig, check_step_size
from .spin_algebra import RealArray

logger = logging.getLogger(__name__)

LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class ClassicalConfig:
    """N classical spin vectors of common length S (units of hbar)."""

    spins: RealArray
    length: float

    def __post_init__(self) -> None:
        if self.spins.ndim != 2 or self.spins.shape[1] != 3:
            raise ConfigError(f"Classical spins must have shape (N, 3), got {self.spins.shape}")
        if not self.length > 0:
            raise ConfigError(f"Spin length must be positive, got {self.length}")
        deviation = np.max(np.abs(np.linalg.norm(self.spins, axis=1) - self.length))
        if deviation > LENGTH_TOL:
            raise ConfigError(f"Spin lengths deviate from {self.length} by {deviation:.3e}")

    @property
    def n_sites(self) -> int:
        return int(self.spins.shape[0])

    @classmethod
    def polarized(
        cls, n_sites: int, length: float, direction: Sequence[float] = (0.0, 0.0, 1.0)
    ) -> "ClassicalConfig":
        """All spins along `direction`."""
        unit = np.asarray(direction, dtype=float)
        unit = unit / np.linalg.norm(unit)
        return cls(spins=np.tile(length * unit, (n_sites, 1)), length=length)


@dataclass
class ClassicalTrajectory:
    """Sampled classical run; spins has shape (samples, N, 3)."""

    times: RealArray
    spins: RealArray
    energies: RealArray


def _renormalized(spins: RealArray, length: float) -> RealArray:
    norms = np.linalg.norm(spins, axis=1, keepdims=True)
    result: RealArray = spins * (length / norms)
    return result


def _torque(spins: RealArray, fields: RealArray, damping: float) -> RealArray:
    # Relaxation uses the unit direction so the rate is independent of |S|.
    unit = spins / np.linalg.norm(spins, axis=1, keepdims=True)
    precession = np.cross(spins, fields)
    relaxation = np.cross(spins, np.cross(unit, fields))
    result: RealArray = precession - damping * relaxation
    return result


def ll_rhs(
    spins: RealArray, spec: SystemSpec, t: float, extra_field: Optional[RealArray] = None
) -> RealArray:
    """dS/dt = S x B_eff - lambda S x (S_hat x B_eff) per site.

    Args:
        spins: Array of shape (N, 3)
        spec: System description
        t: Time (for the pulse)
        extra_field: Optional additional field of shape (N, 3), e.g. noise
    """
    fields = classical_effective_fields(spins, spec, t)
    if extra_field is not None:
        fields = fields + extra_field
    return _torque(spins, fields, spec.damping)


def llg_rhs(
    spins: RealArray, spec: SystemSpec, t: float, extra_field: Optional[RealArray] = None
) -> RealArray:
    """LL right-hand side divided by (1 + lambda^2)."""
    result: RealArray = ll_rhs(spins, spec, t, extra_field) / (1.0 + spec.damping**2)
    return result


def _rhs(
    spins: RealArray,
    spec: SystemSpec,
    t: float,
    form: EquationForm,
    extra_field: Optional[RealArray] = None,
) -> RealArray:
    result: RealArray = form.rescale(spec.damping) * ll_rhs(spins, spec, t, extra_field)
    return result


def rk4_step(spins: RealArray, spec: SystemSpec, t: float, dt: float, form: EquationForm) -> RealArray:
    k1 = _rhs(spins, spec, t, form)
    k2 = _rhs(spins + 0.5 * dt * k1, spec, t + 0.5 * dt, form)
    k3 = _rhs(spins + 0.5 * dt * k2, spec, t + 0.5 * dt, form)
    k4 = _rhs(spins + dt * k3, spec, t + dt, form)
    result: RealArray = spins + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return result


def heun_step(
    spins: RealArray,
    spec: SystemSpec,
    t: float,
    dt: float,
    form: EquationForm,
    extra_field: Optional[RealArray] = None,
) -> RealArray:
    """Predictor-corrector step; `extra_field` is used unchanged in both stages."""
    k1 = _rhs(spins, spec, t, form, extra_field)
    predicted = spins + dt * k1
    k2 = _rhs(predicted, spec, t + dt, form, extra_field)
    result: RealArray = spins + 0.5 * dt * (k1 + k2)
    return result


def stochastic_llg_step(
    config: ClassicalConfig,
    spec: SystemSpec,
    noise: NoiseSpec,
    dt: float,
    step: int = 0,
    form: EquationForm = EquationForm.LLG,
) -> ClassicalConfig:
    """One Heun step of the stochastic LLG equation.

    The noise field for step `step` is sampled once and enters both stages;
    the spins are projected back to length S afterwards.
    """
    fields = sample_noise_fields(noise, config.n_sites, dt, step)
    stepped = heun_step(config.spins, spec, step * dt, dt, form, extra_field=fields)
    return ClassicalConfig(spins=_renormalized(stepped, config.length), length=config.length)


def _field_bound(spec: SystemSpec, length: float) -> float:
    bound = 2.0 * abs(spec.exchange) * length + abs(spec.field_z)
    if spec.pulse is not None:
        bound += abs(spec.pulse.amplitude)
    return bound * (1.0 + spec.damping)


def integrate_classical(
    config0: ClassicalConfig,
    spec: SystemSpec,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    noise: Optional[NoiseSpec] = None,
) -> ClassicalTrajectory:
    """Integrate the classical chain; RK4 when deterministic, Heun with noise.

    Every step ends with a projection of each spin back to length S.

    Raises:
        ConfigError: If the step size is too large
        NumericalError: If the spins stop being finite
    """
    if config0.n_sites != spec.n_sites:
        raise ValueError(f"Configuration has {config0.n_sites} spins, system has {spec.n_sites}")
    n_steps, h = cfg.time_grid(t_end)
    check_step_size(h * form.rescale(spec.damping), _field_bound(spec, config0.length))
    stochastic = noise is not None and noise.strength > 0.0

    spins = np.array(config0.spins, dtype=float)
    times: List[float] = [0.0]
    samples: List[RealArray] = [spins.copy()]
    energies: List[float] = [classical_energy(spins, spec, 0.0)]

    logger.debug(
        f"Classical run: N={spec.n_sites}, steps={n_steps}, h={h:g}, form={form.value}, "
        f"stochastic={stochastic}"
    )
    for k in range(n_steps):
        t = k * h
        if stochastic and noise is not None:
            fields = sample_noise_fields(noise, spec.n_sites, h, k)
            spins = heun_step(spins, spec, t, h, form, extra_field=fields)
        else:
            spins = rk4_step(spins, spec, t, h, form)
        if not np.all(np.isfinite(spins)):
            raise NumericalError(f"Non-finite classical spins at step {k + 1} (t={t + h:.6g})")
        spins = _renormalized(spins, config0.length)
        if cfg.is_sample(k + 1, n_steps):
            times.append((k + 1) * h)
            samples.append(spins.copy())
            energies.append(classical_energy(spins, spec, (k + 1) * h))

    return ClassicalTrajectory(
        times=np.array(times), spins=np.array(samples), energies=np.array(energies)
    )
