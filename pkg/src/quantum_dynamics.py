"""Norm-conserving damped Schroedinger and Liouville propagation.

The damped flow is i dpsi/dt = (H - i lambda [H - <H>]) psi; the LLG form
divides the right-hand side by (1 + lambda^2). All integrators are
fixed-step classical Runge-Kutta 4 on a uniform grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericalError
from .model import (
    EquationForm,
    NoiseSpec,
    SystemSpec,
    build_hamiltonian,
    check_dimension,
    noise_hamiltonian,
    sample_noise_fields,
    static_hamiltonian,
)
from .spin_algebra import ComplexMatrix, RealArray

logger = logging.getLogger(__name__)

StateVector = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]
StateObserver = Callable[[float, StateVector], None]
HamiltonianFn = Callable[[float], ComplexMatrix]
StepTermFn = Callable[[int, float], ComplexMatrix]

STEP_WARN_RATIO = 0.05
STEP_MAX_RATIO = 0.5
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100
LIOUVILLE_VARIANTS = ("commutator", "anticommutator")


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    Attributes:
        dt: Maximum step; the run uses t_end / ceil(t_end / dt)
        renormalize_each_step: Divide the state by its norm after each step
        sample_every: Record every n-th step (the final step is always kept)
    """

    dt: float = 0.001
    renormalize_each_step: bool = True
    sample_every: int = 1

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"Time step must be positive, got {self.dt}")
        if self.sample_every < 1:
            raise ConfigError(f"sample_every must be >= 1, got {self.sample_every}")

    def time_grid(self, t_end: float) -> Tuple[int, float]:
        """Number of steps and the uniform step size covering [0, t_end]."""
        if not t_end > 0:
            raise ConfigError(f"t_end must be positive, got {t_end}")
        n_steps = max(1, int(np.ceil(t_end / self.dt - 1e-9)))
        return n_steps, t_end / n_steps

    def is_sample(self, step: int, n_steps: int) -> bool:
        return step % self.sample_every == 0 or step == n_steps


@dataclass
class StateTrajectory:
    """Sampled pure-state run."""

    times: RealArray
    states: NDArray[np.complex128]
    energies: RealArray
    norms: RealArray


@dataclass
class DensityTrajectory:
    """Sampled density-matrix run."""

    times: RealArray
    densities: NDArray[np.complex128]
    energies: RealArray
    iterations: List[int] = field(default_factory=list)
    trace_defects: List[float] = field(default_factory=list)


def spectral_radius_estimate(h: ComplexMatrix) -> float:
    """Cheap upper bound on the spectral radius: the max absolute row sum."""
    return float(np.max(np.sum(np.abs(h), axis=1)))


def check_step_size(dt: float, radius: float) -> None:
    """Enforce dt * radius <= 0.5, warn above 0.05.

    Raises:
        ConfigError: If the step is too large for RK4
    """
    ratio = dt * radius
    if ratio > STEP_MAX_RATIO:
        raise ConfigError(
            f"Step size {dt:g} too large: dt * |H| = {ratio:.3g} exceeds {STEP_MAX_RATIO}"
        )
    if ratio > STEP_WARN_RATIO:
        logger.warning(f"Step size {dt:g} gives dt * |H| = {ratio:.3g} (> {STEP_WARN_RATIO})")


def _rk4_step(
    rhs: Callable[[float, NDArray[np.complex128]], NDArray[np.complex128]],
    t: float,
    y: NDArray[np.complex128],
    h: float,
) -> NDArray[np.complex128]:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    result: NDArray[np.complex128] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return result


def _check_square(h: ComplexMatrix, dim: int) -> None:
    if h.shape != (dim, dim):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match state dimension {dim}")


def energy_expectation(psi: StateVector, h: ComplexMatrix) -> float:
    """<psi|H|psi> / <psi|psi>."""
    return float(np.real(np.vdot(psi, h @ psi)) / np.real(np.vdot(psi, psi)))


def tdse_rhs_ll(psi: StateVector, h: ComplexMatrix, damping: float) -> StateVector:
    """dpsi/dt = -i H psi - lambda (H - <H>) psi.

    <H> is taken relative to the current norm so the norm derivative is
    exactly zero even for intermediate Runge-Kutta stages.

    Raises:
        ValueError: On a dimension mismatch
    """
    _check_square(h, psi.shape[0])
    h_psi = h @ psi
    mean = np.real(np.vdot(psi, h_psi)) / np.real(np.vdot(psi, psi))
    result: StateVector = -1j * h_psi - damping * (h_psi - mean * psi)
    return result


def tdse_rhs_llg(psi: StateVector, h: ComplexMatrix, damping: float) -> StateVector:
    """LL right-hand side divided by (1 + lambda^2)."""
    result: StateVector = tdse_rhs_ll(psi, h, damping) / (1.0 + damping * damping)
    return result


def _normalized(psi: StateVector) -> StateVector:
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm == 0.0:
        raise NumericalError(f"Cannot normalize state with norm {norm}")
    result: StateVector = psi / norm
    return result


def _hamiltonian_bound(spec: SystemSpec) -> float:
    radius = spectral_radius_estimate(static_hamiltonian(spec))
    if spec.pulse is not None:
        radius += abs(spec.pulse.amplitude) * spec.spin.value
    return radius * (1.0 + spec.damping)


def propagate_state(
    psi0: StateVector,
    hamiltonian_at: HamiltonianFn,
    damping: float,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    observers: Sequence[StateObserver] = (),
    step_term: Optional[StepTermFn] = None,
    radius: Optional[float] = None,
) -> StateTrajectory:
    """RK4 integration of the damped Schroedinger equation for any H(t).

    Args:
        psi0: Initial state (normalized on entry)
        hamiltonian_at: H as a function of time, evaluated at every stage
        damping: lambda
        cfg: Integrator settings
        form: LL or LLG time scale
        t_end: Final time
        observers: Callbacks invoked with (t, psi) at every sample
        step_term: Optional extra Hamiltonian held fixed over a step, called
            with (step index, step size)
        radius: Spectral-radius bound of H; estimated from H(0) if omitted

    Returns:
        StateTrajectory sampled every `cfg.sample_every` steps

    Raises:
        ConfigError: If the step size is too large
        NumericalError: If the state stops being finite
    """
    n_steps, h = cfg.time_grid(t_end)
    scale = form.rescale(damping)
    if radius is None:
        radius = spectral_radius_estimate(hamiltonian_at(0.0)) * (1.0 + damping)
    check_step_size(h * scale, radius)

    psi = _normalized(np.asarray(psi0, dtype=complex))
    times: List[float] = []
    states: List[StateVector] = []
    energies: List[float] = []
    norms: List[float] = []

    def record(t: float, state: StateVector) -> None:
        times.append(t)
        states.append(state.copy())
        energies.append(energy_expectation(state, hamiltonian_at(t)))
        norms.append(float(np.real(np.vdot(state, state))))
        for observer in observers:
            observer(t, state)

    logger.debug(
        f"Pure-state run: dim={psi.shape[0]}, steps={n_steps}, h={h:g}, form={form.value}"
    )
    record(0.0, psi)
    for k in range(n_steps):
        t = k * h
        extra = step_term(k, h) if step_term is not None else None

        def rhs(s: float, y: StateVector) -> StateVector:
            ham = hamiltonian_at(s)
            if extra is not None:
                ham = ham + extra
            result: StateVector = scale * tdse_rhs_ll(y, ham, damping)
            return result

        psi = _rk4_step(rhs, t, psi, h)
        if not np.all(np.isfinite(psi)):
            raise NumericalError(f"Non-finite amplitudes at step {k + 1} (t={t + h:.6g})")
        if cfg.renormalize_each_step:
            psi = _normalized(psi)
        if cfg.is_sample(k + 1, n_steps):
            record((k + 1) * h, psi)

    return StateTrajectory(
        times=np.array(times),
        states=np.array(states),
        energies=np.array(energies),
        norms=np.array(norms),
    )


def evolve_pure(
    psi0: StateVector,
    spec: SystemSpec,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    observers: Sequence[StateObserver] = (),
    noise: Optional[NoiseSpec] = None,
) -> StateTrajectory:
    """Propagate a pure state of the spin chain under the damped Schroedinger equation.

    The Hamiltonian is rebuilt at every RK4 stage time so the pulse is
    resolved; a stochastic field (if given) adds -Sum xi_n.S_n held fixed
    over each step.

    Raises:
        DimensionError: If the Hilbert space is too large
        ConfigError: If the step size is too large
        NumericalError: If the state stops being finite
    """
    check_dimension(spec)
    if psi0.shape != (spec.dimension,):
        raise ValueError(f"State shape {psi0.shape} does not match dimension {spec.dimension}")

    step_term: Optional[StepTermFn] = None
    if noise is not None and noise.strength > 0.0:
        active = noise

        def noise_term(k: int, h: float) -> ComplexMatrix:
            return noise_hamiltonian(spec, sample_noise_fields(active, spec.n_sites, h, k))

        step_term = noise_term

    return propagate_state(
        psi0,
        lambda t: build_hamiltonian(spec, t),
        spec.damping,
        cfg,
        form,
        t_end,
        observers=observers,
        step_term=step_term,
        radius=_hamiltonian_bound(spec),
    )


def _hermitian_eigh(h: ComplexMatrix) -> Tuple[RealArray, ComplexMatrix]:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {h.shape}")
    if not np.allclose(h, h.conj().T, atol=1e-12, rtol=0.0):
        raise ValueError("Hamiltonian is not Hermitian")
    w, v = np.linalg.eigh(h)
    return w, v


def closed_form_propagate(
    psi0: StateVector,
    h: ComplexMatrix,
    damping: float,
    t: float,
    form: EquationForm = EquationForm.LL,
) -> StateVector:
    """Exact solution exp(-iHt) exp(-lambda H t) psi0 / norm for static H.

    Raises:
        ValueError: If H is not Hermitian or does not match psi0
    """
    w, v = _hermitian_eigh(h)
    _check_square(h, psi0.shape[0])
    tau = t * form.rescale(damping)
    coeffs = v.conj().T @ psi0
    # Shift by the lowest level so the damping factor never overflows.
    coeffs = coeffs * np.exp(-1j * w * tau - damping * (w - w[0]) * tau)
    return _normalized(v @ coeffs)


def liouville_rhs(
    rho: DensityMatrix, h: ComplexMatrix, damping: float, variant: str = "commutator"
) -> DensityMatrix:
    """drho/dt = i[rho, H] - lambda [rho, [rho, H]].

    The "anticommutator" variant evaluates i[rho, H] - lambda({rho, H} - 2 rho H rho),
    which coincides with the commutator form for pure rho.

    Raises:
        ValueError: On a dimension mismatch or an unknown variant
    """
    _check_square(h, rho.shape[0])
    if rho.shape != h.shape:
        raise ValueError(f"Density shape {rho.shape} does not match Hamiltonian {h.shape}")
    rho_h = rho @ h
    h_rho = h @ rho
    comm = rho_h - h_rho
    if variant == "commutator":
        damping_term = rho @ comm - comm @ rho
    elif variant == "anticommutator":
        damping_term = rho_h + h_rho - 2.0 * rho_h @ rho
    else:
        raise ValueError(f"Unknown Liouville variant {variant!r}; use one of {LIOUVILLE_VARIANTS}")
    result: DensityMatrix = 1j * comm - damping * damping_term
    return result


def _hermitize(rho: DensityMatrix) -> DensityMatrix:
    result: DensityMatrix = 0.5 * (rho + rho.conj().T)
    return result


def _unit_trace(rho: DensityMatrix) -> DensityMatrix:
    trace = np.real(np.trace(rho))
    if not np.isfinite(trace) or trace <= 0.0:
        raise NumericalError(f"Density matrix lost its trace ({trace})")
    result: DensityMatrix = rho / trace
    return result


def propagate_density(
    rho0: DensityMatrix,
    hamiltonian_at: HamiltonianFn,
    damping: float,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    variant: str = "commutator",
    radius: Optional[float] = None,
) -> DensityTrajectory:
    """RK4 integration of the nonlinear Liouville equation for any H(t).

    Raises:
        ConfigError: If the step size is too large
        NumericalError: If the density stops being finite
    """
    n_steps, h = cfg.time_grid(t_end)
    scale = form.rescale(damping)
    if radius is None:
        radius = spectral_radius_estimate(hamiltonian_at(0.0)) * (1.0 + damping)
    check_step_size(h * scale, radius)

    rho = _unit_trace(_hermitize(np.asarray(rho0, dtype=complex)))
    times = [0.0]
    densities = [rho.copy()]
    energies = [float(np.real(np.trace(rho @ hamiltonian_at(0.0))))]

    def rhs(s: float, y: DensityMatrix) -> DensityMatrix:
        result: DensityMatrix = scale * liouville_rhs(y, hamiltonian_at(s), damping, variant)
        return result

    for k in range(n_steps):
        rho = _rk4_step(rhs, k * h, rho, h)
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"Non-finite density at step {k + 1}")
        rho = _hermitize(rho)
        if cfg.renormalize_each_step:
            rho = _unit_trace(rho)
        if cfg.is_sample(k + 1, n_steps):
            t = (k + 1) * h
            times.append(t)
            densities.append(rho.copy())
            energies.append(float(np.real(np.trace(rho @ hamiltonian_at(t)))))

    return DensityTrajectory(
        times=np.array(times), densities=np.array(densities), energies=np.array(energies)
    )


def evolve_liouville(
    rho0: DensityMatrix,
    spec: SystemSpec,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    variant: str = "commutator",
) -> DensityTrajectory:
    """Integrate the nonlinear Liouville equation for the spin chain."""
    check_dimension(spec)
    if rho0.shape != (spec.dimension, spec.dimension):
        raise ValueError(f"Density shape {rho0.shape} does not match dimension {spec.dimension}")
    return propagate_density(
        rho0,
        lambda t: build_hamiltonian(spec, t),
        spec.damping,
        cfg,
        form,
        t_end,
        variant=variant,
        radius=_hamiltonian_bound(spec),
    )


def expectation_rhs_check(
    psi: StateVector, op: ComplexMatrix, h: ComplexMatrix, damping: float
) -> float:
    """Residual between d<op>/dt from the state flow and the expectation-value equation.

    d<A>/dt = -i<[A, H]> - lambda(<{A, H}> - 2 <H><A>) for Hermitian A.
    """
    psi = _normalized(psi)
    dpsi = tdse_rhs_ll(psi, h, damping)
    from_state = 2.0 * np.real(np.vdot(psi, op @ dpsi))

    def mean(x: ComplexMatrix) -> complex:
        return complex(np.vdot(psi, x @ psi))

    e_h = mean(h)
    e_op = mean(op)
    comm = op @ h - h @ op
    anti = op @ h + h @ op
    from_moments = -1j * mean(comm) - damping * (mean(anti) - 2.0 * e_h * e_op)
    return float(abs(from_state - from_moments))


def thermal_state(h: ComplexMatrix, beta: float) -> DensityMatrix:
    """Statistical operator exp(-beta H) / Tr exp(-beta H)."""
    w, v = _hermitian_eigh(h)
    weights = np.exp(-beta * (w - w[0]))
    weights /= np.sum(weights)
    rho: DensityMatrix = (v * weights) @ v.conj().T
    return _hermitize(rho)


def _energy_scale(damping: float, energy: float, tau: float, step: int) -> float:
    """Scalar factor exp(2 lambda <H> tau) that U carries into the trace."""
    try:
        return math.exp(2.0 * damping * energy * tau)
    except OverflowError as e:
        raise NumericalError(f"Self-consistent energy diverged at step {step}") from e


def evolve_statistical(
    rho0: DensityMatrix,
    h: ComplexMatrix,
    damping: float,
    cfg: IntegratorConfig,
    t_end: float,
    form: EquationForm = EquationForm.LL,
) -> DensityTrajectory:
    """Step rho -> U rho U^+ with U(dt) = exp(-iH dt) exp(-lambda H dt) exp(lambda <H> dt).

    <H> inside U is the mean of the energies before and after the step, and
    the energy after the step depends on <H> through the scalar factor of U,
    so it is iterated to a fixed point (energies measured from the ground
    level). The step is then renormalized to unit trace; the iteration count
    and the trace defect |Tr(U rho U^+) - 1| of the converged step are kept.

    Raises:
        NumericalError: If the fixed point does not converge
    """
    w, v = _hermitian_eigh(h)
    if rho0.shape != h.shape:
        raise ValueError(f"Density shape {rho0.shape} does not match Hamiltonian {h.shape}")
    n_steps, step = cfg.time_grid(t_end)
    tau = step * form.rescale(damping)
    offset = float(w[0])
    # Ground level shifted to zero; the <H> factor is applied as a scalar below.
    step_op = (v * np.exp(-(1j + damping) * (w - offset) * tau)) @ v.conj().T

    rho = _unit_trace(_hermitize(np.asarray(rho0, dtype=complex)))
    times = [0.0]
    densities = [rho.copy()]
    energies = [float(np.real(np.trace(rho @ h)))]
    iterations: List[int] = []
    trace_defects: List[float] = []

    for k in range(n_steps):
        e_start = float(np.real(np.trace(rho @ h))) - offset
        propagated = step_op @ rho @ step_op.conj().T
        raw_trace = float(np.real(np.trace(propagated)))
        raw_energy = float(np.real(np.trace(propagated @ h))) - offset * raw_trace

        e_mid = e_start
        for iteration in range(1, FIXED_POINT_MAX_ITER + 1):
            scale = _energy_scale(damping, e_mid, tau, k + 1)
            e_next = 0.5 * (e_start + scale * raw_energy)
            converged = abs(e_next - e_mid) < FIXED_POINT_TOL * max(1.0, abs(e_next))
            e_mid = e_next
            if converged:
                break
        else:
            raise NumericalError(
                f"Self-consistent energy did not converge at step {k + 1} "
                f"after {FIXED_POINT_MAX_ITER} iterations"
            )
        iterations.append(iteration)
        trace_defects.append(abs(_energy_scale(damping, e_mid, tau, k + 1) * raw_trace - 1.0))
        rho = _unit_trace(_hermitize(propagated))
        if cfg.is_sample(k + 1, n_steps):
            times.append((k + 1) * step)
            densities.append(rho.copy())
            energies.append(float(np.real(np.trace(rho @ h))))

    logger.debug(
        f"Statistical run: {n_steps} steps, up to {max(iterations, default=0)} fixed-point "
        f"iterations, max trace defect {max(trace_defects, default=0.0):.3e}"
    )
    return DensityTrajectory(
        times=np.array(times),
        densities=np.array(densities),
        energies=np.array(energies),
        iterations=iterations,
        trace_defects=trace_defects,
    )
