"""Experiment description and assembly of quantum Hamiltonians and classical fields."""

import enum
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, DimensionError
from .spin_algebra import (
    ComplexMatrix,
    HalfInteger,
    RealArray,
    build_spin_matrices,
    embed_site_operator,
    site_spin_operators,
)

logger = logging.getLogger(__name__)

# Dense propagation limit: N * log2(2S+1) bits of Hilbert space.
MAX_HILBERT_BITS = 24.0

NOISE_SCHEME = "piecewise-constant"


class EquationForm(str, enum.Enum):
    """Landau-Lifshitz or Landau-Lifshitz-Gilbert time scale."""

    LL = "ll"
    LLG = "llg"

    def rescale(self, damping: float) -> float:
        """Prefactor applied to the right-hand side: 1 or 1/(1+lambda^2)."""
        if self is EquationForm.LLG:
            return 1.0 / (1.0 + damping * damping)
        return 1.0


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian field pulse along x acting on one site.

    Attributes:
        amplitude: Peak field B0x with the moment absorbed (energy units)
        center: Peak time t0
        width: Gaussian width T_W
        target_site: 1-based site the pulse acts on
    """

    amplitude: float
    center: float
    width: float
    target_site: int = 1

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ConfigError(f"Pulse width must be positive, got {self.width}")
        if self.target_site < 1:
            raise ConfigError(f"Pulse target site must be >= 1, got {self.target_site}")


@dataclass(frozen=True)
class SystemSpec:
    """Spin chain, couplings, fields and damping of one experiment."""

    n_sites: int
    spin: HalfInteger
    exchange: float = 0.0
    field_z: float = 0.0
    pulse: Optional[PulseSpec] = None
    damping: float = 0.0
    open_chain: bool = True

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ConfigError(f"Need at least one site, got N={self.n_sites}")
        if self.spin.twice_value < 1:
            raise ConfigError("Spin must be at least 1/2")
        if not self.damping >= 0:
            raise ConfigError(f"Damping must be non-negative, got {self.damping}")
        if not self.open_chain:
            raise ConfigError("Only open chains are supported")
        if self.pulse is not None and self.pulse.target_site > self.n_sites:
            raise ConfigError(
                f"Pulse targets site {self.pulse.target_site} of a {self.n_sites}-site chain"
            )

    @property
    def dim_site(self) -> int:
        return self.spin.dimension

    @property
    def dimension(self) -> int:
        """Full Hilbert space dimension (2S+1)^N."""
        return int(self.dim_site**self.n_sites)

    @property
    def hilbert_bits(self) -> float:
        return self.n_sites * math.log2(self.dim_site)

    def without_pulse(self) -> "SystemSpec":
        return replace(self, pulse=None)


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise field of strength D, <xi xi'> = D delta(t - t').

    Attributes:
        strength: D (energy^2 * time)
        seed: 64-bit seed of the counter-based stream
        stream: Independent sub-stream index (ensemble member)
        scheme: Time discretization of the white noise
    """

    strength: float = 0.0
    seed: int = 0
    stream: int = 0
    scheme: str = NOISE_SCHEME

    def __post_init__(self) -> None:
        if not self.strength >= 0:
            raise ConfigError(f"Noise strength must be non-negative, got {self.strength}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"Seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.stream < 0:
            raise ConfigError(f"Noise stream must be non-negative, got {self.stream}")
        if self.scheme != NOISE_SCHEME:
            raise ConfigError(f"Unsupported noise scheme {self.scheme!r}")

    def for_member(self, member: int) -> "NoiseSpec":
        return replace(self, stream=member)


def pulse_amplitude(t: float, pulse: PulseSpec) -> float:
    """Gaussian pulse B0x exp(-1/2 ((t - t0)/T_W)^2)."""
    x = (t - pulse.center) / pulse.width
    return pulse.amplitude * math.exp(-0.5 * x * x)


def check_dimension(spec: SystemSpec) -> None:
    """Reject Hilbert spaces too large for dense matrices.

    Raises:
        DimensionError: If N log2(2S+1) exceeds MAX_HILBERT_BITS
    """
    if spec.hilbert_bits > MAX_HILBERT_BITS:
        raise DimensionError(
            f"Hilbert space of {spec.n_sites} spin-{spec.spin} sites has dimension "
            f"{spec.dim_site}^{spec.n_sites} (> 2^{MAX_HILBERT_BITS:g})"
        )


@lru_cache(maxsize=16)
def _static_hamiltonian(
    n_sites: int, twice_spin: int, exchange: float, field_z: float
) -> ComplexMatrix:
    spin = HalfInteger(twice_spin)
    ops = site_spin_operators(n_sites, spin)
    dim = spin.dimension**n_sites
    logger.debug(f"Assembling static Hamiltonian: N={n_sites}, S={spin}, dim={dim}")

    h = np.zeros((dim, dim), dtype=complex)
    for n in range(n_sites - 1):
        for axis in range(3):
            h -= exchange * (ops[n][axis] @ ops[n + 1][axis])
    for n in range(n_sites):
        h -= field_z * ops[n][2]
    h = 0.5 * (h + h.conj().T)
    h.setflags(write=False)
    return h


def static_hamiltonian(spec: SystemSpec) -> ComplexMatrix:
    """Exchange and static Zeeman part of H, cached per (N, S, J, Bz)."""
    check_dimension(spec)
    return _static_hamiltonian(spec.n_sites, spec.spin.twice_value, spec.exchange, spec.field_z)


def pulse_operator(spec: SystemSpec) -> ComplexMatrix:
    """Operator multiplying Bx(t): -S^x on the pulsed site."""
    check_dimension(spec)
    site = spec.pulse.target_site if spec.pulse is not None else 1
    ops = site_spin_operators(spec.n_sites, spec.spin)
    result: ComplexMatrix = -ops[site - 1][0]
    return result


def build_hamiltonian(spec: SystemSpec, t: float) -> ComplexMatrix:
    """Heisenberg chain Hamiltonian at time t.

    H = -J Sum S_n.S_{n+1} - Bz Sum S_n^z - Bx(t) S_target^x

    Args:
        spec: System description
        t: Time at which the pulse is evaluated

    Returns:
        Hermitian matrix of dimension (2S+1)^N; the cached read-only static
        part when there is no pulse

    Raises:
        DimensionError: If the Hilbert space is too large
    """
    static = static_hamiltonian(spec)
    if spec.pulse is None:
        return static
    amplitude = pulse_amplitude(t, spec.pulse)
    if amplitude == 0.0:
        return static
    return static + amplitude * pulse_operator(spec)


def noise_hamiltonian(spec: SystemSpec, fields: RealArray) -> ComplexMatrix:
    """Stochastic field term H_xi = -Sum_n xi_n . S_n for fields of shape (N, 3)."""
    ops = site_spin_operators(spec.n_sites, spec.spin)
    h = np.zeros((spec.dimension, spec.dimension), dtype=complex)
    for n in range(spec.n_sites):
        for axis in range(3):
            if fields[n, axis] != 0.0:
                h -= fields[n, axis] * ops[n][axis]
    return h


def single_site_hamiltonian(field: RealArray, spin: HalfInteger) -> ComplexMatrix:
    """Zeeman operator -B.S of one site, used by analytic checks."""
    matrices = build_spin_matrices(spin)
    h = -sum(field[a] * matrices.components[a] for a in range(3))
    return embed_site_operator(1, 1, np.asarray(h, dtype=complex), matrices.dim)


def classical_effective_fields(spins: RealArray, spec: SystemSpec, t: float) -> RealArray:
    """Effective field -dE/dS_n for every site; shape (N, 3), energy units."""
    if spins.shape != (spec.n_sites, 3):
        raise ValueError(f"Expected spins of shape ({spec.n_sites}, 3), got {spins.shape}")
    fields = np.zeros_like(spins, dtype=float)
    if spec.n_sites > 1 and spec.exchange != 0.0:
        fields[1:] += spec.exchange * spins[:-1]
        fields[:-1] += spec.exchange * spins[1:]
    fields[:, 2] += spec.field_z
    if spec.pulse is not None:
        fields[spec.pulse.target_site - 1, 0] += pulse_amplitude(t, spec.pulse)
    return fields


def classical_effective_field(spins: RealArray, spec: SystemSpec, site: int, t: float) -> RealArray:
    """Effective field on one 1-based site.

    Raises:
        ValueError: If the site is out of range
    """
    if not 1 <= site <= spec.n_sites:
        raise ValueError(f"Site {site} out of range 1..{spec.n_sites}")
    field: RealArray = classical_effective_fields(spins, spec, t)[site - 1]
    return field


def classical_energy(spins: RealArray, spec: SystemSpec, t: float) -> float:
    """E = -J Sum S_n.S_{n+1} - Bz Sum S_n^z - Bx(t) S_target^x."""
    energy = -spec.exchange * float(np.sum(spins[:-1] * spins[1:]))
    energy -= spec.field_z * float(np.sum(spins[:, 2]))
    if spec.pulse is not None:
        energy -= pulse_amplitude(t, spec.pulse) * float(spins[spec.pulse.target_site - 1, 0])
    return energy


def _noise_generator(noise: NoiseSpec, step: int) -> np.random.Generator:
    # Philox is counter based: the key selects (seed, stream), the second
    # counter word selects the step, so any step can be drawn independently.
    bit_generator = np.random.Philox(
        key=np.array([noise.seed, noise.stream], dtype=np.uint64),
        counter=np.array([0, step, 0, 0], dtype=np.uint64),
    )
    return np.random.Generator(bit_generator)


def sample_noise_fields(noise: NoiseSpec, n_sites: int, dt: float, step: int = 0) -> RealArray:
    """Gaussian field held constant over integrator step `step`.

    Components are independent with zero mean and variance D/dt; the draw is
    a pure function of (seed, stream, step), ordered by (site, component).

    Returns:
        Array of shape (N, 3)
    """
    if not dt > 0:
        raise ValueError(f"Time step must be positive, got {dt}")
    if noise.strength == 0.0:
        return np.zeros((n_sites, 3))
    sigma = math.sqrt(noise.strength / dt)
    samples: RealArray = sigma * _noise_generator(noise, step).standard_normal((n_sites, 3))
    return samples
