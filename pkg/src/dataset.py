"""Trajectory datasets: the observables a scenario run emits."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
from numpy.typing import NDArray

from .classical_dynamics import ClassicalTrajectory
from .ensemble import EnsembleResult
from .errors import NumericalError
from .model import SystemSpec
from .observables import (
    basis_labels,
    basis_occupations,
    magnetization_class_labels,
    magnetization_classes,
    site_observables,
)
from .quantum_dynamics import StateTrajectory
from .spin_algebra import HalfInteger, RealArray

logger = logging.getLogger(__name__)

NORM_TOL = 1e-9
LENGTH_TOL = 1e-9
PROBABILITY_TOL = 1e-9

QUANTUM = "quantum"
CLASSICAL = "classical"
QUANTUM_ENSEMBLE = "quantum-ensemble"
CLASSICAL_ENSEMBLE = "classical-ensemble"


@dataclass
class TrajectoryDataset:
    """Sampled observables of one run.

    Attributes:
        kind: quantum, classical, quantum-ensemble or classical-ensemble
        spin: Spin quantum number used for normalization
        times: Sample times, shape (T,)
        spins: Spin vectors (units of hbar), shape (T, N, 3)
        energies: <H> or classical energy, shape (T,)
        norms: <psi|psi> (quantum only)
        entropies: Site entropies in bits, shape (T, N) (quantum only)
        occupations: Basis-state label -> probabilities over time
        magnetization: Total-m class label -> probabilities over time
        spin_std: Ensemble standard deviation of the spin vectors
        states: Sampled state vectors (quantum only)
        metadata: Full run description for the sidecar file
    """

    kind: str
    spin: HalfInteger
    times: RealArray
    spins: RealArray
    energies: RealArray
    norms: Optional[RealArray] = None
    entropies: Optional[RealArray] = None
    occupations: Dict[str, RealArray] = field(default_factory=dict)
    magnetization: Dict[str, RealArray] = field(default_factory=dict)
    spin_std: Optional[RealArray] = None
    states: Optional[NDArray[np.complex128]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return int(self.spins.shape[1])

    @property
    def lengths(self) -> RealArray:
        result: RealArray = np.linalg.norm(self.spins, axis=2)
        return result

    @property
    def normalized(self) -> RealArray:
        result: RealArray = self.spins / self.spin.value
        return result

    @property
    def columns(self) -> List[str]:
        cols = ["t", "site", "sx", "sy", "sz", "length", "sx_norm", "sy_norm", "sz_norm", "length_norm"]
        if self.spin_std is not None:
            cols += ["sx_std", "sy_std", "sz_std"]
        if self.entropies is not None:
            cols.append("entropy")
        if self.norms is not None:
            cols.append("norm")
        cols.append("energy")
        if self.entropies is not None:
            cols.append("entropy1")
        cols += [f"occ_{label}" for label in self.occupations]
        cols += [f"occM_{label}" for label in self.magnetization]
        return cols

    def rows(self) -> Iterator[Dict[str, float]]:
        """Long-format rows, one per (time, site)."""
        lengths = self.lengths
        scale = self.spin.value
        for i, t in enumerate(self.times):
            shared: Dict[str, float] = {}
            if self.norms is not None:
                shared["norm"] = float(self.norms[i])
            shared["energy"] = float(self.energies[i])
            if self.entropies is not None:
                shared["entropy1"] = float(self.entropies[i, 0])
            for label, values in self.occupations.items():
                shared[f"occ_{label}"] = float(values[i])
            for label, values in self.magnetization.items():
                shared[f"occM_{label}"] = float(values[i])

            for n in range(self.n_sites):
                sx, sy, sz = (float(v) for v in self.spins[i, n])
                row: Dict[str, float] = {
                    "t": float(t),
                    "site": n + 1,
                    "sx": sx,
                    "sy": sy,
                    "sz": sz,
                    "length": float(lengths[i, n]),
                    "sx_norm": sx / scale,
                    "sy_norm": sy / scale,
                    "sz_norm": sz / scale,
                    "length_norm": float(lengths[i, n]) / scale,
                }
                if self.spin_std is not None:
                    for axis, name in enumerate(("sx_std", "sy_std", "sz_std")):
                        row[name] = float(self.spin_std[i, n, axis])
                if self.entropies is not None:
                    row["entropy"] = float(self.entropies[i, n])
                row.update(shared)
                yield row

    def validate(self) -> None:
        """Check the row invariants of every sample.

        Raises:
            NumericalError: On the first violated invariant
        """
        if np.any(np.diff(self.times) <= 0.0):
            raise NumericalError("Sample times are not strictly increasing")
        if not np.all(np.isfinite(self.spins)) or not np.all(np.isfinite(self.energies)):
            raise NumericalError("Dataset contains non-finite values")

        lengths = self.lengths
        s = self.spin.value
        if self.kind == CLASSICAL:
            worst = float(np.max(np.abs(lengths - s)))
            if worst > LENGTH_TOL:
                raise NumericalError(f"Classical spin length deviates from S by {worst:.3e}")
        elif np.max(lengths) > s + LENGTH_TOL:
            raise NumericalError(f"Spin length {np.max(lengths):.12g} exceeds S={s}")

        if self.norms is not None:
            worst = float(np.max(np.abs(self.norms - 1.0)))
            if worst > NORM_TOL:
                raise NumericalError(f"State norm drifted by {worst:.3e}")
        if self.entropies is not None:
            upper = math.log2(self.spin.dimension) + 1e-9
            if np.min(self.entropies) < 0.0 or np.max(self.entropies) > upper:
                raise NumericalError("Site entropy outside [0, log2(2S+1)]")
        if self.occupations:
            totals = np.sum(np.array(list(self.occupations.values())), axis=0)
            worst = float(np.max(np.abs(totals - 1.0)))
            if worst > PROBABILITY_TOL:
                raise NumericalError(f"Occupation probabilities sum to 1 only within {worst:.3e}")


def quantum_dataset(
    trajectory: StateTrajectory, spec: SystemSpec, metadata: Optional[Dict[str, Any]] = None
) -> TrajectoryDataset:
    """Evaluate site observables, entropies and occupations at every sample."""
    n_samples = len(trajectory.times)
    spins = np.zeros((n_samples, spec.n_sites, 3))
    entropies = np.zeros((n_samples, spec.n_sites))
    labels = basis_labels(spec.n_sites, spec.spin)
    classes = magnetization_class_labels(spec.n_sites, spec.spin)
    occupations = {label: np.zeros(n_samples) for label in labels}
    magnetization = {label: np.zeros(n_samples) for label in classes}

    for i, psi in enumerate(trajectory.states):
        for n, site in enumerate(site_observables(psi, spec.n_sites, spec.spin)):
            spins[i, n] = site.vector
            entropies[i, n] = site.entropy
        for label, p in basis_occupations(psi, spec.n_sites, spec.spin).items():
            occupations[label][i] = p
        for label, p in magnetization_classes(psi, spec.n_sites, spec.spin).items():
            magnetization[label][i] = p

    return TrajectoryDataset(
        kind=QUANTUM,
        spin=spec.spin,
        times=trajectory.times,
        spins=spins,
        energies=trajectory.energies,
        norms=trajectory.norms,
        entropies=entropies,
        occupations=occupations,
        magnetization=magnetization,
        states=trajectory.states,
        metadata=dict(metadata or {}),
    )


def classical_dataset(
    trajectory: ClassicalTrajectory, spec: SystemSpec, metadata: Optional[Dict[str, Any]] = None
) -> TrajectoryDataset:
    return TrajectoryDataset(
        kind=CLASSICAL,
        spin=spec.spin,
        times=trajectory.times,
        spins=trajectory.spins,
        energies=trajectory.energies,
        metadata=dict(metadata or {}),
    )


def ensemble_dataset(
    result: EnsembleResult,
    spec: SystemSpec,
    kind: str,
    metadata: Optional[Dict[str, Any]] = None,
) -> TrajectoryDataset:
    """Ensemble mean as the spin columns plus the member spread."""
    return TrajectoryDataset(
        kind=kind,
        spin=spec.spin,
        times=result.times,
        spins=result.mean,
        energies=np.mean(result.energies, axis=0),
        spin_std=result.std,
        metadata=dict(metadata or {}),
    )
