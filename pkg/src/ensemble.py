"""Stochastic ensembles fanned out over a thread pool."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from .classical_dynamics import ClassicalConfig, integrate_classical
from .errors import NumericalError
from .model import EquationForm, NoiseSpec, SystemSpec
from .observables import site_observables
from .quantum_dynamics import IntegratorConfig, StateVector, evolve_pure
from .spin_algebra import RealArray

logger = logging.getLogger(__name__)


@dataclass
class EnsembleResult:
    """Per-member spin trajectories reduced to mean and standard deviation.

    Attributes:
        times: Sample times shared by all members
        members: Spin vectors of every member, shape (M, samples, N, 3)
        energies: Energy of every member, shape (M, samples)
    """

    times: RealArray
    members: RealArray
    energies: RealArray

    @property
    def mean(self) -> RealArray:
        result: RealArray = np.mean(self.members, axis=0)
        return result

    @property
    def std(self) -> RealArray:
        result: RealArray = np.std(self.members, axis=0)
        return result

    @property
    def size(self) -> int:
        return int(self.members.shape[0])


MemberSamples = Tuple[RealArray, RealArray, RealArray]
MemberRun = Callable[[int], MemberSamples]


def _run_members(run_member: MemberRun, members: int, max_workers: int) -> EnsembleResult:
    if members < 1:
        raise ValueError(f"Ensemble needs at least one member, got {members}")
    if max_workers < 1:
        raise ValueError(f"Ensemble needs at least one worker thread, got {max_workers}")
    workers = min(max_workers, members)
    logger.info(f"Starting ensemble of {members} members on {workers} threads")

    results: Dict[int, MemberSamples] = {}
    failed = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_member = {executor.submit(run_member, m): m for m in range(members)}
        for future in as_completed(future_to_member):
            member = future_to_member[future]
            try:
                results[member] = future.result()
            except NumericalError as e:
                logger.warning(f"Ensemble member {member} failed: {e}")
                failed += 1

    if failed:
        raise NumericalError(f"{failed}/{members} ensemble members failed")
    logger.info(f"Ensemble complete: {members} members")

    # Collect in member order so the reduction does not depend on scheduling.
    ordered = [results[m] for m in range(members)]
    return EnsembleResult(
        times=ordered[0][0],
        members=np.array([r[1] for r in ordered]),
        energies=np.array([r[2] for r in ordered]),
    )


def run_classical_ensemble(
    config0: ClassicalConfig,
    spec: SystemSpec,
    noise: NoiseSpec,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    members: int,
    max_workers: int = 4,
) -> EnsembleResult:
    """Stochastic classical runs, member m using noise stream m."""

    def run_member(member: int) -> MemberSamples:
        trajectory = integrate_classical(
            config0, spec, cfg, form, t_end, noise=noise.for_member(member)
        )
        logger.debug(f"Classical member {member} done")
        return trajectory.times, trajectory.spins, trajectory.energies

    return _run_members(run_member, members, max_workers)


def run_quantum_ensemble(
    psi0: StateVector,
    spec: SystemSpec,
    noise: NoiseSpec,
    cfg: IntegratorConfig,
    form: EquationForm,
    t_end: float,
    members: int,
    max_workers: int = 4,
) -> EnsembleResult:
    """Damped Schroedinger runs with the stochastic field term, one stream per member."""

    def run_member(member: int) -> MemberSamples:
        trajectory = evolve_pure(psi0, spec, cfg, form, t_end, noise=noise.for_member(member))
        spins: List[List[RealArray]] = [
            [site.vector for site in site_observables(state, spec.n_sites, spec.spin)]
            for state in trajectory.states
        ]
        logger.debug(f"Quantum member {member} done")
        return trajectory.times, np.array(spins), trajectory.energies

    return _run_members(run_member, members, max_workers)
