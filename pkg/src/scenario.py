"""Scenario runner: builds the model, propagates, evaluates and exports one run."""

import logging
import time
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from . import __version__
from .classical_dynamics import ClassicalConfig, integrate_classical
from .config import ScenarioConfig
from .dataset import (
    CLASSICAL,
    CLASSICAL_ENSEMBLE,
    QUANTUM,
    QUANTUM_ENSEMBLE,
    TrajectoryDataset,
    classical_dataset,
    ensemble_dataset,
    quantum_dataset,
)
from .ensemble import run_classical_ensemble, run_quantum_ensemble
from .export import TrajectoryExporter
from .model import SystemSpec, check_dimension
from .quantum_dynamics import StateVector, evolve_pure

logger = logging.getLogger(__name__)


def polarized_state(spec: SystemSpec) -> StateVector:
    """All spins along +z: the first basis state (every site at m = S)."""
    psi = np.zeros(spec.dimension, dtype=complex)
    psi[0] = 1.0
    return psi


def _banner(title: str) -> None:
    logger.info("\n" + "=" * 60)
    logger.info(title)
    logger.info("=" * 60)


class ScenarioRunner:
    """Runs one experiment configuration and writes its dataset."""

    def __init__(self, config: ScenarioConfig, output_dir: str = "output") -> None:
        """Initialize runner.

        Args:
            config: Validated experiment configuration
            output_dir: Parent directory for auto-named run directories
        """
        self.config = config
        self.exporter = TrajectoryExporter(output_dir=output_dir)

    def metadata(self, kind: str) -> Dict[str, Any]:
        cfg = self.config
        return {
            "kind": kind,
            "config": cfg.to_document(),
            "integrator": {
                "dt": cfg.dt,
                "sample_every": cfg.sample_every,
                "renormalize_each_step": True,
                "scheme": "heun" if cfg.stochastic else "rk4",
                "form": cfg.form.value,
            },
            "seed": cfg.seed,
            "version": __version__,
            "n_sites": cfg.N,
            "spin": cfg.S,
        }

    def simulate(self, classical: bool = False) -> TrajectoryDataset:
        """Propagate the configured system and evaluate its observables.

        Raises:
            DimensionError: If the quantum Hilbert space is too large
            ConfigError: If the step size is too large
            NumericalError: If the run or the dataset invariants fail
        """
        cfg = self.config
        spec = cfg.system_spec()
        integrator = cfg.integrator_config()

        _banner("Phase 1: Building Model")
        logger.info(f"N={spec.n_sites}, S={spec.spin}, J={spec.exchange}, Bz={spec.field_z}, "
                    f"lambda={spec.damping}, form={cfg.form.value}")
        if spec.pulse is not None:
            logger.info(f"Pulse: B0x={spec.pulse.amplitude} at t0={spec.pulse.center} "
                        f"(TW={spec.pulse.width}) on site {spec.pulse.target_site}")
        if not classical:
            check_dimension(spec)
            logger.info(f"Hilbert space dimension: {spec.dimension}")

        _banner("Phase 2: Propagating")
        started = time.perf_counter()
        if classical:
            config0 = ClassicalConfig.polarized(spec.n_sites, spec.spin.value)
            if cfg.stochastic:
                kind = CLASSICAL_ENSEMBLE
                result = run_classical_ensemble(
                    config0, spec, cfg.noise_spec(), integrator, cfg.form, cfg.t_end,
                    members=cfg.ensemble, max_workers=cfg.workers,
                )
            else:
                kind = CLASSICAL
                trajectory = integrate_classical(config0, spec, integrator, cfg.form, cfg.t_end)
        else:
            psi0 = polarized_state(spec)
            if cfg.stochastic:
                kind = QUANTUM_ENSEMBLE
                result = run_quantum_ensemble(
                    psi0, spec, cfg.noise_spec(), integrator, cfg.form, cfg.t_end,
                    members=cfg.ensemble, max_workers=cfg.workers,
                )
            else:
                kind = QUANTUM
                state_trajectory = evolve_pure(psi0, spec, integrator, cfg.form, cfg.t_end)
        logger.info(f"Propagation finished in {time.perf_counter() - started:.2f}s")

        _banner("Phase 3: Evaluating Observables")
        metadata = self.metadata(kind)
        if kind in (QUANTUM_ENSEMBLE, CLASSICAL_ENSEMBLE):
            dataset = ensemble_dataset(result, spec, kind, metadata)
        elif kind == CLASSICAL:
            dataset = classical_dataset(trajectory, spec, metadata)
        else:
            dataset = quantum_dataset(state_trajectory, spec, metadata)
        dataset.validate()
        logger.info(f"{len(dataset.times)} samples passed the row invariants")
        return dataset

    def run(
        self, classical: bool = False, output_path: Optional[Union[str, Path]] = None
    ) -> Path:
        """Simulate and export; returns the run directory."""
        _banner(f"Starting scenario {self.config.name!r} "
                f"({'classical' if classical else 'quantum'})")
        dataset = self.simulate(classical=classical)

        _banner("Phase 4: Exporting")
        run_dir = self.exporter.export(dataset, output_path=output_path, name=self.config.name)

        final = dataset.normalized[-1]
        _banner("SCENARIO COMPLETE")
        logger.info(f"Kind: {dataset.kind}")
        logger.info(f"Samples: {len(dataset.times)} up to t={dataset.times[-1]:g}")
        for n in range(dataset.n_sites):
            logger.info(f"Site {n + 1} final S/S: ({final[n, 0]:+.6f}, {final[n, 1]:+.6f}, "
                        f"{final[n, 2]:+.6f})")
        logger.info(f"Output directory: {run_dir}")
        logger.info("=" * 60)
        return run_dir
