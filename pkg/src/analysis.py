"""Quantum/classical comparison and entropy reports on stored datasets."""

import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from .errors import DatasetError
from .export import STATES_FILE, format_number, load_metadata, load_trajectory_csv
from .observables import reduced_density_from_state, von_neumann_entropy
from .spin_algebra import HalfInteger, RealArray

logger = logging.getLogger(__name__)

NORMALIZED_COLUMNS = ("sx_norm", "sy_norm", "sz_norm")
ENTROPY_FILE = "entropy.csv"
COMPARISON_FILE = "comparison.json"


@dataclass(frozen=True)
class SiteDeviation:
    """Deviation between two trajectories of one site."""

    site: int
    max_deviation: float
    time_of_max: float
    rms: Tuple[float, float, float]


@dataclass(frozen=True)
class ComparisonReport:
    """Distance between normalized spin vectors of two runs."""

    source_a: str
    source_b: str
    samples: int
    max_deviation: float
    time_of_max: float
    sites: List[SiteDeviation]

    def to_document(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, path: Union[str, Path]) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            json.dump(self.to_document(), f, indent=2)
            f.write("\n")
        return out


def _resample(
    times_a: RealArray, values_a: RealArray, times_b: RealArray, values_b: RealArray
) -> Tuple[RealArray, RealArray, RealArray]:
    """Bring two (T, N, 3) series onto a common grid.

    Identical grids are used as is; otherwise the finer series is linearly
    interpolated onto the coarser grid over the overlapping time range.
    """
    if times_a.shape == times_b.shape and np.allclose(times_a, times_b, rtol=0.0, atol=1e-12):
        return times_a, values_a, values_b
    start = max(times_a[0], times_b[0])
    stop = min(times_a[-1], times_b[-1])
    if not stop > start:
        raise DatasetError(f"Time ranges do not overlap ([{times_a[0]}, {times_a[-1]}] vs "
                           f"[{times_b[0]}, {times_b[-1]}])")
    mask_a = (times_a >= start) & (times_a <= stop)
    mask_b = (times_b >= start) & (times_b <= stop)
    if np.count_nonzero(mask_a) <= np.count_nonzero(mask_b):
        grid = times_a[mask_a]
        coarse, fine, fine_times = values_a[mask_a], values_b, times_b
        swap = False
    else:
        grid = times_b[mask_b]
        coarse, fine, fine_times = values_b[mask_b], values_a, times_a
        swap = True
    resampled = np.empty((len(grid),) + fine.shape[1:])
    for n in range(fine.shape[1]):
        for axis in range(fine.shape[2]):
            resampled[:, n, axis] = np.interp(grid, fine_times, fine[:, n, axis])
    if swap:
        return grid, resampled, coarse
    return grid, coarse, resampled


def _normalized_spins(path: Union[str, Path]) -> Tuple[RealArray, List[int], RealArray]:
    loaded = load_trajectory_csv(path)
    spins = np.stack([loaded.column(name) for name in NORMALIZED_COLUMNS], axis=2)
    return loaded.times, loaded.sites, spins


def default_report_path(path_a: Union[str, Path]) -> Path:
    """Where a comparison report goes when no path is given: next to the first dataset."""
    source = Path(path_a)
    folder = source if source.is_dir() else source.parent
    return folder / COMPARISON_FILE


def compare(path_a: Union[str, Path], path_b: Union[str, Path]) -> ComparisonReport:
    """Compare the normalized spin vectors of two trajectory CSVs site by site.

    Raises:
        DatasetError: If the files cannot be read, share no sites, or do not overlap in time
    """
    times_a, sites_a, spins_a = _normalized_spins(path_a)
    times_b, sites_b, spins_b = _normalized_spins(path_b)
    common = sorted(set(sites_a) & set(sites_b))
    if not common:
        raise DatasetError("Datasets share no sites")
    idx_a = [sites_a.index(s) for s in common]
    idx_b = [sites_b.index(s) for s in common]
    grid, va, vb = _resample(times_a, spins_a[:, idx_a], times_b, spins_b[:, idx_b])

    diff = va - vb
    distance = np.linalg.norm(diff, axis=2)  # (T, N)
    sites: List[SiteDeviation] = []
    for j, site in enumerate(common):
        k = int(np.argmax(distance[:, j]))
        rms = np.sqrt(np.mean(diff[:, j, :] ** 2, axis=0))
        sites.append(
            SiteDeviation(
                site=site,
                max_deviation=float(distance[k, j]),
                time_of_max=float(grid[k]),
                rms=(float(rms[0]), float(rms[1]), float(rms[2])),
            )
        )
    worst = max(sites, key=lambda s: s.max_deviation)
    logger.info(f"Compared {len(grid)} samples on {len(common)} sites: max deviation "
                f"{worst.max_deviation:.3e} at t={worst.time_of_max:g} (site {worst.site})")
    return ComparisonReport(
        source_a=str(path_a),
        source_b=str(path_b),
        samples=len(grid),
        max_deviation=worst.max_deviation,
        time_of_max=worst.time_of_max,
        sites=sites,
    )


@dataclass(frozen=True)
class EntropyReport:
    """Site-1 entropy over time and its relation to the spin-length minimum."""

    times: RealArray
    entropy: RealArray
    min_length: RealArray
    max_entropy: float
    time_of_max_entropy: float
    min_spin_length: float
    time_of_min_length: float

    def write(self, path: Union[str, Path]) -> Path:
        out = Path(path)
        with open(out, "w", newline="", encoding="utf-8") as csvfile:
            writer = csv.writer(csvfile, lineterminator="\n")
            writer.writerow(["t", "entropy1", "min_length"])
            for t, s, length in zip(self.times, self.entropy, self.min_length):
                writer.writerow([format_number(t), format_number(s), format_number(length)])
        return out


def _entropy_from_states(run_dir: Path, metadata: Dict[str, Any]) -> RealArray:
    states = np.load(run_dir / STATES_FILE)
    n_sites = int(metadata["config"]["N"])
    spin = HalfInteger.parse(metadata["config"]["S"])
    entropy = [
        von_neumann_entropy(reduced_density_from_state(psi, 1, n_sites, spin.dimension))
        for psi in states
    ]
    return np.array(entropy)


def entropy_report(run_dir: Union[str, Path]) -> EntropyReport:
    """Site-1 von Neumann entropy per sample of a quantum run directory.

    The entropy is recomputed from the stored states when they are present,
    otherwise the `entropy1` column is used.

    Raises:
        DatasetError: If the run holds neither states nor an entropy column
    """
    directory = Path(run_dir)
    loaded = load_trajectory_csv(directory)
    metadata = load_metadata(directory)

    if (directory / STATES_FILE).exists() and "config" in metadata:
        logger.info(f"Recomputing site-1 entropy from {directory / STATES_FILE}")
        entropy = _entropy_from_states(directory, metadata)
    elif "entropy1" in loaded.columns:
        entropy = loaded.columns["entropy1"][:, 0]
    else:
        raise DatasetError(f"{directory} holds no quantum states or entropy column")
    if entropy.shape != loaded.times.shape:
        raise DatasetError(f"{directory}: {len(entropy)} stored states for {len(loaded.times)} samples")

    min_length = np.min(loaded.column("length"), axis=1)
    i_max = int(np.argmax(entropy))
    i_min = int(np.argmin(min_length))
    return EntropyReport(
        times=loaded.times,
        entropy=entropy,
        min_length=min_length,
        max_entropy=float(entropy[i_max]),
        time_of_max_entropy=float(loaded.times[i_max]),
        min_spin_length=float(min_length[i_min]),
        time_of_min_length=float(loaded.times[i_min]),
    )
