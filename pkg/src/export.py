"""CSV export and import of trajectory datasets."""

import csv
import json
import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .dataset import TrajectoryDataset
from .errors import DatasetError
from .spin_algebra import RealArray

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
METADATA_FILE = "metadata.json"
STATES_FILE = "states.npy"


def format_number(value: float) -> str:
    """Decimal text with 17 significant digits (exact float round trip)."""
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return format(float(value), ".17g")


class TrajectoryExporter:
    """Writes datasets as plot-ready CSV plus a metadata sidecar."""

    def __init__(self, output_dir: str = "output") -> None:
        """Initialize exporter.

        Args:
            output_dir: Parent directory for auto-named run directories
        """
        self.output_dir = Path(output_dir)

    def run_directory(self, name: str, kind: str) -> Path:
        """Auto-generated directory name with timestamp."""
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return self.output_dir / f"{name.replace('-', '_')}_{kind}_{timestamp}"

    def export(
        self,
        dataset: TrajectoryDataset,
        output_path: Optional[Union[str, Path]] = None,
        name: str = "run",
    ) -> Path:
        """Export a dataset to a run directory.

        Args:
            dataset: Dataset to write
            output_path: Target directory; auto-generated when omitted
            name: Scenario name for the generated directory

        Returns:
            Path to the run directory
        """
        final_dir = Path(output_path) if output_path is not None else self.run_directory(name, dataset.kind)
        final_dir.mkdir(parents=True, exist_ok=True)
        csv_path = final_dir / TRAJECTORY_FILE
        columns = dataset.columns

        logger.info(f"Exporting {len(dataset.times)} samples x {dataset.n_sites} sites to {csv_path}")
        with open(csv_path, "w", newline="", encoding="utf-8") as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for row in dataset.rows():
                writer.writerow({col: format_number(row[col]) for col in columns})

        with open(final_dir / METADATA_FILE, "w", encoding="utf-8") as f:
            json.dump(dataset.metadata, f, indent=2, sort_keys=True)
            f.write("\n")

        if dataset.states is not None:
            np.save(final_dir / STATES_FILE, dataset.states)

        logger.info(f"Successfully exported to {final_dir}")
        return final_dir


@dataclass
class LoadedTrajectory:
    """Long-format CSV read back as per-site column arrays of shape (T, N)."""

    path: Path
    times: RealArray
    sites: List[int]
    columns: Dict[str, RealArray]

    def column(self, name: str) -> RealArray:
        if name not in self.columns:
            raise DatasetError(f"{self.path} has no column {name!r}")
        return self.columns[name]


def load_trajectory_csv(path: Union[str, Path]) -> LoadedTrajectory:
    """Read a trajectory CSV written by TrajectoryExporter.

    Raises:
        DatasetError: If the file is missing, empty, or not rectangular in (t, site)
    """
    csv_path = Path(path)
    if csv_path.is_dir():
        csv_path = csv_path / TRAJECTORY_FILE
    try:
        with open(csv_path, "r", newline="", encoding="utf-8") as csvfile:
            reader = csv.DictReader(csvfile)
            rows = list(reader)
            fieldnames = list(reader.fieldnames or [])
    except OSError as e:
        raise DatasetError(f"Cannot read {csv_path}: {e}") from e
    if not rows or "t" not in fieldnames or "site" not in fieldnames:
        raise DatasetError(f"{csv_path} is empty or lacks t/site columns")

    sites = sorted({int(row["site"]) for row in rows})
    n_sites = len(sites)
    if len(rows) % n_sites != 0:
        raise DatasetError(f"{csv_path} does not hold every site at every time")
    n_times = len(rows) // n_sites

    data: Dict[str, Any] = {}
    try:
        for name in fieldnames:
            if name in ("t", "site"):
                continue
            values = np.array([float(row[name]) for row in rows])
            data[name] = values.reshape(n_times, n_sites)
        times = np.array([float(row["t"]) for row in rows]).reshape(n_times, n_sites)[:, 0]
    except ValueError as e:
        raise DatasetError(f"{csv_path} holds a non-numeric value: {e}") from e

    logger.debug(f"Loaded {n_times} samples x {n_sites} sites from {csv_path}")
    return LoadedTrajectory(path=csv_path, times=times, sites=sites, columns=data)


def load_metadata(run_dir: Union[str, Path]) -> Dict[str, Any]:
    """Read the metadata sidecar of a run directory (empty dict if absent)."""
    meta_path = Path(run_dir) / METADATA_FILE
    if not meta_path.exists():
        return {}
    with open(meta_path, "r", encoding="utf-8") as f:
        data: Dict[str, Any] = json.load(f)
    return data
