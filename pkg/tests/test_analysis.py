"""Tests for trajectory comparison and the entropy report."""

import json

import numpy as np
import pytest

from src.analysis import COMPARISON_FILE, compare, default_report_path, entropy_report
from src.config import parse_config
from src.dataset import TrajectoryDataset
from src.errors import DatasetError
from src.export import STATES_FILE, TrajectoryExporter
from src.scenario import ScenarioRunner
from src.spin_algebra import HalfInteger


def rotating(times, phase=0.0):
    """Two spin-1/2 sites precessing in the xy plane."""
    angle = times[:, None] + np.array([0.0, 0.5])[None, :] + phase
    spins = 0.5 * np.stack([np.cos(angle), np.sin(angle), np.zeros_like(angle)], axis=2)
    return TrajectoryDataset(
        kind="classical",
        spin=HalfInteger(1),
        times=times,
        spins=spins,
        energies=np.zeros(len(times)),
    )


def export(dataset, path):
    return TrajectoryExporter().export(dataset, output_path=path)


class TestCompare:
    def test_identical_files(self, tmp_path):
        run = export(rotating(np.linspace(0, 5, 51)), tmp_path / "a")
        report = compare(run, run)
        assert report.max_deviation == 0.0
        assert all(s.rms == (0.0, 0.0, 0.0) for s in report.sites)
        assert report.samples == 51

    def test_constant_offset(self, tmp_path):
        times = np.linspace(0, 5, 51)
        a = export(rotating(times), tmp_path / "a")
        b = export(rotating(times, phase=0.1), tmp_path / "b")
        report = compare(a, b)
        # Unit vectors rotated by 0.1 rad are 2 sin(0.05) apart.
        assert report.max_deviation == pytest.approx(2 * np.sin(0.05), rel=1e-9)
        assert [s.site for s in report.sites] == [1, 2]
        for site in report.sites:
            rms = np.sqrt(np.sum(np.square(site.rms)))
            assert rms == pytest.approx(2 * np.sin(0.05), rel=1e-9)

    def test_resamples_onto_coarser_grid(self, tmp_path):
        coarse = export(rotating(np.linspace(0, 4, 41)), tmp_path / "coarse")
        fine = export(rotating(np.linspace(0, 5, 5001)), tmp_path / "fine")
        report = compare(fine, coarse)
        assert report.samples == 41
        # Linear interpolation error of a unit circle with spacing 1e-3.
        assert report.max_deviation < 1e-6

    def test_disjoint_ranges(self, tmp_path):
        a = export(rotating(np.linspace(0, 1, 11)), tmp_path / "a")
        b = export(rotating(np.linspace(2, 3, 11)), tmp_path / "b")
        with pytest.raises(DatasetError):
            compare(a, b)

    def test_writes_report(self, tmp_path):
        run = export(rotating(np.linspace(0, 1, 11)), tmp_path / "a")
        path = compare(run, run).write(tmp_path / "reports" / "cmp.json")
        document = json.loads(path.read_text())
        assert document["max_deviation"] == 0.0
        assert len(document["sites"]) == 2

    def test_default_report_path(self, tmp_path):
        run = export(rotating(np.linspace(0, 1, 11)), tmp_path / "a")
        assert default_report_path(run) == run / COMPARISON_FILE
        assert default_report_path(run / "trajectory.csv") == run / COMPARISON_FILE


@pytest.fixture(scope="module")
def dimer_run(tmp_path_factory):
    config = parse_config(
        {"name": "dimer", "N": 2, "S": "1/2", "J": 2.0, "Bz": -1.0, "B0x": 3.27, "t0": 0.5,
         "TW": 0.02, "lambda": 0.1, "t_end": 4.0, "sample_every": 50}
    )
    out = tmp_path_factory.mktemp("dimer")
    quantum = ScenarioRunner(config).run(output_path=out / "quantum")
    classical = ScenarioRunner(config).run(classical=True, output_path=out / "classical")
    return quantum, classical


class TestEntropyReport:
    def test_recomputed_from_states(self, dimer_run):
        quantum, _ = dimer_run
        report = entropy_report(quantum)
        assert report.entropy[0] == pytest.approx(0.0, abs=1e-12)
        assert report.max_entropy > 0.0
        assert len(report.times) == 81

    def test_falls_back_to_column(self, dimer_run, tmp_path):
        quantum, _ = dimer_run
        from_states = entropy_report(quantum)
        copy = tmp_path / "copy"
        copy.mkdir()
        for item in quantum.iterdir():
            if item.name != STATES_FILE:
                (copy / item.name).write_bytes(item.read_bytes())
        from_column = entropy_report(copy)
        np.testing.assert_allclose(from_column.entropy, from_states.entropy, atol=1e-12)

    def test_spin_half_entropy_peaks_with_shortest_spin(self, dimer_run):
        report = entropy_report(dimer_run[0])
        # For two spins 1/2 in a pure state both sites share one reduced spectrum.
        assert report.time_of_max_entropy == report.time_of_min_length

    def test_writes_table(self, dimer_run, tmp_path):
        path = entropy_report(dimer_run[0]).write(tmp_path / "entropy.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "t,entropy1,min_length"
        assert len(lines) == 82

    def test_classical_run_has_no_entropy(self, dimer_run):
        with pytest.raises(DatasetError):
            entropy_report(dimer_run[1])
