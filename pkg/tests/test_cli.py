"""Batch front end: config validation, outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from elaswave.cli import EXIT_IO, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, main
from elaswave.grid import load_field, plane_wave, TorusGrid


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def run_cli(command, config_path, out_dir, *extra):
    return main([command, "--config", config_path, "--out", str(out_dir), "--quiet", *extra])


class TestConfigHandling:
    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"seed": 1, "bogus": 2})
        assert run_cli("symbol-check", cfg, tmp_path / "out") == EXIT_USAGE
        assert "bogus" in capsys.readouterr().err

    def test_ellipticity_violation_names_condition(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"seed": 1, "mu": -1.0})
        assert run_cli("symbol-check", cfg, tmp_path / "out") == EXIT_USAGE
        err = capsys.readouterr().err
        assert "mu > 0 and lambda + 2*mu > 0" in err

    def test_seed_mandatory_for_randomized_suite(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"samples": 10})
        assert run_cli("symbol-check", cfg, tmp_path / "out") == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_seed_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"samples": 50, "dims": [2]})
        assert run_cli("symbol-check", cfg, tmp_path / "out", "--seed", "7") == EXIT_OK

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert run_cli("symbol-check", str(path), tmp_path / "out") == EXIT_USAGE
        assert "JSON" in capsys.readouterr().err

    def test_missing_config_file_is_io_error(self, tmp_path, capsys):
        assert run_cli("symbol-check", str(tmp_path / "none.json"), tmp_path / "out") == EXIT_IO

    def test_unknown_command_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_lock_file_makes_directory_single_writer(self, tmp_path, capsys):
        out = tmp_path / "out"
        out.mkdir()
        (out / ".lock").write_text("12345")
        cfg = write_config(tmp_path, "c.json", {"seed": 1, "samples": 10, "dims": [2]})
        assert run_cli("symbol-check", cfg, out) == EXIT_IO
        assert "lock" in capsys.readouterr().err.lower()

    def test_lock_released_after_run(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"seed": 1, "samples": 10, "dims": [2]})
        out = tmp_path / "out"
        assert run_cli("symbol-check", cfg, out) == EXIT_OK
        assert not (out / ".lock").exists()
        assert run_cli("symbol-check", cfg, out) == EXIT_OK


class TestSymbolCheck:
    def test_default_material_passes(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"seed": 42, "samples": 300, "dims": [2, 3]})
        out = tmp_path / "out"
        assert run_cli("symbol-check", cfg, out) == EXIT_OK
        lines = (out / "summary.csv").read_text().strip().splitlines()
        assert lines[0] == "check,dimension,samples,max_error,tolerance,passed"
        assert all(line.endswith("true") for line in lines[1:])
        assert any("diagonalization_identity" in line for line in lines)
        assert any("oracle_agreement" in line for line in lines)


class TestPropagate:
    def base_config(self):
        return {
            "lambda": 1.0,
            "mu": 1.0,
            "n": 2,
            "M": 16,
            "L": np.pi,
            "flavor": "half_wave_plus",
            "times": [0.0],
            "initial": {"type": "plane_wave", "k": [3, 4], "amplitude": [0.6, 0.8]},
        }

    def test_time_zero_round_trips_bit_for_bit(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out = tmp_path / "out"
        assert run_cli("propagate", cfg, out) == EXIT_OK
        grid = TorusGrid(2, 16, np.pi)
        expect = plane_wave(grid, [3, 4], np.array([0.6, 0.8]))
        files = sorted((out / "fields").glob("*.bin"))
        assert len(files) == 1
        stored = load_field(files[0])
        assert np.array_equal(stored.values, expect.values)

    def test_energy_log_constant(self, tmp_path):
        payload = self.base_config()
        payload["times"] = [0.0, 0.3, 0.8, 1.4]
        cfg = write_config(tmp_path, "c.json", payload)
        out = tmp_path / "out"
        assert run_cli("propagate", cfg, out) == EXIT_OK
        lines = (out / "energy.csv").read_text().strip().splitlines()
        assert lines[0] == "t,l2_norm,imag_residual,field_file"
        norms = [float(line.split(",")[1]) for line in lines[1:]]
        assert max(norms) / min(norms) - 1.0 <= 1e-12

    def test_random_initial_needs_seed(self, tmp_path, capsys):
        payload = self.base_config()
        payload["initial"] = {"type": "random", "band_limit": 4.0}
        cfg = write_config(tmp_path, "c.json", payload)
        assert run_cli("propagate", cfg, tmp_path / "out") == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_gaussian_initial_runs(self, tmp_path):
        payload = self.base_config()
        payload["M"] = 64
        payload["flavor"] = "cosine"
        payload["times"] = [0.0, 0.5]
        payload["initial"] = {"type": "gaussian", "width": 0.35}
        cfg = write_config(tmp_path, "c.json", payload)
        assert run_cli("propagate", cfg, tmp_path / "out") == EXIT_OK

    def test_gaussian_bump_fronts_at_both_speeds(self, tmp_path):
        # a pulse from the origin splits into pressure and shear fronts whose
        # radii the radial energy histogram localizes to one grid cell
        from elaswave.reference import front_radius, radial_energy_histogram
        from elaswave.symbol import LameParams

        payload = self.base_config()
        payload["M"] = 128
        payload["times"] = [1.1]
        payload["initial"] = {"type": "gaussian", "width": 0.15, "amplitude": [1.0, 1.0]}
        cfg = write_config(tmp_path, "c.json", payload)
        out = tmp_path / "out"
        assert run_cli("propagate", cfg, out) == EXIT_OK
        field = load_field(sorted((out / "fields").glob("*.bin"))[0])
        centers, energy = radial_energy_histogram(field)
        h = field.grid.h
        params = LameParams(1.0, 1.0)
        for speed in (params.c_s, params.c_p):
            peak = front_radius(centers, energy, near=speed * 1.1, half_window=6 * h)
            assert abs(peak - speed * 1.1) <= h, (speed, peak)


class TestSharpness:
    def base_config(self):
        return {
            "lambda": 1.0,
            "mu": 1.0,
            "n": 2,
            "v": 0.0,
            "N_list": [64, 128, 256],
            "s_list": [0.0, 0.5],
            "radial_nodes": 32,
            "angular_nodes": 8,
            "cap_nodes": 8,
        }

    def test_small_sweep_passes_and_reports(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out = tmp_path / "out"
        assert run_cli("sharpness", cfg, out) == EXIT_OK
        lines = (out / "report.csv").read_text().strip().splitlines()
        assert lines[0] == (
            "n,lambda,mu,v,N,s,maximal_norm,hs_norm,ratio,lower_bound_min,"
            "phase_max,block_max,converged"
        )
        assert len(lines) == 1 + 3 * 2
        dats = sorted((out / "plotdata").glob("*.dat"))
        assert len(dats) == 2
        assert "s0.0" in dats[0].name and "s0.5" in dats[1].name

    def test_byte_identical_across_threads(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert run_cli("sharpness", cfg, out1, "--threads", "1") == EXIT_OK
        assert run_cli("sharpness", cfg, out2, "--threads", "3") == EXIT_OK
        assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()

    def test_too_few_scales_rejected(self, tmp_path):
        payload = self.base_config()
        payload["N_list"] = [64, 128]
        cfg = write_config(tmp_path, "c.json", payload)
        assert run_cli("sharpness", cfg, tmp_path / "out") == EXIT_USAGE

    def test_augmentation_cannot_be_disabled(self, tmp_path, capsys):
        payload = self.base_config()
        payload["augment_critical_time"] = False
        cfg = write_config(tmp_path, "c.json", payload)
        assert run_cli("sharpness", cfg, tmp_path / "out") == EXIT_USAGE
        assert "augment_critical_time" in capsys.readouterr().err


class TestConverge:
    def base_config(self):
        return {
            "lambda": 1.0,
            "mu": 1.0,
            "n": 2,
            "M": 32,
            "L": np.pi,
            "band_limit": 4.0,
            "v_list": [0.0, 1.0],
            "theta_count": 4,
            "t_start": 2.0**-4,
            "halvings": 4,
            "seed": 5,
        }

    def test_halving_table(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.base_config())
        out = tmp_path / "out"
        assert run_cli("converge", cfg, out) == EXIT_OK
        lines = (out / "deviations.csv").read_text().strip().splitlines()
        assert lines[0] == "v,theta_index,t,sup_dev,l2_dev,halving_ratio"
        assert len(lines) == 1 + 2 * 4 * 5

    def test_out_of_rate_data_fails_gate(self, tmp_path):
        # starting far outside the linear regime the halving ratios wobble
        payload = self.base_config()
        payload["band_limit"] = 7.0
        payload["v_list"] = [3.0]
        payload["t_start"] = 4.0
        payload["halvings"] = 2
        cfg = write_config(tmp_path, "c.json", payload)
        assert run_cli("converge", cfg, tmp_path / "out") == EXIT_TOLERANCE
