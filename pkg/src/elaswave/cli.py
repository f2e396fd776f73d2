"""Batch front end: run the experiment suites and gate them against thresholds.

Commands
--------
symbol-check   randomized identity/agreement suites for the frequency symbol
propagate      evolve initial data on a grid, write fields and an energy log
sharpness      ratio sweep across dyadic scales, CSV report and plot data
converge       deviation table of the line-shifted evolution as t -> 0

Every command reads a UTF-8 JSON config (one file per run, unknown keys
rejected, seed mandatory for randomized suites); scalar flags override config
fields.  Outputs are written under --out as {report.csv, summary.csv,
plotdata/*.dat, fields/*.bin, ...}; a lock file makes the directory single
writer.  Runs with identical config and seed produce byte-identical CSVs
regardless of --threads.

Exit codes: 0 pass, 1 usage or config error, 2 numerical tolerance failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .experiments import (
    SharpnessConfig,
    convergence_along_line,
    ratio_sweep,
    scale_measurements,
    write_plot_data,
    write_report_csv,
)
from .grid import (
    TorusGrid,
    VectorField,
    forward_transform,
    gaussian_bump,
    load_field,
    plane_wave,
    random_band_limited,
    save_field,
)
from .propagate import PropagationRequest, half_wave
from .reference import multiplier_via_eigendecomposition
from .symbol import (
    LameParams,
    branch_exponential,
    geodesic_rotation,
    half_wave_multiplier,
    lame_symbol_matrix,
    partition_of_unity,
    symbol_square_root,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

SLOPE_TOLERANCE = 0.1
PHASE_BOUND = 0.25
BLOCK_BOUND = 0.25
LOWER_BOUND_FRACTION = 0.5
LOWER_BOUND_MIN_SCALE = 256.0
HALVING_RANGE = (0.4, 0.6)


class ConfigError(Exception):
    """Bad usage or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(x) -> str:
    """Shortest round-trip, locale-independent cell formatting."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return repr(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _validate_keys(cfg: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = sorted(required - set(cfg))
    if missing:
        raise ConfigError(f"missing required key(s) in {where}: {', '.join(missing)}")


def _number(cfg: dict, key: str, default=None) -> float:
    value = cfg.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}")
    return float(value)


def _integer(cfg: dict, key: str, default=None) -> int:
    value = cfg.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} must be an integer, got {value!r}")
    return value


def _number_list(cfg: dict, key: str, default=None) -> list[float]:
    value = cfg.get(key, default)
    if not isinstance(value, list) or not value or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"key {key!r} must be a non-empty list of numbers")
    return [float(v) for v in value]


def _material(cfg: dict) -> LameParams:
    lam = _number(cfg, "lambda", 1.0)
    mu = _number(cfg, "mu", 1.0)
    try:
        return LameParams(lam=lam, mu=mu)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _seed_of(cfg: dict, override) -> int:
    if override is not None:
        return int(override)
    if "seed" not in cfg:
        raise ConfigError("seed is mandatory for randomized suites (config key 'seed' or --seed)")
    return _integer(cfg, "seed")


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


# ---------------------------------------------------------------------------
# symbol-check

def _admissible_direction(rng: np.random.Generator, n: int, sign: int) -> np.ndarray:
    while True:
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        if sign * w[0] >= -1.0 / np.sqrt(2.0) + 1e-9:
            return w


def _random_frequency(rng: np.random.Generator, n: int) -> np.ndarray:
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    return direction * rng.uniform(0.1, 10.0)


def _frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def cmd_symbol_check(args, cfg: dict, out_dir: Path) -> int:
    _validate_keys(cfg, {"lambda", "mu", "seed", "samples", "dims"}, set(), "symbol-check config")
    params = _material(cfg)
    seed = _seed_of(cfg, args.seed)
    samples = _integer(cfg, "samples", 10000)
    dims = cfg.get("dims", [2, 3])
    if not isinstance(dims, list) or not all(d in (2, 3) for d in dims):
        raise ConfigError("key 'dims' must be a list drawn from [2, 3]")
    rng = np.random.default_rng(seed)

    results = []

    def run(name, n, count, tol, fn):
        worst = 0.0
        for _ in range(count):
            worst = max(worst, fn())
        results.append((name, n, count, worst, tol, worst <= tol))

    for n in dims:
        e1 = np.zeros(n)
        e1[0] = 1.0

        def diag_err():
            sign = 1 if rng.random() < 0.5 else -1
            omega = _admissible_direction(rng, n, sign)
            r = rng.uniform(0.1, 10.0)
            xi = r * omega
            rot = geodesic_rotation(sign, omega)
            eig = np.full(n, params.mu * r * r)
            eig[0] = (params.lam + 2.0 * params.mu) * r * r
            sym = lame_symbol_matrix(params, xi)
            return _frobenius((rot * eig) @ rot.T - sym) / _frobenius(sym)

        def oracle_err():
            xi = _random_frequency(rng, n)
            t = rng.uniform(-2.0, 2.0)
            ours = half_wave_multiplier(params, xi, t).matrix
            theirs = multiplier_via_eigendecomposition(params, xi, t)
            return _frobenius(ours - theirs)

        def orth_err():
            sign = 1 if rng.random() < 0.5 else -1
            rot = geodesic_rotation(sign, _admissible_direction(rng, n, sign))
            return max(
                _frobenius(rot.T @ rot - np.eye(n)), abs(float(np.linalg.det(rot)) - 1.0)
            )

        def fixed_subspace_err():
            sign = 1 if rng.random() < 0.5 else -1
            omega = _admissible_direction(rng, n, sign)
            rot = geodesic_rotation(sign, omega)
            y = rng.standard_normal(n)
            y -= (y @ e1) * e1
            w = omega - (omega @ e1) * e1
            wn = np.linalg.norm(w)
            if wn > 1e-12:
                y -= (y @ w) / wn**2 * w
            return float(np.linalg.norm(rot.T @ y - y))

        def unitary_err():
            xi = _random_frequency(rng, n)
            theta = rng.standard_normal(n)
            theta /= np.linalg.norm(theta)
            u = half_wave_multiplier(
                params, xi, rng.uniform(-2.0, 2.0), v=rng.uniform(0.0, 4.0), theta=theta
            ).matrix
            return max(
                _frobenius(u.conj().T @ u - np.eye(n)), abs(abs(np.linalg.det(u)) - 1.0)
            )

        def sqrt_err():
            xi = _random_frequency(rng, n)
            root = symbol_square_root(params, xi)
            sym = lame_symbol_matrix(params, xi)
            return _frobenius(root @ root - sym) / _frobenius(sym)

        def group_err():
            xi = _random_frequency(rng, n)
            t, u = rng.uniform(-2.0, 2.0, size=2)
            both = half_wave_multiplier(params, xi, t + u).matrix
            split = half_wave_multiplier(params, xi, t).matrix @ half_wave_multiplier(
                params, xi, u
            ).matrix
            return _frobenius(both - split)

        def overlap_err():
            # directions where both cap weights are positive
            omega = _admissible_direction(rng, n, +1)
            omega[0] = rng.uniform(-0.49, 0.49)
            rest = np.linalg.norm(omega[1:])
            omega[1:] *= np.sqrt(max(0.0, 1.0 - omega[0] ** 2)) / rest
            xi = omega * rng.uniform(0.1, 10.0)
            t = rng.uniform(-2.0, 2.0)
            return _frobenius(
                branch_exponential(params, xi, t, +1) - branch_exponential(params, xi, t, -1)
            )

        def partition_err():
            omega = _admissible_direction(rng, n, 1 if rng.random() < 0.5 else -1)
            w_plus, w_minus = partition_of_unity(omega)
            err = abs(w_plus + w_minus - 1.0)
            if omega[0] >= 0.5:
                err = max(err, abs(w_plus - 1.0))
            if omega[0] <= -0.5:
                err = max(err, w_plus)
            return err

        run("diagonalization_identity", n, samples, 1e-10, diag_err)
        run("oracle_agreement", n, samples, 1e-10, oracle_err)
        run("rotation_orthogonality", n, samples, 1e-12, orth_err)
        if n >= 3:
            run("fixed_subspace", n, samples, 1e-12, fixed_subspace_err)
        run("multiplier_unitarity", n, max(1000, samples // 10), 1e-12, unitary_err)
        run("square_root_compatibility", n, max(1000, samples // 10), 1e-10, sqrt_err)
        run("group_law", n, max(1000, samples // 10), 1e-12, group_err)
        run("overlap_consistency", n, max(1000, samples // 10), 1e-10, overlap_err)
        run("partition_of_unity", n, samples, 1e-15, partition_err)

    _write_csv(
        out_dir / "summary.csv",
        ["check", "dimension", "samples", "max_error", "tolerance", "passed"],
        results,
    )
    failed = [r for r in results if not r[5]]
    for name, n, count, worst, tol, ok in results:
        _say(args, f"{'PASS' if ok else 'FAIL'} {name} (n={n}): max={worst:.3e} tol={tol:g} ({count} samples)")
    return EXIT_TOLERANCE if failed else EXIT_OK


# ---------------------------------------------------------------------------
# propagate

_INITIAL_KEYS = {"type", "k", "amplitude", "width", "center", "band_limit", "path"}


def _initial_field(cfg: dict, grid: TorusGrid, args, whole_cfg: dict) -> VectorField:
    _validate_keys(cfg, _INITIAL_KEYS, {"type"}, "initial data spec")
    kind = cfg["type"]
    if kind == "plane_wave":
        k = cfg.get("k")
        if not isinstance(k, list) or len(k) != grid.n:
            raise ConfigError(f"plane_wave initial data needs 'k' with {grid.n} integers")
        amp = cfg.get("amplitude", [1.0] * grid.n)
        return plane_wave(grid, np.asarray(k, dtype=int), np.asarray(amp, dtype=float))
    if kind == "gaussian":
        width = _number(cfg, "width")
        center = cfg.get("center")
        amp = cfg.get("amplitude")
        return gaussian_bump(
            grid,
            width,
            None if center is None else np.asarray(center, dtype=float),
            None if amp is None else np.asarray(amp, dtype=float),
        )
    if kind == "random":
        band = _number(cfg, "band_limit")
        rng = np.random.default_rng(_seed_of(whole_cfg, args.seed))
        return random_band_limited(grid, band, rng)
    if kind == "file":
        path = cfg.get("path")
        if not isinstance(path, str):
            raise ConfigError("file initial data needs a string 'path'")
        field = load_field(path)
        if not isinstance(field, VectorField):
            raise ConfigError(f"{path} does not hold a spatial field")
        if field.grid != grid:
            raise ConfigError(
                f"field in {path} lives on grid {field.grid}, config says {grid}"
            )
        return field
    raise ConfigError(f"unknown initial data type {kind!r}")


def cmd_propagate(args, cfg: dict, out_dir: Path) -> int:
    allowed = {"lambda", "mu", "n", "M", "L", "v", "theta", "flavor", "times", "initial", "seed"}
    _validate_keys(cfg, allowed, {"n", "M", "L", "times", "initial"}, "propagate config")
    params = _material(cfg)
    grid = TorusGrid(n=_integer(cfg, "n"), M=_integer(cfg, "M"), L=_number(cfg, "L"))
    v = _number(cfg, "v", 0.0)
    theta = cfg.get("theta")
    theta_v = None if theta is None else np.asarray(theta, dtype=float)
    flavor = cfg.get("flavor", "cosine")
    times = _number_list(cfg, "times")
    try:
        f0 = _initial_field(cfg["initial"], grid, args, cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    fields_dir = out_dir / "fields"
    fields_dir.mkdir(exist_ok=True)
    rows = []
    for i, t in enumerate(times):
        try:
            req = PropagationRequest(params=params, f=f0, t=t, v=v, theta=theta_v, flavor=flavor)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        u = half_wave(req)
        name = f"field_{i:03d}_t{t!r}.bin"
        save_field(fields_dir / name, u)
        imag_residual = float(np.max(np.abs(u.values.imag)))
        rows.append((t, u.l2_norm(), imag_residual, name))
        _say(args, f"t={t!r}: l2={u.l2_norm()!r} -> fields/{name}")
    _write_csv(out_dir / "energy.csv", ["t", "l2_norm", "imag_residual", "field_file"], rows)

    if flavor in ("half_wave_plus", "half_wave_minus"):
        base = f0.l2_norm()
        drift = max(abs(r[1] / base - 1.0) for r in rows)
        if drift > 1e-12:
            _say(args, f"FAIL energy conservation: relative drift {drift:.3e} > 1e-12")
            return EXIT_TOLERANCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# sharpness

def cmd_sharpness(args, cfg: dict, out_dir: Path) -> int:
    allowed = {
        "lambda", "mu", "n", "v", "N_list", "s_list",
        "radial_nodes", "angular_nodes", "cap_nodes",
    }
    _validate_keys(cfg, allowed, {"N_list", "s_list"}, "sharpness config")
    params = _material(cfg)
    n_values = _number_list(cfg, "N_list")
    s_values = _number_list(cfg, "s_list")
    if len(set(n_values)) < 3:
        raise ConfigError(f"N_list needs at least 3 distinct scales, got {n_values}")
    try:
        template = SharpnessConfig(
            params=params,
            n=_integer(cfg, "n", 2),
            v=_number(cfg, "v", 0.0),
            N=max(n_values),
            radial_nodes=_integer(cfg, "radial_nodes", 96),
            angular_nodes=_integer(cfg, "angular_nodes", 12),
            cap_nodes=_integer(cfg, "cap_nodes", 8),
        )
        for nv in n_values:
            replace(template, N=nv)  # validates every scale up front
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    cache: dict = {}
    scales = sorted(set(n_values))
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = {
                nv: pool.submit(scale_measurements, replace(template, N=nv)) for nv in scales
            }
            cache = {nv: fut.result() for nv, fut in futures.items()}

    reports = [ratio_sweep(template, scales, s, cache=cache) for s in sorted(s_values)]
    write_report_csv(out_dir / "report.csv", reports)
    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    for report in reports:
        write_plot_data(plot_dir / f"ratio_n{template.n}_s{report.s!r}.dat", report)

    problems = []
    for row in reports[0].rows:
        # both flavors of the time sup are reported: the grid-augmented value
        # used in the ratio and the single witness-time value it dominates
        _say(
            args,
            f"N={row.N:g}: maximal={row.maximal_norm!r} witness={row.witness_norm!r} "
            f"grid={row.grid_norm!r} converged={row.converged}",
        )
    for report in reports:
        want = report.expected_slope
        got = report.slope
        _say(
            args,
            f"s={report.s!r}: slope={got:.4f} expected={want:.4f} "
            f"residual={report.slope_residual:.2e} reliable={report.reliable}",
        )
        if not report.reliable:
            bad = [r.N for r in report.rows if not r.converged]
            problems.append(f"s={report.s!r}: quadrature not converged at N in {bad}")
        if abs(got - want) > SLOPE_TOLERANCE:
            problems.append(
                f"s={report.s!r}: slope {got:.4f} off expected {want:.4f} by more than "
                f"{SLOPE_TOLERANCE}"
            )
        for row in report.rows:
            if row.phase_max > PHASE_BOUND:
                problems.append(f"N={row.N!r}: phase max {row.phase_max!r} > {PHASE_BOUND}")
            if row.block_max > BLOCK_BOUND:
                problems.append(f"N={row.N!r}: block max {row.block_max!r} > {BLOCK_BOUND}")
            if row.N >= LOWER_BOUND_MIN_SCALE and (
                row.min_witness_real_first < LOWER_BOUND_FRACTION * row.sector_measure
            ):
                problems.append(
                    f"N={row.N!r}: witness real part {row.min_witness_real_first!r} below "
                    f"{LOWER_BOUND_FRACTION} * sector measure {row.sector_measure!r}"
                )
    for p in problems:
        _say(args, f"FAIL {p}")
    return EXIT_TOLERANCE if problems else EXIT_OK


# ---------------------------------------------------------------------------
# converge

def cmd_converge(args, cfg: dict, out_dir: Path) -> int:
    allowed = {
        "lambda", "mu", "n", "M", "L", "band_limit",
        "v_list", "theta_count", "t_start", "halvings", "seed",
    }
    _validate_keys(cfg, allowed, {"n", "M", "L", "band_limit"}, "converge config")
    params = _material(cfg)
    grid = TorusGrid(n=_integer(cfg, "n"), M=_integer(cfg, "M"), L=_number(cfg, "L"))
    band = _number(cfg, "band_limit")
    v_list = _number_list(cfg, "v_list", [0.0, 1.0, 3.0])
    theta_count = _integer(cfg, "theta_count", 8)
    t_start = _number(cfg, "t_start", 2.0**-4)
    halvings = _integer(cfg, "halvings", 6)
    rng = np.random.default_rng(_seed_of(cfg, args.seed))
    try:
        f0 = random_band_limited(grid, band, rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if grid.n == 2:
        angles = 2.0 * np.pi * np.arange(theta_count) / theta_count
        thetas = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        thetas = rng.standard_normal((theta_count, grid.n))
        thetas /= np.linalg.norm(thetas, axis=1, keepdims=True)

    times = [t_start * 2.0**-j for j in range(halvings + 1)]
    rows = []
    bad = []
    for v in v_list:
        for ti, theta in enumerate(thetas):
            table = convergence_along_line(f0, params, v, theta, times)
            prev = None
            for row in table:
                ratio = float("nan") if prev is None else row.l2_dev / prev
                rows.append((v, ti, row.t, row.sup_dev, row.l2_dev, ratio))
                if prev is not None and not (HALVING_RANGE[0] <= ratio <= HALVING_RANGE[1]):
                    bad.append((v, ti, row.t, ratio))
                prev = row.l2_dev
    _write_csv(
        out_dir / "deviations.csv",
        ["v", "theta_index", "t", "sup_dev", "l2_dev", "halving_ratio"],
        rows,
    )
    for v, ti, t, ratio in bad:
        _say(args, f"FAIL halving ratio {ratio:.3f} outside {HALVING_RANGE} at v={v} theta#{ti} t={t!r}")
    if not bad:
        _say(args, f"all halving ratios within {HALVING_RANGE} "
                   f"({len(v_list)} speeds x {theta_count} directions x {halvings} halvings)")
    return EXIT_TOLERANCE if bad else EXIT_OK


# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="elaswave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("symbol-check", "propagate", "sharpness", "converge"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--out", type=str, default=f"out_{name.replace('-', '_')}")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--quiet", action="store_true")
    return parser


_COMMANDS = {
    "symbol-check": cmd_symbol_check,
    "propagate": cmd_propagate,
    "sharpness": cmd_sharpness,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.config is None:
            cfg = {}
        else:
            try:
                raw = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
            try:
                cfg = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
            if not isinstance(cfg, dict):
                raise ConfigError("config must be a JSON object")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO

    lock_path = out_dir / ".lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        print(
            f"error: {lock_path} exists; another process owns this output directory",
            file=sys.stderr,
        )
        return EXIT_IO
    except OSError as exc:
        print(f"error: cannot lock output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        echo = {"command": args.command, "config": cfg, "seed_override": args.seed}
        (out_dir / "config_echo.json").write_text(
            json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return _COMMANDS[args.command](args, cfg, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        try:
            lock_path.unlink()
        except OSError:
            pass


if __name__ == "__main__":
    raise SystemExit(main())
