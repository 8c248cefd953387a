"""Batch command-line front end: seeded sweeps, searches, and identity checks
with JSON reports, CSV tables, and content-hash fixtures.

Exit codes: 0 pass, 1 usage/config error, 2 assertion or numerics failure,
3 counterexample found in integer-index control mode.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .positivity import SearchConfig, counterexample_search, theorem_sweep_parallel
from .serialize import read_xy_csv, save_report, write_csv, write_fixture

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICS = 2
EXIT_CONTROL_VIOLATION = 3

OUT_ENV_VAR = "RPENTROPY_OUT"

# config keys accepted per subcommand (superset of flags); documented in README
CONFIG_KEYS = {
    "gram-sweep": {"seed", "trials", "dims", "subsystems", "n", "tolerance", "jobs", "out"},
    "search": {"seed", "trials", "dims", "target", "lam", "n", "tolerance",
               "refine", "literal_s", "jobs", "out"},
    "fermion": {"seed", "trials", "max_components", "lam", "cutoff", "tolerance",
                "witness_trials", "sets", "out"},
    "kl": {"seed", "input", "lam", "grid_points", "ridge", "tolerance", "out"},
    "cft": {"seed", "f_table", "n", "central_charge", "grid_points", "pairs",
            "tolerance", "out"},
}


class ConfigError(Exception):
    pass


def _parse_dims(spec: str) -> list:
    """'2x2,2x3' -> [(2, 2), (2, 3)]."""
    dims = []
    for part in spec.split(","):
        fields = part.lower().split("x")
        if len(fields) != 2:
            raise ConfigError(f"bad dims entry {part!r}; expected like '2x2'")
        try:
            dims.append((int(fields[0]), int(fields[1])))
        except ValueError as exc:
            raise ConfigError(f"bad dims entry {part!r}: {exc}") from exc
    return dims


def _parse_float_list(spec: str) -> list:
    try:
        return [float(v) for v in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {spec!r}: {exc}") from exc


def _parse_int_list(spec: str) -> list:
    try:
        return [int(v) for v in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {spec!r}: {exc}") from exc


def _load_config(path: str | None, subcommand: str) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            data = json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    if "lambda" in data:  # friendly alias for the --lambda flag
        data["lam"] = data.pop("lambda")
    unknown = set(data) - CONFIG_KEYS[subcommand]
    if unknown:
        raise ConfigError(f"unknown config keys for {subcommand}: {sorted(unknown)}")
    return data


def _resolve(args: argparse.Namespace, config: dict, key: str, default=None):
    """Explicit flag > config file > default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _out_dir(args, config) -> str:
    return _resolve(args, config, "out",
                    os.environ.get(OUT_ENV_VAR, "reports"))


def _emit(out_dir: str, name: str, subcommand: str, resolved: dict, results: dict,
          argv: list) -> str:
    report = {
        "tool": "rpentropy",
        "version": __version__,
        "subcommand": subcommand,
        "config": resolved,
        "results": results,
    }
    path = os.path.join(out_dir, name)
    save_report(path, report, meta={"argv": argv})
    return path


# ----------------------------------------------------------------- gram-sweep

def cmd_gram_sweep(args, argv) -> int:
    config = _load_config(args.config, "gram-sweep")
    seed = int(_resolve(args, config, "seed", 42))
    trials = int(_resolve(args, config, "trials", 500))
    dims_spec = _resolve(args, config, "dims", "2x2,2x3,2x4,3x3,4x4")
    dims_pool = _parse_dims(dims_spec) if isinstance(dims_spec, str) else \
        [tuple(d) for d in dims_spec]
    counts = _resolve(args, config, "subsystems", "2,3,4")
    counts = _parse_int_list(counts) if isinstance(counts, str) else list(counts)
    n_values = _resolve(args, config, "n", "2,3,4,5")
    n_values = _parse_int_list(n_values) if isinstance(n_values, str) else list(n_values)
    tol = float(_resolve(args, config, "tolerance", 1e-10))
    jobs = int(_resolve(args, config, "jobs", 1))
    out_dir = _out_dir(args, config)

    plan = [[dims_pool[i % len(dims_pool)]] * counts[i % len(counts)]
            for i in range(trials)]
    result = theorem_sweep_parallel(plan, n_values, master_seed=seed, tol=tol, jobs=jobs)
    resolved = {"seed": seed, "trials": trials,
                "dims": [list(d) for d in dims_pool], "subsystems": counts,
                "n": n_values, "tolerance": tol, "jobs": jobs}
    results = {
        "instances": result.instances,
        "checks": result.checks,
        "min_normalized_eigenvalue": result.min_normalized_eig,
        "worst": result.worst,
        "violations": result.violations,
        "passed": not result.violations,
    }
    path = _emit(out_dir, f"gram-sweep-seed{seed}.json", "gram-sweep",
                 resolved, results, argv)
    print(f"gram-sweep: {result.checks} checks over {result.instances} instances, "
          f"min normalized eigenvalue {result.min_normalized_eig:.3e} -> {path}")
    if result.violations:
        print(f"gram-sweep: {len(result.violations)} PSD violations in control mode "
              "(numerics bug)", file=sys.stderr)
        return EXIT_CONTROL_VIOLATION
    return EXIT_OK


# --------------------------------------------------------------------- search

def cmd_search(args, argv) -> int:
    config = _load_config(args.config, "search")
    seed = int(_resolve(args, config, "seed", 42))
    trials = int(_resolve(args, config, "trials", 2000))
    dims_spec = _resolve(args, config, "dims", "2x2,2x2,2x2")
    dims = _parse_dims(dims_spec) if isinstance(dims_spec, str) else \
        [tuple(d) for d in dims_spec]
    target = _resolve(args, config, "target", "entropy_n1")
    lam = float(_resolve(args, config, "lam", 1.0))
    n = int(_resolve(args, config, "n", 1 if target != "integer_n" else 2))
    tol = float(_resolve(args, config, "tolerance", 1e-6))
    refine = int(_resolve(args, config, "refine", 0))
    literal_s = _resolve(args, config, "literal_s", None)
    jobs = int(_resolve(args, config, "jobs", 1))
    out_dir = _out_dir(args, config)

    try:
        cfg = SearchConfig(dims=dims, trials=trials, master_seed=seed, target=target,
                           tolerance=tol, lam=lam, n=n,
                           literal_s=None if literal_s is None else float(literal_s),
                           refine_iterations=refine)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = counterexample_search(cfg, jobs=jobs)
    fixture_paths = []
    for violation in report.violations:
        fixture_paths.append(write_fixture(out_dir, {
            "target": target, "lam": lam, "n": n, "tolerance": tol,
            "violation": violation}))
    results = report.to_dict()
    results["fixtures"] = [os.path.basename(p) for p in fixture_paths]
    resolved = results.pop("config")
    resolved.update({"jobs": jobs})
    path = _emit(out_dir, f"search-{target}-seed{seed}.json", "search",
                 resolved, results, argv)
    found = len(report.violations)
    print(f"search[{target}]: {found} violation(s) in {report.trials_run} trials"
          f"{f' (+{report.refine_used} refine steps)' if report.refine_used else ''}, "
          f"min slack {report.min_slack:.3e} -> {path}")
    if target == "integer_n" and found:
        print("search: violation in integer-index control mode (numerics bug)",
              file=sys.stderr)
        return EXIT_CONTROL_VIOLATION
    return EXIT_OK


# -------------------------------------------------------------------- fermion

def cmd_fermion(args, argv) -> int:
    from . import fermion

    config = _load_config(args.config, "fermion")
    seed = int(_resolve(args, config, "seed", 42))
    trials = int(_resolve(args, config, "trials", 50))
    max_p = int(_resolve(args, config, "max_components", 5))
    lams = _resolve(args, config, "lam", "0.1,1,6,10")
    lams = _parse_float_list(lams) if isinstance(lams, str) else list(lams)
    cutoff = float(_resolve(args, config, "cutoff", 1.0))
    tol = float(_resolve(args, config, "tolerance", 1e-10))
    witness_trials = int(_resolve(args, config, "witness_trials", 100))
    out_dir = _out_dir(args, config)

    explicit_sets = _resolve(args, config, "sets", None)
    rng = np.random.default_rng(seed)
    if explicit_sets is not None:
        try:
            test_sets = [fermion.IntervalSet.from_pairs(pairs, cutoff=cutoff)
                         for pairs in explicit_sets]
        except (fermion.IntervalError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad interval sets: {exc}") from exc
        if any(s.num_intervals > 8 for s in test_sets):
            raise ConfigError("interval sets limited to 8 components (permutation sum)")
    else:
        test_sets = []
        for _ in range(trials):
            p = int(rng.integers(1, max_p + 1))
            pts = np.sort(rng.uniform(0.0, 10.0, 2 * p))
            while np.min(np.diff(pts)) < 1e-3:
                pts = np.sort(rng.uniform(0.0, 10.0, 2 * p))
            test_sets.append(fermion.IntervalSet(lefts=pts[0::2], rights=pts[1::2],
                                                 cutoff=cutoff))
    rows = []
    worst = {"wick_cauchy": 0.0, "duality": 0.0, "vertex": 0.0}
    calib = fermion.IntervalSet.from_pairs([(1.0, 2.0)], cutoff=cutoff)
    vertex_const = {lam: fermion.gaussian_vertex_correlator(
        fermion.ChargeConfiguration.from_intervals(calib, lam))
        + lam * fermion.entropy(calib) for lam in lams}
    for t, intervals in enumerate(test_sets):
        p = intervals.num_intervals
        s_val = fermion.entropy(intervals)
        log_c = p * math.log(1.0 / (2.0 * math.pi * cutoff))
        duality = abs(fermion.log_correlator_cauchy(intervals) + 6.0 * s_val - log_c)
        wick = fermion.correlator_wick(intervals)
        cauchy = fermion.correlator_cauchy(intervals)
        wick_dev = abs(wick - cauchy) / abs(cauchy)
        vertex_dev = 0.0
        for lam in lams:
            log_v = fermion.gaussian_vertex_correlator(
                fermion.ChargeConfiguration.from_intervals(intervals, lam))
            vertex_dev = max(vertex_dev,
                             abs(log_v + lam * s_val - p * vertex_const[lam]))
        rows.append([t, p, s_val, wick_dev, duality, vertex_dev])
        worst["wick_cauchy"] = max(worst["wick_cauchy"], wick_dev)
        worst["duality"] = max(worst["duality"], duality)
        worst["vertex"] = max(worst["vertex"], vertex_dev)

    witness_min = np.inf
    if explicit_sets is not None:
        # divisibility witnesses need half-line sets; skip otherwise
        if all(s.lefts.min() > 0 for s in test_sets) and len(test_sets) >= 2:
            for lam in lams:
                record = fermion.divisibility_witness(test_sets, lam)
                scale = max(np.linalg.norm(record.entries, 2), np.finfo(float).tiny)
                witness_min = min(witness_min, record.min_eigenvalue / scale)
    else:
        for t in range(witness_trials):
            sets = []
            for _ in range(int(rng.integers(2, 4))):
                p = int(rng.integers(1, 3))
                pts = np.sort(rng.uniform(0.1, 20.0, 2 * p))
                while np.min(np.diff(pts)) < 1e-2:
                    pts = np.sort(rng.uniform(0.1, 20.0, 2 * p))
                sets.append(fermion.IntervalSet(lefts=pts[0::2], rights=pts[1::2],
                                                cutoff=cutoff))
            for lam in lams:
                record = fermion.divisibility_witness(sets, lam)
                scale = max(np.linalg.norm(record.entries, 2), np.finfo(float).tiny)
                witness_min = min(witness_min, record.min_eigenvalue / scale)

    csv_path = write_csv(os.path.join(out_dir, f"fermion-identities-seed{seed}.csv"),
                         ["trial", "components", "entropy", "wick_cauchy_rel",
                          "duality_residual", "vertex_residual"], rows)
    resolved = {"seed": seed, "trials": trials, "max_components": max_p,
                "lam": lams, "cutoff": cutoff, "tolerance": tol,
                "witness_trials": witness_trials,
                "sets": explicit_sets}
    witness_ran = bool(np.isfinite(witness_min))
    passed = (worst["wick_cauchy"] <= tol and worst["duality"] <= tol
              and worst["vertex"] <= 1e-9
              and (not witness_ran or witness_min >= -1e-10))
    results = {"worst_residuals": worst,
               "divisibility_min_normalized_eigenvalue":
                   float(witness_min) if witness_ran else None,
               "csv": os.path.basename(csv_path), "passed": passed}
    path = _emit(out_dir, f"fermion-seed{seed}.json", "fermion", resolved, results, argv)
    witness_note = f"{witness_min:.2e}" if witness_ran else "skipped"
    print(f"fermion: worst wick/cauchy {worst['wick_cauchy']:.2e}, duality "
          f"{worst['duality']:.2e}, vertex {worst['vertex']:.2e}, divisibility min "
          f"{witness_note} -> {path}")
    return EXIT_OK if passed else EXIT_NUMERICS


# ------------------------------------------------------------------------- kl

def cmd_kl(args, argv) -> int:
    from .spectral import (EntropyCurve, SpectralDensity, decay_rate,
                           derivative_checks, fit_spectral, forward)

    config = _load_config(args.config, "kl")
    seed = int(_resolve(args, config, "seed", 42))
    lam = float(_resolve(args, config, "lam", 1.0))
    grid_points = int(_resolve(args, config, "grid_points", 60))
    ridge = float(_resolve(args, config, "ridge", 0.0))
    tol = float(_resolve(args, config, "tolerance", 1e-6))
    input_csv = _resolve(args, config, "input", None)
    out_dir = _out_dir(args, config)

    if input_csv:
        xs, s_vals = read_xy_csv(input_csv)
        curve = EntropyCurve(x=xs, s=s_vals, lam=lam)
        truth = None
        p_lo = 0.03 / curve.x.max()
        p_hi = 40.0 / curve.x.min()
        grid = np.logspace(np.log10(p_lo ** 2), np.log10(p_hi ** 2), grid_points)
    else:
        # built-in round-trip fixture: two spectral spikes on the fit grid
        xs = np.logspace(-1, 0.7, 40)
        grid = np.logspace(-2, 2, grid_points)
        spikes = SpectralDensity(p2_grid=grid[[grid_points // 3, grid_points // 2]],
                                 weights=np.array([0.5, 0.3]))
        y = forward(spikes, xs)
        curve = EntropyCurve(x=xs, s=-np.log(y) / lam, lam=lam)
        truth = spikes
    density, fit_report = fit_spectral(curve, grid, ridge=ridge)
    deriv = derivative_checks(curve, tol=1e-6)
    gap_edge = math.sqrt(density.p2_grid[np.flatnonzero(density.weights)[0]]) \
        if np.any(density.weights > 0) else 0.0
    rate = None
    if gap_edge > 0:
        try:
            rate = decay_rate(density, (25.0 / gap_edge, 50.0 / gap_edge))
        except ValueError:
            rate = None

    resolved = {"seed": seed, "lam": lam, "grid_points": grid_points, "ridge": ridge,
                "tolerance": tol, "input": input_csv}
    results = {
        "grid_p2": density.p2_grid.tolist(),
        "weights": density.weights.tolist(),
        "residual_relative": fit_report.residual_relative,
        "conditioning_flag": fit_report.conditioning_flag,
        "decay_rate_estimate": rate,
        "derivative_report": {"increasing": deriv.increasing,
                              "concave": deriv.concave,
                              "c_theorem": deriv.c_theorem},
        "round_trip": truth is not None,
    }
    passed = fit_report.residual_relative <= tol if truth is not None else True
    results["passed"] = passed
    path = _emit(out_dir, f"kl-seed{seed}.json", "kl", resolved, results, argv)
    print(f"kl: residual {fit_report.residual_relative:.3e}, increasing="
          f"{deriv.increasing} concave={deriv.concave} -> {path}")
    return EXIT_OK if passed else EXIT_NUMERICS


# ------------------------------------------------------------------------ cft

def cmd_cft(args, argv) -> int:
    from .cft import (CrossRatioFunction, check_derivative_inequality,
                      check_midpoint_inequality, z_point)

    config = _load_config(args.config, "cft")
    seed = int(_resolve(args, config, "seed", 42))
    n = int(_resolve(args, config, "n", 2))
    central_charge = float(_resolve(args, config, "central_charge", 1.0))
    grid_points = int(_resolve(args, config, "grid_points", 1000))
    num_pairs = int(_resolve(args, config, "pairs", 1000))
    tol = float(_resolve(args, config, "tolerance", 1e-10))
    f_table = _resolve(args, config, "f_table", None)
    out_dir = _out_dir(args, config)

    if f_table:
        xs, fs = read_xy_csv(f_table)
        func = CrossRatioFunction.from_table(xs, fs, name=os.path.basename(f_table))
    else:
        func = CrossRatioFunction.ones()
    q = central_charge / 6.0 * (n - 1.0 / n)
    lo = max(func.domain[0] + 1e-4, 1e-3)
    hi = min(func.domain[1] - 1e-4, 1.0 - 1e-3)
    grid = np.linspace(lo, hi, grid_points)
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(lo, hi, size=(num_pairs, 2))
    deriv = check_derivative_inequality(func, q, grid, tol=tol)
    midpoint = check_midpoint_inequality(func, q, pairs, tol=tol)
    z_identity = max(abs(z_point(x, x) - x) for x in grid[:: max(1, grid_points // 32)])

    csv_path = write_csv(os.path.join(out_dir, f"cft-slack-seed{seed}.csv"),
                         ["x", "derivative_slack"],
                         zip(grid.tolist(), deriv.slack.tolist()))
    resolved = {"seed": seed, "n": n, "central_charge": central_charge,
                "grid_points": grid_points, "pairs": num_pairs,
                "tolerance": tol, "f_table": f_table}
    results = {
        "f_name": func.name,
        "q": q,
        "f_validation": func.validate(),
        "derivative": {"passed": deriv.passed, "min_slack": deriv.min_slack,
                       "fd_error": deriv.fd_error,
                       "grid": grid.tolist(), "slack": deriv.slack.tolist()},
        "midpoint": {"passed": midpoint.passed, "min_slack": midpoint.min_slack,
                     "pairs": pairs.tolist(), "slack": midpoint.slack.tolist()},
        "z_identity_deviation": z_identity,
        "csv": os.path.basename(csv_path),
        "passed": deriv.passed and midpoint.passed and z_identity == 0.0,
    }
    path = _emit(out_dir, f"cft-seed{seed}.json", "cft", resolved, results, argv)
    print(f"cft[{func.name}]: derivative {'PASS' if deriv.passed else 'FAIL'} "
          f"(min {deriv.min_slack:.3e}), midpoint {'PASS' if midpoint.passed else 'FAIL'} "
          f"(min {midpoint.min_slack:.3e}) -> {path}")
    return EXIT_OK if results["passed"] else EXIT_NUMERICS


# ----------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpentropy",
        description="Reflection-positivity entropy inequality toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV_VAR} or ./reports)")
        p.add_argument("--tolerance", type=float, help="pass/fail tolerance")

    p = sub.add_parser("gram-sweep", help="PSD sweep of integer-index Gram matrices")
    common(p)
    p.add_argument("--trials", type=int, help="number of random instances")
    p.add_argument("--dims", help="pool of splits, e.g. '2x2,2x3,4x4'")
    p.add_argument("--subsystems", help="pool of subsystem counts, e.g. '2,3,4'")
    p.add_argument("--n", help="Renyi index list, e.g. '2,3,4,5'")
    p.add_argument("--jobs", type=int, help="parallel workers")

    p = sub.add_parser("search", help="randomized counterexample search")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--dims", help="one split per subsystem, e.g. '2x2,2x2,2x2'")
    p.add_argument("--target", choices=["integer_n", "entropy_n1", "schur_s_fraction"])
    p.add_argument("--lambda", "--lam", dest="lam", type=float,
                   help="exponent weight for entropy mode")
    p.add_argument("--n", type=int, help="Renyi index for integer/detB modes")
    p.add_argument("--refine", type=int, help="stochastic descent budget after the sweep")
    p.add_argument("--literal-s", type=float, dest="literal_s",
                   help="also check a literal fractional entrywise power")
    p.add_argument("--jobs", type=int)

    p = sub.add_parser("fermion", help="free-fermion identity and divisibility checks")
    common(p)
    p.add_argument("--trials", type=int, help="random interval sets")
    p.add_argument("--max-components", type=int, dest="max_components")
    p.add_argument("--lambda", "--lam", dest="lam",
                   help="lambda list, e.g. '0.1,1,6,10'")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--witness-trials", type=int, dest="witness_trials")

    p = sub.add_parser("kl", help="spectral representation fit and derivative checks")
    common(p)
    p.add_argument("--input", help="CSV of (x, S) samples; default built-in fixture")
    p.add_argument("--lambda", "--lam", dest="lam", type=float)
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--ridge", type=float)

    p = sub.add_parser("cft", help="two-interval cross-ratio inequality checks")
    common(p)
    p.add_argument("--f-table", dest="f_table", help="CSV of (x, F) pairs; default F=1")
    p.add_argument("--n", type=int)
    p.add_argument("--central-charge", type=float, dest="central_charge")
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--pairs", type=int)

    return parser


COMMANDS = {
    "gram-sweep": cmd_gram_sweep,
    "search": cmd_search,
    "fermion": cmd_fermion,
    "kl": cmd_kl,
    "cft": cmd_cft,
}


def main(argv: list | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.subcommand](args, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
