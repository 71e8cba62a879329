"""Command-line entry point.

Subcommands:

* ``run <config.json>``: execute a declarative experiment config and write
  CSV/JSON artifacts.  Exit 0 on pass, 1 on tolerance failure or scenario
  error, 2 on config/IO problems.
* ``list-registry``: print the registry distributions and curated scenarios.
* ``selftest``: run the built-in verification battery (closed-form curve
  and density reproduction, limit-table sweeps, decomposition checks,
  second-moment targets, Monte-Carlo closure) and write its artifacts.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, parse_config
from .errors import ConfigError
from .runner import run_experiment

__all__ = ["main", "selftest_config"]


def selftest_config(quick: bool = False) -> dict:
    """Built-in config covering the curated scenario families.

    quick mode shrinks sample counts and path counts; the executed code
    paths and the determinism guarantees are identical.
    """
    from .convergence import load_calibration
    from .scenarios import (decomposition_scenarios, second_moment_scenarios,
                            table1_scenarios)

    n_oracle = 10 ** 5 if quick else 10 ** 6
    n_paths = 64 if quick else 256
    n_grid = 16 if quick else 40
    n_mc = 10 ** 5 if quick else 10 ** 6
    calib = load_calibration()

    scenarios = [
        {"name": "curve_gauss_gauss", "job": "curve", "out": "curve_gg",
         "prior": {"kind": "gaussian"}, "noise": {"name": "gaussian"},
         "sigma": [0.5, 1.0], "tolerances": {"certificate": "strict"}},
        {"name": "fig_binary_normalized", "job": "normalized_density",
         "out": "fig_binary",
         "prior": {"kind": "binary", "p": 0.5}, "noise": {"name": "gaussian"},
         "sigma": [0.3, 0.5, 1.0], "grid_points": 1001},
        {"name": "density_gauss_gauss", "job": "density", "out": "dens_gg",
         "prior": {"kind": "gaussian"}, "noise": {"name": "gaussian"},
         "sigma": 1.0},
        {"name": "oracle_gauss_gauss", "job": "oracle", "out": "oracle_gg",
         "prior": {"kind": "gaussian"}, "noise": {"name": "gaussian"},
         "sigma": 1.0, "n": n_oracle, "seed": 321},
        {"name": "oracle_binary_half", "job": "oracle", "out": "oracle_binary",
         "prior": {"kind": "binary", "p": 0.5}, "noise": {"name": "gaussian"},
         "sigma": 0.4, "n": n_oracle, "seed": 322},
    ]

    prior_docs = {
        "discrete_binary_gaussian": {"kind": "binary", "p": 0.5},
        "bounded_continuous_gaussian": {"kind": "gaussian"},
        "abs_continuous_student_t": {"kind": "uniform", "lo": 0.0, "hi": 1.0},
        "mixture_atom_uniform_gaussian": {
            "kind": "mixture", "alpha": 0.5,
            "components": [{"kind": "point", "value": 0.0},
                           {"kind": "uniform", "lo": 2.0, "hi": 3.0}]},
    }
    noise_docs = {
        "abs_continuous_student_t": {"name": "student_t", "df": 3.0},
    }
    for key, entry in sorted(calib["table1"].items()):
        tol = max(2.0 * entry["max_terminal_deviation"], 1e-9)
        scenarios.append({
            "name": f"sweep_{key}", "job": "sweep", "out": f"sweep_{key}",
            "prior": prior_docs[key],
            "noise": noise_docs.get(key, {"name": "gaussian"}),
            "sigma_grid": {"hi": 1.0, "lo": 1e-3, "n": n_grid},
            "paths": n_paths, "seed": entry["base_seed"],
            "tolerances": {"terminal": tol}})

    decomp_docs = {
        "sep_atoms_uniform56": {
            "kind": "mixture", "alpha": 0.5,
            "components": [{"kind": "discrete", "atoms": [[-1.0, 0.5], [1.0, 0.5]]},
                           {"kind": "uniform", "lo": 5.0, "hi": 6.0}]},
        "sep_atom0_uniform23": prior_docs["mixture_atom_uniform_gaussian"],
        "nested_uniform01_uniform02": {
            "kind": "mixture", "alpha": 0.5,
            "components": [{"kind": "uniform", "lo": 0.0, "hi": 1.0},
                           {"kind": "uniform", "lo": 0.0, "hi": 2.0}]},
    }
    for key, entry in sorted(calib["decomposition"].items()):
        tol = 1e-3 if entry["separated"] else max(2.0 * entry["max_terminal_deviation"], 1e-9)
        scenarios.append({
            "name": f"decomp_{key}", "job": "decomposition", "out": f"decomp_{key}",
            "prior": decomp_docs[key], "noise": {"name": "gaussian"},
            "sigma_grid": {"hi": 1.0, "lo": 1e-3, "n": n_grid},
            "paths": n_paths, "seed": entry["base_seed"],
            "tolerances": {"terminal": tol}})

    for sc in second_moment_scenarios():
        tol = ({"target": sc.target, "atol": 1e-3} if sc.target == 0.0
               else {"target": sc.target, "rtol": 0.05})
        scenarios.append({
            "name": f"mmse_dim_{sc.key}", "job": "mmse_dimension",
            "out": f"mmse_dim_{sc.key}",
            "prior": prior_docs["mixture_atom_uniform_gaussian"]
            if sc.key == "alpha05_mixture"
            else ({"kind": "binary", "p": 0.5} if sc.alpha == 0.0
                  else {"kind": "gaussian"}),
            "noise": {"name": "gaussian"},
            "sigma": sc.sigma, "n": n_mc, "seed": sc.seed,
            "tolerances": tol})

    return {"version": 1, "scenarios": scenarios}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bayeserr",
        description="Estimation-error distributions and small-noise limits "
                    "for additive-noise Bayesian estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a JSON config document")
    p_run.add_argument("--out-dir", default="out")
    p_run.add_argument("--threads", type=int, default=0,
                       help="worker threads (default: all cores); results are "
                            "independent of the count")
    p_run.add_argument("--seed-override", type=int, default=None)

    sub.add_parser("list-registry", help="print registry distributions and scenarios")

    p_self = sub.add_parser("selftest", help="run the built-in verification battery")
    p_self.add_argument("--out-dir", default="selftest_out")
    p_self.add_argument("--threads", type=int, default=0)
    p_self.add_argument("--seed-override", type=int, default=None)
    p_self.add_argument("--quick", action="store_true",
                        help="reduced sample and path counts")

    args = parser.parse_args(argv)

    if args.command == "list-registry":
        _print_registry()
        return 0

    try:
        if args.command == "run":
            config = load_config(args.config)
        else:
            config = parse_config(selftest_config(quick=args.quick))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(config, args.out_dir, threads=args.threads,
                                seed_override=args.seed_override)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2

    for r in result.results:
        line = f"[{r.status:5s}] {r.name} ({r.job})"
        if r.message:
            line += f": {r.message}"
        print(line)
    print(f"summary: {result.summary_path} [{result.status}]")
    return result.exit_code


def _print_registry() -> None:
    from .scenarios import (decomposition_scenarios, density_scenarios,
                            second_moment_scenarios, table1_scenarios)

    print("noise families:")
    print("  gaussian                 standard Gaussian")
    print("  laplace                  unit-scale Laplace")
    print("  uniform [half_width]     uniform on (-h, h)")
    print("  student_t [df]           Student-t, df > 2")
    print("prior kinds:")
    print("  discrete{atoms}, point{value}, binary{p, lo, hi},")
    print("  gaussian{mean, sd}, uniform{lo, hi}, beta{a, b, lo, hi},")
    print("  mixture{alpha, components}")
    print("density scenarios:")
    for sc in density_scenarios():
        print(f"  {sc.key:26s} sigma={sc.sigma}")
    print("limit-table sweep rows:")
    for sc in table1_scenarios():
        print(f"  {sc.key:32s} row={sc.row}")
    print("decomposition scenarios:")
    for sc in decomposition_scenarios():
        kind = "mutually singular" if sc.separated else "nested supports"
        print(f"  {sc.key:32s} {kind}")
    print("second-moment scenarios:")
    for sc in second_moment_scenarios():
        print(f"  {sc.key:26s} target={sc.target}")


if __name__ == "__main__":
    sys.exit(main())
