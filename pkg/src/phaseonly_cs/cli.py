"""Command-line front end: demo trials, SPSR sweeps, RIP diagnostics.

Configuration can come from a JSON file (``--config``), from flags, or both;
flags always win. A manifest JSON is written next to every result file with
the full resolved configuration, so any output can be reproduced exactly from
its manifest (``--config run.manifest.json`` is accepted directly). Exit
codes: 0 success, 2 usage or configuration error, 3 internal failure.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click
import numpy as np

from . import __version__
from .admm import SolverOptions
from .experiments import TrialConfig, run_trial, sweep_k, sweep_m
from .model import (SensingMatrix, estimate_rip_deviation, exact_rip_deviation,
                    generate_sensing_matrix)
from .output import (write_manifest, write_sweep_csv, write_sweep_svg,
                     write_trial_csv)
from .recovery import MethodId

#: Environment variable consulted when neither ``--seed`` nor the config file
#: provides one.
SEED_ENV_VAR = "PHASEONLY_CS_SEED"

_SOLVER_KEYS = ("rho", "eps_abs", "eps_rel", "max_iter", "strict_imag",
                "adapt_rho", "relax")
_CONFIG_KEYS = ("n", "m", "k", "mode", "corruption_mean",
                "corruption_variance", "methods", "base_seed", "fixed_phi",
                "solver", "sweep")


class _InternalError(click.ClickException):
    exit_code = 3


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config {path} must hold a JSON object")
    # a manifest is accepted wherever a config is
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise click.UsageError(
            f"config {path} has unknown keys: {', '.join(sorted(unknown))}")
    return data


def _resolve_seed(flag_value, config):
    if flag_value is not None:
        return flag_value
    if "base_seed" in config:
        return int(config["base_seed"])
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(
                f"{SEED_ENV_VAR} must be an integer, got {env!r}")
    return 0


def _resolve_methods(flag_value, config):
    raw = None
    if flag_value:
        raw = [part.strip() for part in flag_value.split(",") if part.strip()]
    elif "methods" in config:
        raw = config["methods"]
    if raw is None:
        return (MethodId.SBP, MethodId.POBP, MethodId.POSSR)
    try:
        return tuple(MethodId(item) for item in raw)
    except ValueError as exc:
        raise click.UsageError(f"unknown method: {exc}")


def _resolve_solver(config, strict_imag, rho, relax, max_iter):
    fields = dict(config.get("solver", {}))
    unknown = set(fields) - set(_SOLVER_KEYS)
    if unknown:
        raise click.UsageError(
            f"solver config has unknown keys: {', '.join(sorted(unknown))}")
    if strict_imag is not None:
        fields["strict_imag"] = strict_imag == "on"
    if rho is not None:
        fields["rho"] = rho
    if relax is not None:
        fields["relax"] = relax
    if max_iter is not None:
        fields["max_iter"] = max_iter
    try:
        return SolverOptions(**fields)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"invalid solver options: {exc}")


def _build_trial_config(config, n, m, k, mode, seed, methods, strict_imag,
                        rho, relax, max_iter, corruption_mean,
                        corruption_variance, fixed_phi):
    def pick(flag, key, default):
        if flag is not None:
            return flag
        return config.get(key, default)

    try:
        return TrialConfig(
            n=int(pick(n, "n", 100)),
            m=int(pick(m, "m", 100)),
            k=int(pick(k, "k", 5)),
            mode=str(pick(mode, "mode", "complex")),
            corruption_mean=float(pick(corruption_mean, "corruption_mean", 1.0)),
            corruption_variance=float(
                pick(corruption_variance, "corruption_variance", 0.5)),
            methods=_resolve_methods(methods, config),
            solver=_resolve_solver(config, strict_imag, rho, relax, max_iter),
            base_seed=_resolve_seed(seed, config),
            fixed_phi=bool(pick(fixed_phi if fixed_phi else None,
                                "fixed_phi", False)),
        )
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc))


def _config_snapshot(cfg: TrialConfig) -> dict:
    return {
        "n": cfg.n,
        "m": cfg.m,
        "k": cfg.k,
        "mode": cfg.mode,
        "corruption_mean": cfg.corruption_mean,
        "corruption_variance": cfg.corruption_variance,
        "methods": [m.value for m in cfg.methods],
        "base_seed": cfg.base_seed,
        "fixed_phi": cfg.fixed_phi,
        "solver": {
            "rho": cfg.solver.rho,
            "eps_abs": cfg.solver.eps_abs,
            "eps_rel": cfg.solver.eps_rel,
            "max_iter": cfg.solver.max_iter,
            "strict_imag": cfg.solver.strict_imag,
            "adapt_rho": cfg.solver.adapt_rho,
            "relax": cfg.solver.relax,
        },
    }


def _write_run_manifest(path, command, snapshot, outputs, duration):
    write_manifest(path, {
        "tool": "phaseonly-cs",
        "version": __version__,
        "command": command,
        "config": snapshot,
        "outputs": [os.path.basename(p) for p in outputs],
        "duration_seconds": round(duration, 3),
    })


def _common_options(fn):
    decorators = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="JSON config file; flags override its values."),
        click.option("--n", type=int, default=None, help="Signal length N."),
        click.option("--k", type=int, default=None, help="Sparsity K."),
        click.option("--mode", type=click.Choice(["real", "complex"]),
                     default=None, help="Signal and matrix scalar field."),
        click.option("--seed", type=int, default=None,
                     help=f"Base seed (falls back to ${SEED_ENV_VAR}, then 0)."),
        click.option("--methods", type=str, default=None,
                     help="Comma-separated subset of sbp,pobp,possr."),
        click.option("--strict-imag", type=click.Choice(["on", "off"]),
                     default=None, help="Pin rotated imaginary parts to zero."),
        click.option("--rho", type=float, default=None,
                     help="ADMM penalty parameter."),
        click.option("--relax", type=float, default=None,
                     help="ADMM over-relaxation factor in [1, 2)."),
        click.option("--max-iter", type=int, default=None,
                     help="ADMM iteration cap."),
        click.option("--corruption-mean", type=float, default=None),
        click.option("--corruption-variance", type=float, default=None),
        click.option("--fixed-phi", is_flag=True, default=False,
                     help="Share one sensing matrix across all trials."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False),
                     default=".", help="Output directory."),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="phaseonly-cs")
def main():
    """Support recovery from phase-only corrupted measurements."""


@main.command()
@_common_options
@click.option("--m", type=int, default=None, help="Measurement count M.")
def trial(config_path, n, k, mode, seed, methods, strict_imag, rho, relax,
          max_iter, corruption_mean, corruption_variance, fixed_phi,
          out_dir, m):
    """Run one seeded trial and write truth plus estimates to trial.csv."""
    config = _load_config(config_path)
    cfg = _build_trial_config(config, n, m, k, mode, seed, methods,
                              strict_imag, rho, relax, max_iter,
                              corruption_mean, corruption_variance, fixed_phi)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "trial.csv")
    started = time.perf_counter()
    try:
        result = run_trial(cfg, 0, keep_estimates=True)
        write_trial_csv(csv_path, result.signal, result.estimates)
    except Exception as exc:
        raise _InternalError(f"trial failed: {exc}")
    _write_run_manifest(os.path.join(out_dir, "trial.manifest.json"), "trial",
                        _config_snapshot(cfg), [csv_path],
                        time.perf_counter() - started)
    for method in cfg.methods:
        click.echo(f"{method.value}: status={result.status[method]} "
                   f"success={str(result.success[method]).lower()}")
    click.echo(f"wrote {csv_path}")


@main.command()
@click.argument("axis", type=click.Choice(["k", "m"]))
@_common_options
@click.option("--m", type=int, default=None,
              help="Fixed measurement count (k-axis sweeps).")
@click.option("--from", "start", type=int, default=None,
              help="First grid value.")
@click.option("--to", "stop", type=int, default=None,
              help="Last grid value (inclusive).")
@click.option("--step", type=int, default=None, help="Grid stride.")
@click.option("--trials", type=int, default=None,
              help="Monte Carlo trials per grid point.")
@click.option("--jobs", type=int, default=None,
              help="Worker processes (results are identical at any value).")
@click.option("--svg", "want_svg", is_flag=True, default=False,
              help="Also render the sweep as a standalone SVG plot.")
def sweep(axis, config_path, n, k, mode, seed, methods, strict_imag, rho,
          relax, max_iter, corruption_mean, corruption_variance, fixed_phi,
          out_dir, m, start, stop, step, trials, jobs, want_svg):
    """Sweep SPSR over a K or M grid and write sweep_<axis>.csv."""
    config = _load_config(config_path)
    sweep_cfg = dict(config.get("sweep", {}))
    if sweep_cfg.get("axis", axis) != axis:
        raise click.UsageError(
            f"config sweeps axis {sweep_cfg['axis']!r} but command says {axis!r}")

    def pick(flag, key, default=None):
        if flag is not None:
            return flag
        return sweep_cfg.get(key, default)

    start = pick(start, "from")
    stop = pick(stop, "to")
    step = pick(step, "step", 1)
    trials = pick(trials, "trials")
    jobs = pick(jobs, "jobs", 1)
    if start is None or stop is None:
        raise click.UsageError("sweep needs --from and --to (or a config sweep block)")
    if trials is None:
        raise click.UsageError("sweep needs --trials (or a config sweep block)")
    if step < 1:
        raise click.UsageError(f"--step must be positive, got {step}")
    if trials < 1:
        raise click.UsageError(f"--trials must be positive, got {trials}")
    if jobs < 1:
        raise click.UsageError(f"--jobs must be positive, got {jobs}")
    grid = list(range(int(start), int(stop) + 1, int(step)))
    if not grid:
        raise click.UsageError(f"empty grid from {start} to {stop} step {step}")

    cfg = _build_trial_config(config, n, m, k, mode, seed, methods,
                              strict_imag, rho, relax, max_iter,
                              corruption_mean, corruption_variance, fixed_phi)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"sweep_{axis}.csv")
    outputs = [csv_path]
    started = time.perf_counter()
    try:
        if axis == "k":
            result = sweep_k(cfg, grid, int(trials), jobs=int(jobs))
        else:
            result = sweep_m(cfg, grid, int(trials), jobs=int(jobs))
        write_sweep_csv(csv_path, result)
        if want_svg:
            svg_path = os.path.join(out_dir, f"sweep_{axis}.svg")
            write_sweep_svg(svg_path, result,
                            title=f"support recovery vs {axis.upper()}")
            outputs.append(svg_path)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    except Exception as exc:
        raise _InternalError(f"sweep failed: {exc}")
    snapshot = _config_snapshot(cfg)
    snapshot["sweep"] = {"axis": axis, "from": int(start), "to": int(stop),
                         "step": int(step), "trials": int(trials),
                         "jobs": int(jobs)}
    _write_run_manifest(os.path.join(out_dir, f"sweep_{axis}.manifest.json"),
                        "sweep", snapshot, outputs,
                        time.perf_counter() - started)
    for path in outputs:
        click.echo(f"wrote {path}")


@main.command("rip-check")
@click.option("--m", type=int, default=100, help="Measurement count M.")
@click.option("--n", type=int, default=100, help="Signal length N.")
@click.option("--k", type=int, default=4, help="Sparsity K.")
@click.option("--trials", type=int, default=1000,
              help="Random k-sparse probes for the estimate.")
@click.option("--seed", type=int, default=None,
              help=f"Base seed (falls back to ${SEED_ENV_VAR}, then 0).")
@click.option("--mode", type=click.Choice(["real", "complex"]),
              default="complex")
@click.option("--identity", "use_identity", is_flag=True, default=False,
              help="Check the identity matrix instead of a random draw.")
@click.option("--exhaustive", is_flag=True, default=False,
              help="Exact deviation over all size-k supports (small n only).")
def rip_check(m, n, k, trials, seed, mode, use_identity, exhaustive):
    """Estimate the restricted-isometry deviation of a sensing matrix."""
    if trials < 1:
        raise click.UsageError(f"--trials must be positive, got {trials}")
    if not 1 <= k <= n:
        raise click.UsageError(f"--k must lie in [1, n], got k={k} n={n}")
    base_seed = _resolve_seed(seed, {})
    try:
        rng = np.random.default_rng(base_seed)
        if use_identity:
            phi = SensingMatrix(np.eye(n), mode="real", provenance="identity")
        else:
            phi = generate_sensing_matrix(m, n, mode, rng)
        if exhaustive:
            delta = exact_rip_deviation(phi, k)
        else:
            delta = estimate_rip_deviation(phi, k, trials, rng)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    except Exception as exc:
        raise _InternalError(f"rip check failed: {exc}")
    click.echo("delta_hat=%.6g" % delta)


if __name__ == "__main__":
    main()
