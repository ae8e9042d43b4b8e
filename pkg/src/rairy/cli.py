"""Command-line front end: kernel grids, F_r tables, Monte-Carlo edge
statistics, equilibrium data and the identity suites.

Exit codes: 0 success, 1 numerical failure, 2 validation failure.
Options may also come from RAIRY_<COMMAND>_<OPTION> environment variables
or from a flat YAML/JSON config file given with --config.
"""
from __future__ import annotations

import json
import sys

import click
import numpy as np
import yaml

from . import __version__

EXIT_NUMERICAL = 1
EXIT_VALIDATION = 2


def _numerical_errors():
    from .contours import QuadratureError
    from .equilibrium import AmbiguousRegimeError, NotOneCutError
    from .mop_oracle import PrecisionInsufficientError
    return (QuadratureError, NotOneCutError, AmbiguousRegimeError,
            PrecisionInsufficientError, FloatingPointError, RuntimeError,
            ArithmeticError)


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except _numerical_errors() as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            ctx.exit(EXIT_NUMERICAL)
        except ValueError as exc:
            click.echo(f"invalid input: {exc}", err=True)
            ctx.exit(EXIT_VALIDATION)


def _load_config(ctx, path):
    if path is None:
        return
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict) or any(isinstance(v, (dict, list))
                                         for v in data.values()):
        raise click.BadParameter("config must be a flat key-value mapping",
                                 param_hint="--config")
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    known = {}
    unused = set(data)
    for name, cmd in ctx.command.commands.items():
        params = {p.name for p in cmd.params}
        known[name] = {k: v for k, v in data.items() if k in params}
        unused -= set(known[name])
    if unused:
        raise click.BadParameter(f"unknown config keys: {sorted(unused)}",
                                 param_hint="--config")
    ctx.default_map = known


@click.group(cls=_Group, context_settings={"auto_envvar_prefix": "RAIRY",
                                           "show_default": True})
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              help="Flat YAML/JSON file of option defaults.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, config):
    """r-Airy kernel, deformed Tracy-Widom laws and edge statistics."""
    _load_config(ctx, config)


def _emit(text: str, output: str):
    if output == "-":
        click.echo(text, nl=False)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _csv(header, rows, fmt="{:.15g}"):
    lines = ["# schema=1", ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt.format(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _json(header, rows):
    return json.dumps({"schema": 1, "columns": list(header),
                       "rows": [list(map(_plain, r)) for r in rows]},
                      indent=1) + "\n"


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _table(header, rows, fmt):
    return _csv(header, rows) if fmt == "csv" else _json(header, rows)


def _grid(lo, hi, step, what):
    if not step > 0:
        raise click.BadParameter("step must be positive", param_hint=what)
    if hi < lo:
        raise click.BadParameter("max must be >= min", param_hint=what)
    m = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(m + 1)


_output = click.option("--output", "-o", default="-",
                       help="Output file ('-' for stdout).")
_format = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                       default="csv")


@main.command("kernel-grid")
@click.option("--r", type=click.IntRange(min=0), default=1)
@click.option("--tau", type=float, default=0.0)
@click.option("--min", "zmin", type=float, default=-4.0)
@click.option("--max", "zmax", type=float, default=4.0)
@click.option("--step", type=float, default=0.5)
@click.option("--tol", type=click.FloatRange(1e-13, 1e-4, max_open=True),
              default=1e-10)
@click.option("--oracle", type=click.Choice(["none", "airy"]), default="none",
              help="Add the classical Airy kernel as a comparison column (r=0).")
@_output
@_format
def kernel_grid(r, tau, zmin, zmax, step, tol, oracle, output, fmt):
    """r-Airy kernel on a square zeta grid: zeta_x,zeta_y,K,abs_err."""
    from .kernel import KernelParams, airy_kernel_classical, kernel_matrix
    z = _grid(zmin, zmax, step, "--step")
    if oracle == "airy" and r != 0:
        raise click.BadParameter("the Airy oracle applies to r=0 only",
                                 param_hint="--oracle")
    K, err = kernel_matrix(z, z, KernelParams(r=r, tau=tau, tol=tol),
                           return_error=True)
    header = ["zeta_x", "zeta_y", "K", "abs_err"]
    if oracle == "airy":
        header += ["K_airy", "diff"]
    rows = []
    for i, x in enumerate(z):
        for j, y in enumerate(z):
            row = [float(x), float(y), float(K[i, j]), float(err)]
            if oracle == "airy":
                ka = airy_kernel_classical(x, y)
                row += [ka, abs(ka - K[i, j])]
            rows.append(row)
    _emit(_table(header, rows, fmt), output)


@main.command("fr-cdf")
@click.option("--r", type=click.IntRange(min=0), default=0)
@click.option("--tau", type=float, default=0.0)
@click.option("--s-min", type=float, default=-5.0)
@click.option("--s-max", type=float, default=3.0)
@click.option("--step", type=float, default=0.25)
@click.option("--quad-order", type=click.IntRange(min=8), default=48)
@_output
@_format
def fr_cdf(r, tau, s_min, s_max, step, quad_order, output, fmt):
    """Deformed Tracy-Widom distribution F_r(s): s,F,est_error."""
    from .fredholm import fr_cdf_grid
    s = _grid(s_min, s_max, step, "--step")
    tab = fr_cdf_grid(s, r, tau, quad_order)
    rows = [[float(a), float(b), float(tab.est_error)]
            for a, b in zip(tab.s_grid, tab.F_values)]
    _emit(_table(["s", "F", "est_error"], rows, fmt), output)


@main.command("mc-edge")
@click.option("--n", type=click.IntRange(min=2), default=400)
@click.option("--r", type=click.IntRange(min=0), default=1)
@click.option("--a", type=float, default=None,
              help="Source strength; defaults to the critical value.")
@click.option("--draws", type=click.IntRange(min=1), default=1000)
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0)
@click.option("--summary", default=None,
              help="JSON file for tau, the KS distance and the DKW band.")
@_output
def mc_edge(n, r, a, draws, seed, summary, output):
    """Spiked GUE draws (top 10 eigenvalues) and the KS distance of the
    rescaled top eigenvalue to F_r(tau)."""
    from .ensemble import (EnsembleSpec, draws_to_csv, gaussian_equilibrium,
                           ks_distance, largest_eig_cdf, sample_many)
    from .fredholm import cdf_function
    if r > n:
        raise click.BadParameter("r must not exceed n", param_hint="--r")
    eq = gaussian_equilibrium()
    a = eq.a_c if a is None else a
    spec = EnsembleSpec(n, r, a, seed)
    samples = sample_many(spec, draws)
    tau = n ** (1.0 / 3.0) * (a - eq.a_c) / eq.c1
    ecdf = largest_eig_cdf(samples)
    ks = ks_distance(ecdf, cdf_function(r, tau))
    _emit(draws_to_csv(samples), output)
    info = {"schema": 1, "n": n, "r": r, "a": a, "tau": tau, "draws": draws,
            "seed": seed, "ks_distance": ks, "dkw_band_99": ecdf.dkw_band}
    text = json.dumps(info, indent=1, sort_keys=True) + "\n"
    if summary:
        with open(summary, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, err=True, nl=False)


@main.command("eq-measure")
@click.option("--potential", default="0,0,0.5",
              help="Coefficients of V, constant term first.")
@click.option("--a", type=float, default=None,
              help="Source strength for the regime report.")
@click.option("--n", type=click.IntRange(min=1), default=None,
              help="Matrix size; enables the near-critical report and tau.")
@_output
@_format
def eq_measure(potential, a, n, output, fmt):
    """Equilibrium endpoints, c1, a_c, beta_dot and the regime of a."""
    from .equilibrium import Potential, classify_regime, solve_one_cut
    try:
        V = Potential.parse(potential)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--potential")
    eq = solve_one_cut(V)
    out = {"alpha": eq.alpha, "beta": eq.beta, "ell1": eq.ell1, "c1": eq.c1,
           "a_c": eq.a_c, "beta_dot": eq.beta_dot}
    if a is not None:
        rep = classify_regime(eq, a, n)
        out.update({"a": a, "regime": rep.regime.value, "tau": rep.tau,
                    "a_star": rep.a_star, "b_star": rep.b_star})
    rows = [[k, "" if v is None else (f"{v:.15g}" if isinstance(v, float) else v)]
            for k, v in out.items()]
    if fmt == "csv":
        _emit(_csv(["key", "value"], rows), output)
    else:
        _emit(json.dumps({"schema": 1, **out}, indent=1) + "\n", output)


@main.command("verify")
@click.option("--suite", type=click.Choice(["fast", "full"]), default="fast")
def verify(suite):
    """Run the identity suites and print a pass/fail table."""
    from .verify import run_suite
    results = run_suite(suite)
    for res in results:
        click.echo(res.line())
    failed = [r for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()
