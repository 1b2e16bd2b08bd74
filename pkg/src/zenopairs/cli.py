"""Command line front-end: ``zenopairs run|swap|transfer|zeno-scan|configs``."""

from __future__ import annotations

import sys
from importlib import resources

import click

from .experiment import (ConfigParseError, ConfigValidationError, emit_report, parse_config,
                         run_experiment)
from .zeno import ZeroSurvivalError

EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_ZERO_SURVIVAL = 5

BUNDLED = ("equal-couplings.cfg", "unequal-swap.cfg", "four-pair-transfer.cfg")


def bundled_config(name: str) -> str:
    return resources.files("zenopairs").joinpath("configs", name).read_text()


def _execute(text: str, fmt: str, out):
    try:
        cfg = parse_config(text)
    except ConfigParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except ConfigValidationError as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        report = run_experiment(cfg)
    except ZeroSurvivalError as exc:
        click.echo(f"zero survival: {exc}", err=True)
        sys.exit(EXIT_ZERO_SURVIVAL)
    data = emit_report(report, fmt)
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def _output_options(f):
    f = click.option("--out", "out", type=click.Path(dir_okay=False), default=None,
                     help="Write to this file instead of standard output.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv")(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Zeno-controlled evolution of 2M pairwise-coupled qubits."""


@main.command()
@click.argument("config")
@_output_options
def run(config, fmt, out):
    """Run an experiment config file (or a bundled config name)."""
    if config in BUNDLED:
        text = bundled_config(config)
    else:
        try:
            with open(config) as fh:
                text = fh.read()
        except OSError as exc:
            raise click.FileError(config, str(exc))
    _execute(text, fmt, out)


@main.command()
@click.option("--g1", type=float, required=True)
@click.option("--g2", type=float, required=True)
@click.option("--n", "n", type=int, default=None, help="Measurements during the freeze (ideal if omitted).")
@click.option("--alpha", default="sqrt(0.5)")
@click.option("--beta", default="sqrt(0.5)")
@click.option("--points", type=int, default=1)
@_output_options
def swap(g1, g2, n, alpha, beta, points, fmt, out):
    """Entanglement swap between a and A with unequal couplings."""
    text = f"""
[system]
pairs = 2
couplings = {g1!r}, {g2!r}
[initial]
preset = single-excitation
alpha = {alpha}
beta = {beta}
[protocol]
kind = swap
slices = {"ideal" if n is None else n}
[observables]
concurrence = a1-a2, A1-A2
fidelity = pulse-target
[sampling]
points = {points}
"""
    _execute(text, fmt, out)


@main.command()
@click.option("--m", "m", type=int, required=True, help="Number of pairs.")
@click.option("--active", required=True, help="Comma separated pairs receiving the pi pulse.")
@click.option("--n", "n", type=int, default=None, help="Measurements on frozen pairs (ideal if omitted).")
@click.option("--g", type=float, default=1.0)
@_output_options
def transfer(m, active, n, g, fmt, out):
    """Move the a-partition state onto a mixed partition (six-term input for M=4, W state otherwise)."""
    preset = "six-term" if m == 4 else "w-state"
    fids = "pulse-target" + (", transfer-display" if m == 4 and active.replace(" ", "") in ("1,2", "2,1") else "")
    excitation = " ; ".join(f"A{k}" for k in range(1, m + 1))
    text = f"""
[system]
pairs = {m}
couplings = {g!r}
[initial]
preset = {preset}
[protocol]
kind = transfer
active = {active}
slices = {"ideal" if n is None else n}
[observables]
fidelity = {fids}
excitation = {excitation}
[sampling]
points = 1
"""
    _execute(text, fmt, out)


@main.command("zeno-scan")
@click.option("--t", "t", default="1.0", help="Total time (g t with the default g = 1).")
@click.option("--n-list", "n_list", default="1,2,4,8,16,32,64,128,256,512,1024,2048,4096")
@click.option("--g", type=float, default=1.0)
@click.option("--alpha", default="sqrt(0.5)")
@click.option("--beta", default="sqrt(0.5)")
@_output_options
def zeno_scan(t, n_list, g, alpha, beta, fmt, out):
    """Convergence of the measured pair-2 run towards the frozen limit as N grows."""
    text = f"""
[system]
pairs = 2
couplings = {g!r}
[initial]
preset = single-excitation
alpha = {alpha}
beta = {beta}
[phase.1]
duration = {t}
mode.2 = zeno:1
[observables]
concurrence = a1-a2
fidelity = zeno-limit
[sweep]
parameter = slices
values = {n_list}
"""
    _execute(text, fmt, out)


@main.command()
@click.argument("name", required=False)
def configs(name):
    """List bundled configs, or print one."""
    if name is None:
        for n in BUNDLED:
            click.echo(n)
    else:
        click.echo(bundled_config(name), nl=False)


if __name__ == "__main__":
    main()
