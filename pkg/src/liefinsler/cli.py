"""Command-line driver: ``liefinsler <command> --scenario PATH [options]``.

Exit status: 0 when every check passes, 1 when some check fails, 2 for
invalid input (unreadable or malformed scenario, missing block, bad flag) and
3 when evaluation hits an inadmissible point or a singular metric.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import checks
from .algebroid import AlgebroidError
from .config import ENV_SEED, ENV_TOL
from .report import emit
from .scenario import ScenarioError, load_scenario, with_overrides
from .symcalc import DomainError, SingularMatrixError

EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 1, 2, 3


def _env(name: str, cast):
    raw = os.environ.get(name)
    if raw in (None, ""):
        return None
    try:
        return cast(raw)
    except ValueError:
        raise click.UsageError(f"environment variable {name}={raw!r} is not a valid {cast.__name__}") from None


def common(fn):
    opts = [
        click.option("--scenario", "scenario", required=True,
                     help="Scenario file, or the name of a bundled fixture."),
        click.option("--seed", type=int, default=None, help=f"Sampling seed (env {ENV_SEED})."),
        click.option("--points", type=click.IntRange(min=1), default=None, help="Number of sample points."),
        click.option("--tol", type=click.FloatRange(min=0.0), default=None,
                     help=f"Identity tolerance, absolute and relative (env {ENV_TOL})."),
        click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Write the report here instead of standard output."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def execute(command: str, scenario: str, seed, points, tol, fmt: str, out: Path | None, **opts) -> None:
    seed = seed if seed is not None else _env(ENV_SEED, int)
    tol = tol if tol is not None else _env(ENV_TOL, float)
    try:
        sc = with_overrides(load_scenario(scenario), seed=seed, points=points, tol=tol)
        report = checks.run(command, sc, **opts)
    except (ScenarioError, AlgebroidError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (DomainError, SingularMatrixError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    data = emit(report, fmt)
    if out is None:
        click.echo(data.decode("utf-8"), nl=False)
    else:
        out.write_bytes(data)
    sys.exit(0 if report.passed else EXIT_FAIL)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="liefinsler")
def main() -> None:
    """Identity checks for Finsler structures on Lie algebroids."""


def _simple(name: str, doc: str):
    @common
    def cmd(**kw):
        execute(name, **kw)

    cmd.__doc__ = doc
    main.command(name)(cmd)


_simple("verify-algebroid", "Structure equations of the anchor and structure functions.")
_simple("verify-finsler", "Finsler data: homogeneity, regularity, fundamental form, metric, gradient.")
_simple("spray", "Canonical spray and its energy identity.")
_simple("barthel", "Barthel endomorphism: homogeneity, torsion, conservativity.")
_simple("endo-report", "Tension, torsions, curvature and almost complex structure of the scenario endomorphism.")
_simple("berwald-derivative", "Berwald and Yano derivatives on the pullback bundle.")
_simple("identity-suite", "Every identity applicable to the scenario, plus derivative-engine checks.")


@main.command("connection")
@common
@click.option("--kind", type=click.Choice(checks.CONNECTION_KINDS), default="berwald-type", show_default=True)
@click.option("--torsion", is_flag=True, help="Check torsion components against the definition.")
@click.option("--curvature", is_flag=True, help="Check curvature coefficients against the definition.")
@click.option("--ricci", is_flag=True, help="Dump the mixed Ricci tensor.")
def connection(**kw):
    """A d-connection: coefficients and the identities it satisfies."""
    execute("connection", **kw)


@main.command("douglas")
@common
@click.option("--projective", default=None, metavar="EXPR",
              help="Fiber function f̃ (expression or scenario scalar name) for S ↦ S + f̃ C.")
def douglas(**kw):
    """Douglas tensor of the scenario spray and its projective invariance."""
    execute("douglas", **kw)


@main.command("classify")
@click.argument("kind", type=click.Choice(checks.CLASSIFY_KINDS))
@common
@click.option("--function", default="f", show_default=True, help="Scenario scalar used as the Wagner function.")
def classify(kind, **kw):
    """Check that the scenario's base connection has the given class."""
    execute("classify", kind=kind, **kw)


if __name__ == "__main__":  # pragma: no cover
    main()
