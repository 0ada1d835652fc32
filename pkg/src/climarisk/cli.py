"""Command-line front end.

Exit codes: 0 success, 1 stage failure, 2 invalid config,
3 comparison matrix failed the consistency gate.
"""
import logging
import os
import sys

import click

from . import __version__
from ._jit import backend_name
from .config import load_config
from .errors import ConfigError
from .pipelines import EXIT_CONFIG, RUNNERS


def _setup_logging():
    level = os.environ.get("CLIMARISK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _load(config, seed, out, pipeline=None):
    try:
        cfg = load_config(config, seed=seed, output_dir=out)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if pipeline is not None and cfg.pipeline != pipeline:
        click.echo(f"error: config is for pipeline {cfg.pipeline!r}, not {pipeline!r}",
                   err=True)
        sys.exit(EXIT_CONFIG)
    return cfg


def _run_command(pipeline):
    def run(config, seed, out, threads, allow_inconsistent=False):
        cfg = _load(config, seed, out, pipeline)
        kwargs = {"threads": threads}
        if pipeline == "preserve":
            kwargs["allow_inconsistent"] = allow_inconsistent
        summary = RUNNERS[pipeline](cfg, **kwargs)
        for st in summary.stages:
            if st["status"] == "failed":
                click.echo(f"stage {st['name']} failed: {st['error']}", err=True)
        click.echo(f"{pipeline}: {summary.status} -> "
                   f"{os.path.join(cfg.output_dir, 'summary.json')}")
        sys.exit(summary.exit_code)

    if pipeline == "preserve":
        run = click.option("--allow-inconsistent", is_flag=True, default=False,
                           help="Continue when the comparison matrix has CR > 0.1.")(run)
    run = click.option("--threads", type=click.IntRange(1, 256), default=1,
                       show_default=True)(run)
    run = click.option("--out", type=click.Path(file_okay=False), default=None,
                       help="Output directory (overrides config output_dir).")(run)
    run = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                       help="Override the config seed.")(run)
    run = click.option("--config", "config", required=True,
                       type=click.Path(dir_okay=False), help="JSON run configuration.")(run)
    return click.command("run")(run)


@click.group()
@click.version_option(__version__, prog_name="climarisk")
def main():
    """Climate-risk decision pipelines over CSV indicator panels."""
    _setup_logging()


for _name, _help in (("insure", "SMOTE + SVM insurability with weather sweeps."),
                     ("develop", "K-means siting of real-estate development."),
                     ("preserve", "TOPSIS-ORM/AHP landmark preservation scoring.")):
    _grp = click.Group(_name, help=_help)
    _grp.add_command(_run_command(_name))
    main.add_command(_grp)


@main.command()
@click.option("--config", "config", required=True, type=click.Path(dir_okay=False))
def validate(config):
    """Check a config file without running anything."""
    cfg = _load(config, None, None)
    click.echo(f"ok: {cfg.pipeline} config is valid")


@main.command()
def version():
    """Print tool version and kernel backend."""
    click.echo(f"climarisk {__version__} ({backend_name()} kernels)")


if __name__ == "__main__":  # pragma: no cover
    main()
