# shapemetrics/cli.py
"""
Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every flag can also
be set in a YAML file given with --config; flags on the command line win.
"""
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional, Sequence

import click
import sentry_sdk
import yaml
from pydantic import ValidationError

from shapemetrics.core.config import get_settings
# Import the logging setup module early to configure logging before other imports
import shapemetrics.core.logging

logger = shapemetrics.core.logging.get_logger(__name__)

from shapemetrics.pipeline import experiments as experiments_module
from shapemetrics.pipeline.cart import CartError
from shapemetrics.pipeline.experiments import ExperimentError, SplitError
from shapemetrics.pipeline.metrics import MetricsError, metric_vector
from shapemetrics.pipeline.rasterizer import RasterizeError, rasterize
from shapemetrics.pipeline.simulators import SimulationError, simulate
from shapemetrics.schemas.experiment import SuiteConfig, SuiteReport
from shapemetrics.schemas.metrics import METRIC_LABELS
from shapemetrics.schemas.points import GridSpec
from shapemetrics.schemas.scenario import VARIANTS, ScenarioSpec
from shapemetrics.schemas.tree import CvParams
from shapemetrics.utils import export

RUNTIME_ERRORS = (
    RasterizeError,
    MetricsError,
    SimulationError,
    CartError,
    ExperimentError,
    SplitError,
    export.ExportError,
    OSError,
)


# --------------------------------------------------------------------------- #
#  Helpers                                                                    #
# --------------------------------------------------------------------------- #
def _init_sentry() -> None:
    settings = get_settings()
    if settings.SENTRY_DSN and settings.ENVIRONMENT != "development":
        try:
            sentry_sdk.init(dsn=settings.SENTRY_DSN, environment=settings.ENVIRONMENT, send_default_pii=False)
            logger.info("Sentry initialized for environment: %s", settings.ENVIRONMENT)
        except Exception as e:
            logger.error("Failed to initialize Sentry: %s", e, exc_info=True)


@contextmanager
def _runtime_errors():
    """Turn domain and I/O failures into a one-line diagnostic and exit code 1."""
    try:
        yield
    except RUNTIME_ERRORS as exc:
        logger.debug("Command failed", exc_info=True)
        sentry_sdk.capture_exception(exc)
        raise click.ClickException(str(exc)) from exc


def _command_defaults(cmd: click.Command, data: dict) -> dict:
    """Map config keys, spelled like a command's flags, onto that command's parameter names."""
    defaults = {}
    for p in cmd.params:
        if not isinstance(p, click.Option):
            continue
        for opt in p.opts:
            key = opt.lstrip("-").replace("-", "_")
            if key in data:
                val = data[key]
                if p.multiple and not isinstance(val, (list, tuple)):
                    val = [val]
                defaults[p.name] = val
                break
    return defaults


def _load_config(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    try:
        data = yaml.safe_load(Path(value).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise click.BadParameter(f"cannot read config: {exc}", ctx=ctx, param=param)
    if not isinstance(data, dict):
        raise click.BadParameter("config file must contain a key: value mapping", ctx=ctx, param=param)
    data = {str(key).replace("-", "_"): val for key, val in data.items()}
    ctx.default_map = {name: _command_defaults(cmd, data) for name, cmd in cli.commands.items()}
    return value


def _grid(bins: Optional[int], bins_x: Optional[int], bins_y: Optional[int]) -> GridSpec:
    settings = get_settings()
    bx = bins_x or bins or settings.GRID_BINS_X
    by = bins_y or bins or settings.GRID_BINS_Y
    return GridSpec(bins_x=bx, bins_y=by)


def _bins_options(f):
    f = click.option("--bins-y", type=click.IntRange(min=1), default=None, help="Histogram bins along y.")(f)
    f = click.option("--bins-x", type=click.IntRange(min=1), default=None, help="Histogram bins along x.")(f)
    f = click.option("--bins", type=click.IntRange(min=1), default=None,
                     help="Histogram bins along both axes (default GRID_BINS_X/GRID_BINS_Y, 100).")(f)
    return f


def _report_options(f):
    f = click.option("--dump-tree", is_flag=True, help="Also write trees/<experiment>.json.")(f)
    f = click.option("--images", is_flag=True, help="Also write every simulated image to images/<experiment>/*.pgm.")(f)
    f = click.option("--images-per-class", type=click.IntRange(min=2), default=None,
                     help="Images simulated per class (default IMAGES_PER_CLASS, 100).")(f)
    f = click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
                     help="Output directory for results.csv, usage.csv and report.json.")(f)
    f = click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=None,
                     help="Master seed (default MASTER_SEED).")(f)
    return f


def _suite_config(seed, images_per_class, bins, bins_x, bins_y, experiments: Optional[Sequence[str]]) -> SuiteConfig:
    settings = get_settings()
    return SuiteConfig(
        master_seed=settings.MASTER_SEED if seed is None else seed,
        grid=_grid(bins, bins_x, bins_y),
        images_per_class=images_per_class or settings.IMAGES_PER_CLASS,
        train_fraction=settings.TRAIN_FRACTION,
        experiments=list(experiments) if experiments else None,
        tree_params=CvParams.from_settings(settings),
    )


def _write_report(report: SuiteReport, out_dir: str, dump_tree: bool) -> None:
    export.write_suite_outputs(report, out_dir, dump_trees=dump_tree)
    for r in report.results:
        click.echo(f"{r.name}: accuracy {r.accuracy:.4f} ({r.ci_low:.4f}, {r.ci_high:.4f}) n={r.n_validation}")
    used = [f"{METRIC_LABELS[name]} {count}" for name, count in report.usage.items() if count]
    if used:
        click.echo("splits per metric: " + ", ".join(used))
    for failure in report.failures:
        click.echo(f"{failure.experiment}: FAILED at {failure.stage}: {failure.message}", err=True)


# --------------------------------------------------------------------------- #
#  Commands                                                                   #
# --------------------------------------------------------------------------- #
@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=False, help="YAML file of flag values (flags override it).")
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool) -> None:
    """Shape metrics for 2D point data: simulate, rasterize, measure, classify."""
    shapemetrics.core.logging.set_level(logging.DEBUG if verbose else None)
    _init_sentry()


@cli.command("simulate")
@click.option("--family", type=click.Choice(sorted(VARIANTS)), required=True, help="Scenario family.")
@click.option("--variant", required=True, help="Family-specific variant, e.g. sine, major, cone, 3.")
@click.option("--n", "n_points", type=click.IntRange(min=1), default=1000, show_default=True, help="Number of points.")
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=0, show_default=True, help="Scenario seed.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file to write (stdout when omitted).")
def simulate_cmd(family: str, variant: str, n_points: int, seed: int, out: Optional[str]) -> None:
    """Write a simulated point set as an x,y CSV."""
    try:
        spec = ScenarioSpec(family=family, variant=variant, n_points=n_points, seed=seed)
    except ValidationError as exc:
        raise click.BadParameter(exc.errors()[0]["msg"], param_hint="--variant")
    with _runtime_errors():
        points = simulate(spec, get_settings())
        export.write_points_csv(points, out if out else click.get_text_stream("stdout"))


@cli.command("rasterize")
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False), required=True, help="x,y CSV input.")
@_bins_options
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Image file to write.")
@click.option("--format", "fmt", type=click.Choice(["pgm", "png"]), default=None,
              help="Image format (default: from the file extension, else pgm).")
def rasterize_cmd(input_path: str, bins, bins_x, bins_y, out: str, fmt: Optional[str]) -> None:
    """Turn a point CSV into a binary image."""
    fmt = fmt or ("png" if out.lower().endswith(".png") else "pgm")
    with _runtime_errors():
        img = rasterize(export.read_points_csv(input_path), _grid(bins, bins_x, bins_y))
        if fmt == "png":
            export.write_png(img, out)
        else:
            export.write_pgm(img, out)
    logger.info("Wrote %dx%d image with %d white pixels to %s", img.width, img.height, img.white_count, out)


@cli.command("metrics")
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False), required=True, help="x,y CSV input.")
@_bins_options
@click.option("--label", default=None, help="Value for the label column.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="File to write (stdout when omitted).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True,
              help="Output format: one CSV row or a JSON list of records.")
def metrics_cmd(input_path: str, bins, bins_x, bins_y, label: Optional[str], out: Optional[str], fmt: str) -> None:
    """Measure the seven shape metrics of a point CSV."""
    with _runtime_errors():
        img = rasterize(export.read_points_csv(input_path), _grid(bins, bins_x, bins_y))
        vec = metric_vector(img, get_settings())
        text = export.metrics_csv([vec], [label]) if fmt == "csv" else export.metrics_json([vec], [label]) + "\n"
        if out:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)


@cli.command("run")
@click.option("--experiment", type=click.Choice(experiments_module.experiment_names()), required=True,
              help="Name of the experiment to run.")
@_report_options
@_bins_options
def run_cmd(experiment: str, seed, out_dir: str, images_per_class, images: bool, dump_tree: bool,
            bins, bins_x, bins_y) -> None:
    """Run one experiment and write its report."""
    config = _suite_config(seed, images_per_class, bins, bins_x, bins_y, [experiment])
    spec = experiments_module.default_suite(config)[experiments_module.experiment_names().index(experiment)]
    image_dir = Path(out_dir) / "images" if images else None
    with _runtime_errors():
        result = experiments_module.run_experiment(spec, get_settings(), config.tree_params, image_dir)
        report = SuiteReport(
            master_seed=config.master_seed,
            grid=config.grid,
            tree_params=config.tree_params,
            results=[result],
            usage=experiments_module.usage_table([result]),
        )
        _write_report(report, out_dir, dump_tree)


@cli.command("suite")
@click.option("--experiment", "selected", type=click.Choice(experiments_module.experiment_names()), multiple=True,
              help="Experiment to include (repeatable; default all seven).")
@_report_options
@_bins_options
def suite_cmd(selected: Sequence[str], seed, out_dir: str, images_per_class, images: bool, dump_tree: bool,
              bins, bins_x, bins_y) -> None:
    """Run the experiment suite and write results.csv, usage.csv and report.json."""
    config = _suite_config(seed, images_per_class, bins, bins_x, bins_y, selected)
    image_dir = Path(out_dir) / "images" if images else None
    with _runtime_errors():
        report = experiments_module.run_suite(config, get_settings(), image_dir)
        _write_report(report, out_dir, dump_tree)
    if report.partial:
        raise click.ClickException(f"{len(report.failures)} experiment(s) failed; report is partial")


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on argv and return the process exit code instead of exiting."""
    try:
        rv = cli.main(args=argv, prog_name="shapemetrics", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(dispatch())
