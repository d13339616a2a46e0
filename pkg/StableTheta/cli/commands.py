"""
StableTheta Command Line
Subcommands theta, igusa, stable-check, operators and grenier
"""

import functools
import logging
from typing import Callable, Dict, List, Optional

import click
import numpy as np

from ..analysis.grenier import (
    GrenierDecomposition,
    PowerParameters,
    SpecialPositiveMatrix,
    decompose,
    grenier_l_numeric,
    grenier_l_power,
    power_combination,
    power_function,
    recompose,
)
from ..analysis.symplectic import ScalarWeight, run_operator_suite
from ..config.settings import APP_NAME, APP_VERSION, CONFIG_FILE, FORM_LABELS, ConfigManager, RunConfig
from ..exceptions import CacheFormatError, StableThetaError
from ..forms.fourier import Expansion, constant_expansion, format_expansion, singular_indices, theta_expansion
from ..forms.siegel import (
    SCHOTTKY_TRACE,
    check_stability,
    cusp_surrogate_check,
    igusa_form,
    schottky_witness,
    siegel_operator_regime,
)
from ..lattice.enumeration import NodeBudget, shell_cache
from ..lattice.qforms import form_by_label
from ..tools.expansion_cache import ExpansionCache, write_atomic
from ..utils.helpers import format_matrix_for_display, parse_number_list, parse_square_matrix, setup_logging
from . import reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VERIFICATION = 2

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def exit_status(func: Callable) -> Callable:
    """Map library errors to exit status 1 and the command's return value to the exit status"""

    @functools.wraps(func)
    def wrapper(ctx: click.Context, *args, **kwargs):
        try:
            status = func(ctx, *args, **kwargs)
        except (StableThetaError, ValueError) as e:
            logger.debug("%s failed", ctx.command_path, exc_info=True)
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_FAILURE)
        ctx.exit(status or EXIT_OK)

    return wrapper


def _run_config(ctx: click.Context, command: str, **overrides) -> RunConfig:
    settings = ctx.obj
    return RunConfig.from_sources(settings["config"], command, workers=settings["workers"],
                                  full_genus4=settings["full_genus4"], **overrides)


def _cache(config: RunConfig) -> Optional[ExpansionCache]:
    return ExpansionCache(config.cache_dir) if config.cache_dir else None


def _load_cached(cache: Optional[ExpansionCache], kind: str, label: str, genus: int, bound: int) -> Optional[Expansion]:
    if cache is None:
        return None
    try:
        return cache.load(kind, label, genus, bound)
    except CacheFormatError as e:
        logger.warning("%s; recomputing", e)
        return None


def _theta_members(config: RunConfig, genera: List[int], budget: NodeBudget) -> Dict[int, Expansion]:
    q = form_by_label(config.form_label)
    cache = _cache(config)
    memo: Dict = {}
    members = {}
    for genus in genera:
        expansion = _load_cached(cache, "theta", q.label, genus, config.trace_bound)
        if expansion is None:
            expansion = theta_expansion(q, genus, config.trace_bound, budget=budget,
                                        allow_full_genus4=config.full_genus4, canonicalize=config.canonicalize,
                                        workers=config.workers, memo=memo)
            if cache is not None:
                cache.store(expansion, "theta")
        members[genus] = expansion
    return members


@click.group()
@click.version_option(APP_VERSION, prog_name=APP_NAME)
@click.option("--config", "config_path", default=CONFIG_FILE, show_default=True,
              type=click.Path(dir_okay=False), help="JSON configuration file")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Logging level (stderr)")
@click.option("--workers", type=int, default=None, help="Worker processes for independent counts")
@click.option("--full-genus4", is_flag=True, default=False, help="Allow complete genus-4 tables")
@click.pass_context
def cli(ctx: click.Context, config_path: str, log_level: Optional[str], workers: Optional[int], full_genus4: bool):
    """Theta series, the Siegel operator and the Grenier operator"""
    manager = ConfigManager(config_path)
    setup_logging(log_level or manager.get("log_level", "WARNING"))
    shell_cache.max_vectors = int(manager.get_budget_settings()["shell_cache_max_vectors"])
    ctx.obj = {"config": manager, "workers": workers, "full_genus4": True if full_genus4 else None}


@cli.command()
@click.option("--form", "form_label", type=click.Choice(FORM_LABELS, case_sensitive=False), default="E8",
              show_default=True)
@click.option("--genus", type=int, default=1, show_default=True)
@click.option("--trace-bound", type=int, default=6, show_default=True)
@click.option("--budget", type=int, default=None, help="Maximum enumeration nodes")
@click.option("--out", "output_path", type=click.Path(dir_okay=False), default=None,
              help="Write the expansion file here")
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None, help="Cache directory")
@click.pass_context
@exit_status
def theta(ctx, form_label, genus, trace_bound, budget, output_path, cache_dir):
    """Compute a truncated theta series and print its coefficients"""
    config = _run_config(ctx, "theta", form_label=form_label.upper(), genus=genus, trace_bound=trace_bound,
                         budget=budget, output_path=output_path, cache_dir=cache_dir)
    expansion = _theta_members(config, [config.genus], NodeBudget(config.budget))[config.genus]
    if config.output_path:
        write_atomic(config.output_path, format_expansion(expansion))
        logger.info("wrote %s", config.output_path)
    click.echo(reports.expansion_header(expansion))
    click.echo(reports.render(reports.coefficient_table(expansion)))
    return EXIT_OK


@cli.command()
@click.option("--genus", type=int, default=2, show_default=True)
@click.option("--trace-bound", type=int, default=6, show_default=True)
@click.option("--budget", type=int, default=None, help="Maximum enumeration nodes")
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None, help="Cache directory")
@click.pass_context
@exit_status
def igusa(ctx, genus, trace_bound, budget, cache_dir):
    """Difference of the E8⊕E8 and D16+ theta series, with the cusp check"""
    config = _run_config(ctx, "igusa", genus=genus, trace_bound=trace_bound, budget=budget, cache_dir=cache_dir)
    node_budget = NodeBudget(config.budget)
    options = dict(budget=node_budget, canonicalize=config.canonicalize, workers=config.workers)
    click.echo(f"igusa genus={config.genus} weight=8 trace_bound={config.trace_bound}")
    if config.genus >= 4 and not config.full_genus4:
        witness = schottky_witness(config.trace_bound, budget=node_budget, workers=config.workers)
        restricted = igusa_form(config.genus, config.trace_bound,
                                indices=singular_indices(config.genus, config.trace_bound), **options)
        cusp = cusp_surrogate_check(restricted)
        if witness is None:
            click.echo("no witness among diagonal-2 indices")
            if config.trace_bound >= SCHOTTKY_TRACE:
                for line in reports.cusp_lines(cusp):
                    click.echo(line)
                return EXIT_VERIFICATION
        else:
            index, difference = witness
            click.echo(f"nonzero; witness T = {index}; difference {difference}")
    else:
        cache = _cache(config)
        form = _load_cached(cache, "igusa", "IGUSA", config.genus, config.trace_bound)
        if form is None:
            form = igusa_form(config.genus, config.trace_bound, allow_full_genus4=config.full_genus4, **options)
            if cache is not None:
                cache.store(form, "igusa")
        cusp = cusp_surrogate_check(form)
        nonzero = form.nonzero_items()
        if not nonzero:
            click.echo("identically zero")
        else:
            index, value = nonzero[0]
            click.echo(f"nonzero; witness T = {index}; coefficient {value}")
        if nonzero and 1 <= config.genus <= 3:
            click.echo("expected the difference to vanish below genus 4")
            for line in reports.cusp_lines(cusp):
                click.echo(line)
            return EXIT_VERIFICATION
    for line in reports.cusp_lines(cusp):
        click.echo(line)
    return EXIT_OK if cusp.passed else EXIT_VERIFICATION


def _inject_fault(members: Dict[int, Expansion]) -> Optional[str]:
    top = max(members)
    if top < 1:
        return None
    expansion = members[top]
    target = [index for index in expansion.coeffs if index.last_border_is_zero()][-1]
    coeffs = dict(expansion.coeffs)
    coeffs[target] += 1
    members[top] = Expansion(expansion.genus, expansion.weight, expansion.trace_bound, coeffs,
                             expansion.label, expansion.complete)
    return f"injected fault: genus {top} coefficient at {target} increased by 1"


@cli.command("stable-check")
@click.option("--form", "form_label", type=click.Choice(FORM_LABELS, case_sensitive=False), default="E8",
              show_default=True)
@click.option("--genus", type=int, default=3, show_default=True, help="Largest genus of the family")
@click.option("--trace-bound", type=int, default=4, show_default=True)
@click.option("--budget", type=int, default=None, help="Maximum enumeration nodes")
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None, help="Cache directory")
@click.option("--inject-fault", is_flag=True, help="Perturb one coefficient of the top member")
@click.option("--from-cache", is_flag=True, help="Use cached expansions only")
@click.pass_context
@exit_status
def stable_check(ctx, form_label, genus, trace_bound, budget, cache_dir, inject_fault, from_cache):
    """Check Φ-coherence of the theta family up to a genus"""
    config = _run_config(ctx, "stable-check", form_label=form_label.upper(), genus=genus,
                         trace_bound=trace_bound, budget=budget, cache_dir=cache_dir)
    genera = list(range(config.genus + 1))
    if from_cache:
        cache = _cache(config)
        if cache is None:
            raise CacheFormatError("--from-cache needs a cache directory")
        label = form_by_label(config.form_label).label
        members = {}
        for n in genera:
            expansion = cache.load("theta", label, n, config.trace_bound)
            if expansion is None:
                raise CacheFormatError(f"no cached theta expansion for genus {n}")
            members[n] = expansion
    else:
        members = _theta_members(config, genera, NodeBudget(config.budget))
    if inject_fault:
        notice = _inject_fault(members)
        if notice:
            click.echo(notice)
    report = check_stability([members[n] for n in genera])
    click.echo(f"stable-check {config.form_label} max_genus={config.genus} trace_bound={config.trace_bound}")
    click.echo(reports.render(reports.stability_table(report)))
    if not report.stable:
        click.echo(reports.render(reports.failure_table(report)))
    weight = members[0].weight
    if weight.denominator == 1 and config.genus >= 1:
        regimes = [siegel_operator_regime(int(weight), n) for n in range(1, config.genus + 1)]
        click.echo("Siegel operator regimes (informational)")
        click.echo(reports.render(reports.regime_table(regimes)))
    click.echo("stable" if report.stable else f"not stable: {report.failure_count()} failures")
    return EXIT_OK if report.stable else EXIT_VERIFICATION


@cli.command()
@click.option("--form", "form_label", type=click.Choice(FORM_LABELS, case_sensitive=False), default="E8",
              show_default=True)
@click.option("--genus", type=int, default=3, show_default=True, help="Largest genus of the checked pairs")
@click.option("--trace-bound", type=int, default=6, show_default=True)
@click.option("--t-schedule", default=None, help="Comma-separated increasing values of t")
@click.option("--weight-zero", is_flag=True, help="Use constant weight-0 functions instead of theta series")
@click.option("--samples", type=int, default=100, show_default=True, help="Random pairs for the cocycle check")
@click.option("--budget", type=int, default=None, help="Maximum enumeration nodes")
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None, help="Cache directory")
@click.pass_context
@exit_status
def operators(ctx, form_label, genus, trace_bound, t_schedule, weight_zero, samples, budget, cache_dir):
    """Numeric checks of the symplectic operator identities"""
    schedule = parse_number_list(t_schedule) if t_schedule else None
    config = _run_config(ctx, "operators", form_label=form_label.upper(), genus=genus, trace_bound=trace_bound,
                         t_schedule=schedule, budget=budget, cache_dir=cache_dir)
    genera = list(range(1, config.genus + 1))
    if weight_zero:
        expansions = {n: constant_expansion(n, 1, config.trace_bound) for n in genera}
        weight = ScalarWeight(0)
    else:
        expansions = _theta_members(config, genera, NodeBudget(config.budget))
        weight = ScalarWeight(form_by_label(config.form_label).dim // 2)
    suite = run_operator_suite(expansions, weight, config.t_schedule, config.tolerances, config.seed,
                               cocycle_samples=samples)
    click.echo(f"operators {'constant' if weight_zero else config.form_label} weight={weight.k} "
               f"t_schedule={','.join(f'{t:g}' for t in config.t_schedule)}")
    click.echo(reports.render(reports.deviation_table(suite)))
    for warning in suite.warnings():
        click.echo(f"warning: convergence report: {warning}")
    for report in suite.convergence:
        report.raise_if_diverged()
    return EXIT_OK if suite.passed else EXIT_VERIFICATION


@cli.group()
def grenier():
    """Decomposition and limit of the Grenier operator on SL(n)"""


def _special_matrix(text: str) -> SpecialPositiveMatrix:
    matrix, renormalized = SpecialPositiveMatrix.from_matrix(np.array(parse_square_matrix(text)))
    if renormalized:
        click.echo("renormalized: input scaled to determinant 1")
    return matrix


@grenier.command("decompose")
@click.option("--matrix", "matrix_text", required=True, help="Row-major entries, e.g. '2,1,1,1'")
@click.pass_context
@exit_status
def grenier_decompose(ctx, matrix_text):
    """Split Y into (v, x, W)"""
    y = _special_matrix(matrix_text)
    decomposition = decompose(y)
    error = float(np.max(np.abs(recompose(decomposition).y - y.y)))
    for line in reports.decomposition_lines(decomposition, error):
        click.echo(line)
    return EXIT_OK


@grenier.command("recompose")
@click.option("--v", "v", type=float, required=True)
@click.option("--x", "x_text", required=True, help="Comma-separated offset vector")
@click.option("--w", "w_text", required=True, help="Row-major entries of W")
@click.pass_context
@exit_status
def grenier_recompose(ctx, v, x_text, w_text):
    """Assemble Y from (v, x, W)"""
    y = recompose(GrenierDecomposition(v, np.array(parse_number_list(x_text)), _special_matrix(w_text)))
    click.echo(f"Y = {format_matrix_for_display(y.y, digits=12, max_length=400)}")
    return EXIT_OK


@grenier.command("limit")
@click.option("--s", "s_text", required=True, help="Comma-separated s1,...,s_{n-1}")
@click.option("--w", "w_text", required=True, help="Row-major entries of W (size n-1)")
@click.option("--x", "x_text", default=None, help="Offset vector (default zero)")
@click.option("--v-schedule", default=None, help="Comma-separated increasing values of v")
@click.pass_context
@exit_status
def grenier_limit(ctx, s_text, w_text, x_text, v_schedule):
    """Evaluate the Grenier limit of a power function and compare with the shift"""
    schedule = parse_number_list(v_schedule) if v_schedule else None
    config = _run_config(ctx, "grenier", v_schedule=schedule)
    s = parse_number_list(s_text)
    p = PowerParameters(len(s) + 1, tuple(s))
    w = _special_matrix(w_text)
    x = np.array(parse_number_list(x_text)) if x_text else np.zeros(w.n)
    tolerance = config.tolerances["operator_tolerance"]
    result = grenier_l_numeric(power_combination([(1.0, p)]), p, w, x, config.v_schedule, tolerance)
    expected = power_function(w, grenier_l_power(p))
    deviation = abs(result.value - expected)
    click.echo(f"grenier limit n={p.n} exponent={reports.format_complex(result.exponent, 6)}")
    click.echo(reports.render(reports.convergence_table(result.report)))
    click.echo(f"shifted power function = {reports.format_complex(expected)}")
    click.echo(f"deviation = {deviation:.3e} (tolerance {tolerance:.1e})")
    if result.report.warning:
        click.echo(f"warning: convergence report: {result.report.warning}")
    result.report.raise_if_diverged()
    return EXIT_OK if deviation <= tolerance else EXIT_VERIFICATION
