import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import NoReturn, Optional

import click

from oneshot_ent.config import load_run_config
from oneshot_ent.experiments import (
    records_to_csv,
    regularization_series,
    run_theorem_suite,
    state_battery,
)
from oneshot_ent.measures import (
    d_max,
    d_min,
    e_max,
    e_max_smooth,
    e_min,
    e_min_smooth,
    e_r_pure,
    lr,
    lr_global,
    lr_smooth,
    r_global,
    r_sep,
)
from oneshot_ent.models import (
    BracketedValue,
    DensityMatrix,
    Provenance,
    RecordStatus,
    RunConfig,
    SdpSolverError,
)
from oneshot_ent.protocols import (
    SeppVerificationError,
    build_catalytic_dilute,
    build_dilute,
    build_distill,
)
from oneshot_ent.quantum import StateValidationError
from oneshot_ent.separability import RelaxationGapError
from oneshot_ent.utils import (
    cache_get,
    cache_key,
    cache_put,
    channel_to_dict,
    display_records_table,
    display_series_table,
    load_state,
    outcome_to_dict,
    record_to_dict,
    series_to_dict,
    setup_logging,
    write_json,
)

EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_RELAXATION_GAP = 4
EXIT_NOT_SEPP = 5

PLAIN_MEASURES = {
    "emax": e_max,
    "emin": e_min,
    "r": r_sep,
    "rg": r_global,
    "lr": lr,
    "lrg": lr_global,
}
SMOOTH_MEASURES = {
    "emax-smooth": e_max_smooth,
    "lr-smooth": lr_smooth,
    "emin-smooth": e_min_smooth,
}
DIVERGENCES = {"dmax": d_max, "dmin": d_min}
MEASURES = (*DIVERGENCES, *PLAIN_MEASURES, *SMOOTH_MEASURES, "er-pure")


def _fail(logger: logging.Logger, e: Exception) -> NoReturn:
    if isinstance(e, SdpSolverError):
        logger.error(f"Solver did not converge: {e}")
        sys.exit(EXIT_SOLVER)
    if isinstance(e, RelaxationGapError):
        logger.error(f"Relaxation gap: {e}")
        sys.exit(EXIT_RELAXATION_GAP)
    if isinstance(e, SeppVerificationError):
        logger.error(f"Channel is not certified: {e}")
        sys.exit(EXIT_NOT_SEPP)
    if isinstance(e, ValueError):
        logger.error(str(e))
        sys.exit(EXIT_INVALID)
    logger.exception(f"Unexpected error: {e}")
    sys.exit(1)


def _config(
    config_path: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    dump_sdp: bool,
) -> RunConfig:
    config = load_run_config(config_path, seed=seed, out_dir=out_dir)
    if dump_sdp:
        config.numerics = replace(config.numerics, dump_dir=config.out_dir / "sdp")
    return config


def _evaluate(
    measure: str,
    state: DensityMatrix,
    eps: Optional[float],
    sigma_path: Optional[str],
    config: RunConfig,
) -> BracketedValue:
    settings = config.numerics
    if measure in DIVERGENCES:
        if not sigma_path:
            raise StateValidationError(f"{measure} needs --sigma")
        _, sigma = load_state(Path(sigma_path))
        return BracketedValue.point(DIVERGENCES[measure](state, sigma), Provenance.CLOSED_FORM)
    if measure == "er-pure":
        return BracketedValue.point(e_r_pure(state), Provenance.CLOSED_FORM)
    if measure in SMOOTH_MEASURES:
        if eps is None:
            raise StateValidationError(f"{measure} needs --eps")
        return SMOOTH_MEASURES[measure](state, eps, settings)
    return PLAIN_MEASURES[measure](state, settings)


def cmd_measure(
    state_path: str,
    measure: str,
    eps: Optional[float] = None,
    sigma_path: Optional[str] = None,
    max_width: Optional[float] = None,
    config_path: Optional[str] = None,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
    dump_sdp: bool = False,
    verbose: bool = False,
) -> None:
    logger = setup_logging(verbose)

    try:
        config = _config(config_path, out_dir, seed, dump_sdp)
        name, state = load_state(Path(state_path))
        logger.info(f"Loaded state '{name}' with dims {list(state.dims)}")

        key = cache_key(state, measure, eps, config)
        record = None if sigma_path else cache_get(config, key)
        if record is not None:
            logger.info("Using cached result")
        else:
            value = _evaluate(measure, state, eps, sigma_path, config)
            record = {"measure": measure, "state": name, "eps": eps, **value.to_dict()}
            if not sigma_path:
                cache_put(config, key, record)

        width = record["value_upper"] - record["value_lower"]
        if max_width is not None and width > max_width:
            raise RelaxationGapError(
                f"Bracket width {width:.3e} exceeds {max_width:.3e}",
                record["value_lower"],
                record["value_upper"],
            )
        write_json(config.out_dir / f"measure-{name}-{measure}.json", record)
        click.echo(json.dumps(record, sort_keys=True))

    except Exception as e:
        _fail(logger, e)


def cmd_protocol(
    kind: str,
    state_path: str,
    eps: float,
    delta: Optional[float] = None,
    config_path: Optional[str] = None,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
    dump_sdp: bool = False,
    verbose: bool = False,
) -> None:
    logger = setup_logging(verbose)

    try:
        config = _config(config_path, out_dir, seed, dump_sdp)
        name, state = load_state(Path(state_path))
        settings = config.numerics

        if kind == "distill":
            outcome = build_distill(state, eps, settings)
        elif kind == "dilute":
            outcome = build_dilute(state, eps, settings)
        else:  # catalytic-dilute
            if delta is None:
                raise StateValidationError("catalytic-dilute needs --delta")
            outcome = build_catalytic_dilute(state, eps, delta, settings)

        logger.info(
            f"log M = {outcome.log_M:.6f}, checked against "
            f"[{outcome.bound_lower:.6f}, {outcome.bound_upper:.6f}]"
        )
        if outcome.catalyst_K is not None:
            logger.info(f"Catalyst dimension K = {outcome.catalyst_K}")

        summary = outcome_to_dict(outcome)
        summary["state"] = name
        write_json(config.out_dir / f"{kind}-{name}.json", summary)
        write_json(config.out_dir / f"{kind}-{name}-channel.json", channel_to_dict(outcome.channel))
        click.echo(json.dumps(summary, sort_keys=True))

    except Exception as e:
        _fail(logger, e)


def cmd_experiments(
    suite: str,
    config_path: Optional[str] = None,
    state_path: Optional[str] = None,
    n_max: Optional[int] = None,
    eps: Optional[float] = None,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
    dump_sdp: bool = False,
    verbose: bool = False,
) -> None:
    logger = setup_logging(verbose)

    try:
        config = _config(config_path, out_dir, seed, dump_sdp)

        if suite == "theorems":
            states = state_battery(config.battery)
            records = run_theorem_suite(
                states, config.eps_grid, config.delta_grid, config.numerics, config.workers
            )
            write_json(config.out_dir / "theorems.json", [record_to_dict(r) for r in records])
            (config.out_dir / "theorems.csv").write_text(records_to_csv(records))
            display_records_table(records)

            failed = sum(record.status is RecordStatus.FAIL for record in records)
            inconclusive = sum(record.status is RecordStatus.INCONCLUSIVE for record in records)
            if inconclusive:
                logger.warning(f"{inconclusive} record(s) inconclusive")
            summary = {"records": len(records), "failed": failed, "inconclusive": inconclusive}
            click.echo(json.dumps(summary))
            if failed:
                logger.error(f"{failed} record(s) failed")
                sys.exit(1)
            return

        # regularize
        if not state_path:
            raise StateValidationError("regularize needs --state")
        name, state = load_state(Path(state_path))
        series = regularization_series(
            state,
            eps if eps is not None else config.regularize_eps,
            n_max if n_max is not None else config.regularize_n_max,
            name=name,
            settings=config.numerics,
            budget=config.dimension_budget,
        )
        write_json(config.out_dir / f"regularize-{name}.json", series_to_dict(series))
        display_series_table(series)
        click.echo(json.dumps(series_to_dict(series), sort_keys=True))

    except Exception as e:
        _fail(logger, e)
