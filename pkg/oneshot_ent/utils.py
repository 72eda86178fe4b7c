import hashlib
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from oneshot_ent.models import (
    Branch,
    DensityMatrix,
    MeasurePrepareChannel,
    ProtocolOutcome,
    RecordStatus,
    RegularizationSeries,
    RunConfig,
    TheoremRecord,
)
from oneshot_ent.quantum import StateValidationError, make_density, make_effect

console = Console(stderr=True)


def setup_logging(verbose: bool = False) -> logging.Logger:
    logger = logging.getLogger("oneshot-ent")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    logger.handlers.clear()

    handler = RichHandler(
        console=console,
        show_time=False,
        show_path=False,
        show_level=True,
        markup=False,
        rich_tracebacks=True,
        omit_repeated_times=False,
    )

    logger.addHandler(handler)
    return logger


def matrix_to_json(matrix: np.ndarray) -> list:
    arr = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def matrix_from_json(data: Any) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise StateValidationError("Matrix entries must be [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise StateValidationError(f"Expected a square grid of [re, im] pairs, got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(state: DensityMatrix, name: str = "state") -> dict:
    return {"name": name, "dims": list(state.dims), "matrix": matrix_to_json(state.data)}


def state_from_dict(data: dict) -> tuple[str, DensityMatrix]:
    if not isinstance(data, dict) or "dims" not in data or "matrix" not in data:
        raise StateValidationError("State file needs 'dims' and 'matrix'")
    state = make_density(matrix_from_json(data["matrix"]), data["dims"])
    return str(data.get("name", "state")), state


def load_state(path: Path) -> tuple[str, DensityMatrix]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise StateValidationError(f"{path} is not valid JSON: {e}") from None
    return state_from_dict(data)


def save_state(path: Path, state: DensityMatrix, name: str = "state") -> None:
    write_json(path, state_to_dict(state, name))


def channel_to_dict(channel: MeasurePrepareChannel) -> dict:
    data = {
        "input_dims": list(channel.input_dims),
        "branches": [
            {
                "effect": matrix_to_json(branch.effect.data),
                "output": {
                    "dims": list(branch.output.dims),
                    "matrix": matrix_to_json(branch.output.data),
                },
            }
            for branch in channel.branches
        ],
    }
    if channel.catalyst_K is not None:
        data["catalyst_K"] = channel.catalyst_K
    return data


def channel_from_dict(data: dict) -> MeasurePrepareChannel:
    if "input_dims" not in data or "branches" not in data:
        raise StateValidationError("Channel file needs 'input_dims' and 'branches'")
    branches = []
    input_dims = tuple(data["input_dims"])
    for entry in data["branches"]:
        _, output = state_from_dict(entry["output"])
        branches.append(Branch(make_effect(matrix_from_json(entry["effect"]), input_dims), output))
    if not branches:
        raise StateValidationError("Channel has no branches")
    total = sum(branch.effect.data for branch in branches)
    if np.max(np.abs(total - np.eye(total.shape[0]))) > 1e-9:
        raise StateValidationError("Channel effects do not sum to the identity")
    return MeasurePrepareChannel(
        branches=tuple(branches),
        input_dims=input_dims,
        output_dims=branches[0].output.dims,
        catalyst_K=data.get("catalyst_K"),
    )


def outcome_to_dict(outcome: ProtocolOutcome) -> dict:
    report = outcome.sepp_report
    return {
        "kind": outcome.kind,
        "log_M": outcome.log_M,
        "M": outcome.M,
        "catalyst_K": outcome.catalyst_K,
        "epsilon": outcome.epsilon,
        "delta": outcome.delta,
        "achieved_fidelity": outcome.achieved_fidelity,
        "bound_lower": outcome.bound_lower,
        "bound_upper": outcome.bound_upper,
        "measure": outcome.measure.to_dict(),
        "sepp": {
            "is_sepp": report.is_sepp,
            "delta": report.delta,
            "p_range": list(report.p_range),
            "worst_case_robustness": report.worst_case_robustness.to_dict(),
        },
    }


def record_to_dict(record: TheoremRecord) -> dict:
    data = asdict(record)
    data["status"] = record.status.value
    data["pass"] = record.passed
    return data


def series_to_dict(series: RegularizationSeries) -> dict:
    return asdict(series)


def write_json(path: Path, data: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cache_key(state: DensityMatrix, measure: str, eps: Optional[float], config: RunConfig) -> str:
    numerics = config.numerics
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(state.data).tobytes())
    digest.update(repr(state.dims).encode())
    digest.update(f"{measure}|{eps!r}".encode())
    digest.update(
        repr(
            (
                numerics.gap_tol,
                numerics.feas_tol,
                numerics.max_iterations,
                numerics.seesaw_restarts,
                numerics.seed,
            )
        ).encode()
    )
    return digest.hexdigest()


def cache_get(config: RunConfig, key: str) -> Optional[dict]:
    if not config.cache:
        return None
    path = config.out_dir / ".cache" / f"{key}.json"
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError:
        return None


def cache_put(config: RunConfig, key: str, data: dict) -> None:
    if config.cache:
        write_json(config.out_dir / ".cache" / f"{key}.json", data)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def display_records_table(records: list[TheoremRecord]) -> None:
    if not records:
        console.print("[yellow]No theorem records[/yellow]")
        return

    table = Table(title="Theorem checks", show_header=True, header_style="bold magenta")
    table.add_column("Thm", style="cyan", justify="right", width=3)
    table.add_column("State", style="white")
    table.add_column("eps", justify="right")
    table.add_column("delta", justify="right")
    table.add_column("Lower", justify="right")
    table.add_column("Rate", style="bold", justify="right")
    table.add_column("Upper", justify="right")
    table.add_column("Status")

    for record in records:
        if record.status is RecordStatus.PASS:
            status = "[green]pass[/green]"
        elif record.status is RecordStatus.FAIL:
            status = "[red]fail[/red]"
        else:
            status = "[yellow]inconclusive[/yellow]"
        delta = "" if record.delta is None else f"{record.delta:g}"
        table.add_row(
            str(record.theorem),
            record.state,
            f"{record.eps:g}",
            delta,
            _fmt(record.lower),
            _fmt(record.rate),
            _fmt(record.upper),
            status,
        )

    console.print(table)


def display_series_table(series: RegularizationSeries) -> None:
    title = f"Per-copy E_min^{series.eps:g} for {series.state}"
    if series.reference is not None:
        title += f" (E_R = {series.reference:.6f})"
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("n", style="cyan", justify="right")
    table.add_column("Lower / n", justify="right")
    table.add_column("Upper / n", justify="right")
    for entry in series.entries:
        table.add_row(str(entry.n), _fmt(entry.lower), _fmt(entry.upper))
    console.print(table)
