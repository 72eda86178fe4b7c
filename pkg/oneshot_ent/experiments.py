"""Sandwich checks for the distillation, dilution and catalytic dilution rates, and the
regularization series of the smoothed min-relative entropy."""

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from oneshot_ent.measures.divergences import e_r_pure
from oneshot_ent.measures.min_entropy import e_min_smooth
from oneshot_ent.measures.robustness import e_max_smooth
from oneshot_ent.models import (
    DensityMatrix,
    MonotonicityRecord,
    NumericSettings,
    ProtocolOutcome,
    RecordStatus,
    RegularizationSeries,
    SdpSolverError,
    SeriesEntry,
    TheoremRecord,
)
from oneshot_ent.protocols import (
    SeppVerificationError,
    apply,
    build_catalytic_dilute,
    build_dilute,
    build_distill,
    with_catalyst,
)
from oneshot_ent.quantum import (
    MAX_SIDE,
    DimensionBudgetError,
    StateValidationError,
    group_parties,
    isotropic,
    max_entangled,
    purity,
    random_pure_state,
    random_state,
    tensor,
    werner,
)
from oneshot_ent.separability import RelaxationGapError

logger = logging.getLogger("oneshot-ent")

BATTERY_SEED = 1729
ISOTROPIC_WEIGHTS = (0.3, 0.5, 0.75, 0.9, 1.0)
WERNER_WEIGHTS = (0.0, 0.25, 0.5, 0.75, 1.0)
RANDOM_MIXED = 20
SCHMIDT_SPECTRA = ((0.9, 0.1), (0.8, 0.2), (0.7, 0.3), (0.6, 0.4), (0.95, 0.05))
FIDELITY_SLACK = 1e-6
CSV_COLUMNS = (
    "theorem", "state", "eps", "delta", "lower", "rate", "upper", "pass", "gap", "wall_ms",
)

NamedState = tuple[str, DensityMatrix]


def _default_battery() -> list[NamedState]:
    rng = np.random.default_rng(BATTERY_SEED)
    states: list[NamedState] = [(f"mes-{M}", max_entangled(M)) for M in (2, 3, 4)]
    states += [(f"iso-{f:g}", isotropic(2, f)) for f in ISOTROPIC_WEIGHTS]
    states += [(f"werner-{p:g}", werner(2, p)) for p in WERNER_WEIGHTS]
    states += [(f"random-mixed-{k:02d}", random_state([2, 2], rng)) for k in range(RANDOM_MIXED)]
    states += [
        (f"random-pure-{k}", random_pure_state([2, 2], rng, schmidt=spectrum))
        for k, spectrum in enumerate(SCHMIDT_SPECTRA)
    ]
    return states


def state_battery(names: Sequence[str] = ("default",)) -> list[NamedState]:
    """The fixed test battery, or the named subset of it."""
    battery = _default_battery()
    if not names:
        raise StateValidationError("Battery selection is empty")
    if "default" in names:
        return battery
    by_name = dict(battery)
    unknown = [name for name in names if name not in by_name]
    if unknown:
        raise StateValidationError(f"Unknown battery states: {', '.join(unknown)}")
    return [(name, by_name[name]) for name in names]


def _build(theorem: int, state: DensityMatrix, eps: float, delta: Optional[float], settings):
    if theorem == 1:
        return build_distill(state, eps, settings)
    if theorem == 2:
        return build_dilute(state, eps, settings)
    if theorem == 3:
        if delta is None:
            raise StateValidationError("Catalytic dilution needs delta")
        return build_catalytic_dilute(state, eps, delta, settings)
    raise StateValidationError(f"Unknown theorem {theorem}")


def _catalyst_returned(outcome: ProtocolOutcome) -> bool:
    K = outcome.catalyst_K
    t = outcome.M * K
    produced = apply(outcome.channel, max_entangled(t))
    expected = with_catalyst(outcome.target, K)
    return bool(np.max(np.abs(produced.data - expected.data)) <= 1e-9)


def check_theorem(
    theorem: int,
    state: DensityMatrix,
    eps: float,
    delta: Optional[float] = None,
    settings: Optional[NumericSettings] = None,
    name: str = "state",
) -> TheoremRecord:
    """Build the protocol and compare its rate with the independently computed bracket."""
    started = time.perf_counter()
    record = TheoremRecord(
        theorem=theorem,
        state=name,
        eps=eps,
        delta=delta if theorem == 3 else None,
        lower=math.nan,
        rate=math.nan,
        upper=math.nan,
        status=RecordStatus.INCONCLUSIVE,
    )
    try:
        outcome = _build(theorem, state, eps, delta, settings)
    except (RelaxationGapError, SdpSolverError) as e:
        record.note = str(e)
        logger.warning(f"theorem {theorem} on {name} (eps={eps:g}) inconclusive: {e}")
    except SeppVerificationError as e:
        record.status = RecordStatus.FAIL
        record.note = str(e)
    else:
        record.lower, record.rate, record.upper = (
            outcome.bound_lower,
            outcome.log_M,
            outcome.bound_upper,
        )
        meta = outcome.measure.solver_meta
        record.iterations = int(meta.get("iterations", 0))
        record.gap = float(meta.get("gap", 0.0))
        record.extra = {
            "fidelity": outcome.achieved_fidelity,
            "worst_robustness": outcome.sepp_report.worst_case_robustness.upper,
        }
        notes = []
        if not TheoremRecord.within(record.lower, record.rate, record.upper):
            notes.append("rate outside bracket")
        if outcome.achieved_fidelity < 1 - eps - FIDELITY_SLACK:
            notes.append(f"fidelity {outcome.achieved_fidelity:.9f} below {1 - eps:g}")
        if theorem == 3:
            record.extra["K"] = float(outcome.catalyst_K)
            if not _catalyst_returned(outcome):
                notes.append("catalyst not returned")
        record.status = RecordStatus.FAIL if notes else RecordStatus.PASS
        record.note = "; ".join(notes)
    record.wall_ms = (time.perf_counter() - started) * 1000.0
    return record


def _tasks(states: Sequence[NamedState], eps_grid, delta_grid) -> list[tuple]:
    tasks = []
    for name, state in states:
        for eps in eps_grid:
            tasks.append((1, name, state, eps, None))
            tasks.append((2, name, state, eps, None))
            if state.n_factors == 2:
                tasks.extend((3, name, state, eps, delta) for delta in delta_grid)
    return tasks


def run_theorem_suite(
    states: Sequence[NamedState],
    eps_grid: Sequence[float],
    delta_grid: Sequence[float],
    settings: Optional[NumericSettings] = None,
    workers: int = 1,
    progress: Optional[Callable[[TheoremRecord], None]] = None,
) -> list[TheoremRecord]:
    """All records over the battery and grids, merged in (theorem, state, eps, delta) order."""
    if not states:
        raise StateValidationError("Battery selection is empty")
    tasks = _tasks(states, eps_grid, delta_grid)
    logger.info(f"Running {len(tasks)} theorem checks on {max(workers, 1)} workers")

    def run(task) -> TheoremRecord:
        theorem, name, state, eps, delta = task
        record = check_theorem(theorem, state, eps, delta, settings, name=name)
        if progress is not None:
            progress(record)
        return record

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        records = list(pool.map(run, tasks))
    return sorted(records, key=lambda record: record.key)


def records_to_csv(records: Sequence[TheoremRecord], with_timing: bool = False) -> str:
    """CSV table of records; the wall_ms column stays blank unless `with_timing`."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(
            [
                record.theorem,
                record.state,
                repr(record.eps),
                "" if record.delta is None else repr(record.delta),
                f"{record.lower:.9f}",
                f"{record.rate:.9f}",
                f"{record.upper:.9f}",
                record.status.value,
                f"{record.gap:.3e}",
                f"{record.wall_ms:.1f}" if with_timing else "",
            ]
        )
    return buffer.getvalue()


def copies(state: DensityMatrix, n: int) -> DensityMatrix:
    """state^(x)n on two parties (A1 A2 ... | B1 B2 ...)."""
    if state.n_factors != 2:
        raise StateValidationError(f"Copies need a bipartite state, got {list(state.dims)}")
    product = tensor(*([state] * n))
    return group_parties(product, (tuple(range(0, 2 * n, 2)), tuple(range(1, 2 * n, 2))))


def regularization_series(
    state: DensityMatrix,
    eps: float,
    n_max: int,
    name: str = "state",
    settings: Optional[NumericSettings] = None,
    budget: int = MAX_SIDE,
) -> RegularizationSeries:
    if n_max < 1:
        raise StateValidationError(f"n_max must be at least 1, got {n_max}")
    if state.side ** (2 * n_max) > budget:
        raise DimensionBudgetError(
            f"{n_max} copies of a side-{state.side} state exceed the budget {budget}"
        )
    reference = e_r_pure(state) if abs(purity(state) - 1.0) <= 1e-9 else None
    series = RegularizationSeries(state=name, eps=eps, reference=reference)
    for n in range(1, n_max + 1):
        value = e_min_smooth(copies(state, n), eps, settings)
        series.entries.append(SeriesEntry(n=n, lower=value.lower / n, upper=value.upper / n))
        entry = series.entries[-1]
        logger.info(
            f"{name}: n={n} per-copy E_min^{eps:g} in [{entry.lower:.6f}, {entry.upper:.6f}]"
        )
    return series


def _random_input(outcome: ProtocolOutcome, rng: np.random.Generator) -> DensityMatrix:
    """Isotropic inputs suffice when the channel only reads Tr(Psi_M X): twirling is LOCC."""
    channel = outcome.channel
    if outcome.kind == "distill" or len(channel.branches) == 1:
        return random_state(channel.input_dims, rng)
    return isotropic(channel.input_dims[0], float(rng.uniform()))


def check_monotonicity(
    outcome: ProtocolOutcome,
    n_inputs: int = 20,
    settings: Optional[NumericSettings] = None,
    seed: int = BATTERY_SEED,
) -> list[MonotonicityRecord]:
    """E_min^eps cannot grow under SEPP maps; E_max^eps grows by at most log(1 + delta)."""
    rng = np.random.default_rng(seed)
    eps = outcome.epsilon
    channel = outcome.channel
    catalytic = outcome.catalyst_K is not None
    measure = e_max_smooth if catalytic else e_min_smooth
    allowance = math.log2(1 + outcome.delta) if catalytic else 0.0

    records = []
    for k in range(n_inputs):
        state = _random_input(outcome, rng)
        before = measure(state, eps, settings)
        after = measure(apply(channel, state), eps, settings)
        passed = after.lower - allowance <= before.upper + FIDELITY_SLACK
        records.append(
            MonotonicityRecord(
                protocol=outcome.kind,
                input_index=k,
                before_upper=before.upper,
                after_lower=after.lower,
                allowance=allowance,
                passed=passed,
            )
        )
    return records
