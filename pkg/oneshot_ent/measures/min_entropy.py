"""Min-relative entropy of entanglement, plain and operator-smoothed.

The smoothed quantity is -log2 of min over tests 0 <= A <= I with Tr(A rho) >= 1 - eps of
max over separable sigma of Tr(A sigma). The inner maximum is dualized over the PPT relaxation,
giving one SDP whose value is a certified lower bound; the upper bound comes from a finite pool of
explicitly separable states grown by see-saw column generation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.measures.ball import SmoothingBall
from oneshot_ent.measures.isotropic import isotropic_parameters, min_entropy_program
from oneshot_ent.models import (
    BracketedValue,
    DensityMatrix,
    Effect,
    NumericSettings,
    Provenance,
)
from oneshot_ent.quantum import (
    make_effect,
    max_entangled,
    nearest_density,
    support_projector,
)
from oneshot_ent.sdp.problem import SdpProblem
from oneshot_ent.separability import (
    bipartitions,
    is_exact_dims,
    max_linear_over_sep,
    nontrivial_dims,
    round_to_separable,
    seesaw_product_max,
)

logger = logging.getLogger("oneshot-ent")

POOL_ROUNDS = 4


@dataclass
class MinEntropySolution:
    """Bracket plus the optimal test A; max over PPT states of Tr(A sigma) is at most `mu`."""

    value: BracketedValue
    effect: Effect
    mu: float
    maximizer: Optional[DensityMatrix] = None


def _neg_log(value: float) -> float:
    return math.inf if value <= 1e-300 else -math.log2(value)


def _unsmoothed(state: DensityMatrix, settings: NumericSettings) -> MinEntropySolution:
    projector = make_effect(support_projector(state), state.dims)
    sep = max_linear_over_sep(projector, settings=settings)
    provenance = (
        (Provenance.CLOSED_FORM,)
        if sep.solver_meta.get("closed_form")
        else (Provenance.PPT_RELAXATION, Provenance.SEESAW)
    )
    value = BracketedValue(
        lower=max(_neg_log(sep.certified_max), 0.0),
        upper=max(_neg_log(sep.achieved_max), 0.0),
        exact=sep.exact,
        provenance=provenance,
        solver_meta=sep.solver_meta,
    )
    return MinEntropySolution(value, projector, sep.certified_max, sep.witness)


def _isotropic(state: DensityMatrix, eps: float) -> Optional[MinEntropySolution]:
    params = isotropic_parameters(state)
    if params is None or is_exact_dims(state.dims):
        return None
    d, f = params
    mu, a, b = min_entropy_program(d, f, eps)
    psi = max_entangled(d).data
    effect = make_effect(a * psi + b * (np.eye(d * d) - psi), state.dims)
    value = BracketedValue.point(_neg_log(mu), Provenance.CLOSED_FORM, {"a": a, "b": b})
    return MinEntropySolution(value, effect, mu)


def _test_blocks(problem: SdpProblem, state: DensityMatrix, eps: float):
    side = state.side
    test = problem.add_block("test", side)
    rest = problem.add_block("identity_minus_test", side)
    problem.add_matrix_equality(
        [(test, sdp.identity()), (rest, sdp.identity())], np.eye(side, dtype=complex)
    )
    problem.add_inequality([(test, state.data)], 1.0 - eps, sense=">=")
    return test


def _pool_value(
    state: DensityMatrix,
    eps: float,
    pool: list[DensityMatrix],
    settings: NumericSettings,
) -> tuple[float, np.ndarray]:
    """min over tests of max_k Tr(A sigma_k); returns the certified lower end and the test."""
    problem = SdpProblem(f"min-entropy-pool-eps{eps:g}")
    test = _test_blocks(problem, state, eps)
    mu = problem.add_scalar("mu")
    for point in pool:
        problem.add_inequality([(test, point.data), (mu, -1.0)], 0.0, sense="<=")
    problem.set_objective([(mu, 1.0)])
    solution = sdp.solve(problem, settings)
    solution.raise_for_status()
    return solution.bounds[0], solution.value(test)


def _pool_upper(
    state: DensityMatrix,
    eps: float,
    seeds: list[DensityMatrix],
    settings: NumericSettings,
) -> float:
    rng = np.random.default_rng(settings.seed)
    pool = list(seeds)
    low = 0.0
    for round_ in range(POOL_ROUNDS):
        low, test = _pool_value(state, eps, pool, settings)
        value, point = seesaw_product_max(
            make_effect(_clip_unit(test), state.dims, tol=1e-6),
            settings.seesaw_restarts,
            rng,
        )
        logger.debug(f"min-entropy pool round {round_}: pool {low:.9f}, see-saw {value:.9f}")
        if value <= low + 1e-9:
            break
        pool.append(point)
    return _neg_log(low)


def solve_min_entropy(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> MinEntropySolution:
    settings = settings or NumericSettings()
    ball = SmoothingBall(state, eps)
    if len(nontrivial_dims(state.dims)) <= 1:
        effect = make_effect((1.0 - eps) * np.eye(state.side), state.dims)
        value = BracketedValue.point(_neg_log(1.0 - eps), Provenance.CLOSED_FORM)
        return MinEntropySolution(value, effect, 1.0 - eps, state)
    if ball.is_trivial:
        return _unsmoothed(state, settings)
    closed = _isotropic(state, eps)
    if closed is not None:
        return closed

    dims, side = state.dims, state.side
    problem = SdpProblem(f"min-entropy-eps{eps:g}")
    test = _test_blocks(problem, state, eps)
    mu = problem.add_scalar("mu")
    slack = problem.add_block("dual_slack", side)
    terms = [
        (slack, sdp.identity()),
        (mu, sdp.scalar_times(np.eye(side), -1.0)),
        (test, sdp.identity()),
    ]
    for k, cut in enumerate(bipartitions(len(dims))):
        multiplier = problem.add_block(f"multiplier{k}", side)
        terms.append((multiplier, sdp.transposed(dims, sorted(cut.cut))))
    # slack = mu I - sum_c Y_c^T_c - A
    problem.add_matrix_equality(terms, np.zeros((side, side)))
    problem.set_objective([(mu, 1.0)])

    solution = sdp.solve(problem, settings)
    solution.raise_for_status()
    low, high = solution.bounds
    effect = make_effect(_clip_unit(solution.value(test)), dims, tol=1e-6)
    try:
        maximizer = nearest_density(solution.dual_slack(slack), dims)
    except ValueError:
        maximizer = None

    lower = max(_neg_log(high), 0.0)
    exact = is_exact_dims(dims)
    if exact:
        upper = max(_neg_log(low), lower)
        provenance = (Provenance.PPT_RELAXATION, Provenance.SDP_CERTIFIED)
    else:
        seeds = []
        if maximizer is not None:
            rounded = round_to_separable(maximizer.data, dims)
            if rounded is not None:
                seeds.append(rounded)
        rng = np.random.default_rng(settings.seed)
        seeds.append(seesaw_product_max(effect, settings.seesaw_restarts, rng)[1])
        upper = max(_pool_upper(state, eps, seeds, settings), lower)
        provenance = (Provenance.PPT_RELAXATION, Provenance.SEESAW)
    value = BracketedValue(lower, upper, exact, provenance, solution.meta())
    return MinEntropySolution(value, effect, high, maximizer)


def _clip_unit(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    return (eigvecs * np.clip(eigvals, 0.0, 1.0)) @ eigvecs.conj().T


def e_min(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    return solve_min_entropy(state, 0.0, settings).value


def e_min_smooth(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> BracketedValue:
    return solve_min_entropy(state, eps, settings).value
