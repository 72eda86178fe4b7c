"""Max-relative entropy of entanglement and the robustness family, plain and smoothed.

Each SDP relaxes the separable cone to PPT, which certifies the lower side. The upper side is
certified by exhibiting explicitly separable operators: exact where PPT is separability, otherwise
by pushing the PPT optimizer into the separable ball around the identity.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.measures.ball import SmoothingBall
from oneshot_ent.measures.isotropic import (
    global_robustness,
    isotropic_parameters,
    smoothed_weight,
)
from oneshot_ent.models import BracketedValue, DensityMatrix, NumericSettings, Provenance
from oneshot_ent.quantum import (
    hermitian_part,
    isotropic,
    nearest_density,
    transpose_factors,
)
from oneshot_ent.sdp.problem import SdpProblem
from oneshot_ent.separability import (
    add_ppt_cone,
    bipartitions,
    is_exact_dims,
    nontrivial_dims,
    separable_ball_offset,
)

logger = logging.getLogger("oneshot-ent")


@dataclass
class RobustnessSolution:
    """Optimal (smoothed) state and certified noise; `value` is the robustness s itself."""

    value: BracketedValue
    state: DensityMatrix
    noise: Optional[np.ndarray]
    separable_noise: bool

    @property
    def mixture(self) -> Optional[np.ndarray]:
        """state + noise, an explicitly separable operator of trace 1 + s."""
        if self.noise is None:
            return None
        return self.state.data + self.noise


def _clip_psd(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(matrix))
    return (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.conj().T


def _provenance(exact: bool) -> tuple[Provenance, ...]:
    if exact:
        return (Provenance.PPT_RELAXATION, Provenance.SDP_CERTIFIED)
    return (Provenance.PPT_RELAXATION, Provenance.SEPARABLE_BALL)


def _isotropic_solution(ball: SmoothingBall, separable_noise: bool) -> Optional[RobustnessSolution]:
    params = isotropic_parameters(ball.center)
    if params is None or is_exact_dims(ball.center.dims):
        return None
    d, f = params
    g = smoothed_weight(d, f, ball.epsilon) if ball.epsilon > 0 else f
    s = global_robustness(d, g)
    value = BracketedValue.point(s, Provenance.CLOSED_FORM, {"weight": g})
    noise = s * isotropic(d, 0.0).data
    return RobustnessSolution(value, isotropic(d, g), noise, separable_noise)


def solve_robustness(
    ball: SmoothingBall,
    separable_noise: bool,
    settings: Optional[NumericSettings] = None,
) -> RobustnessSolution:
    """min Tr(w) over the ball with state + w PPT; w itself PPT when `separable_noise`."""
    center = ball.center
    dims, side = center.dims, center.side
    if len(nontrivial_dims(dims)) <= 1:
        zero = BracketedValue.point(0.0, Provenance.CLOSED_FORM)
        return RobustnessSolution(zero, center, np.zeros((side, side)), separable_noise)
    closed = _isotropic_solution(ball, separable_noise)
    if closed is not None:
        return closed

    cuts = bipartitions(len(dims))
    kind = "robustness" if separable_noise else "global-robustness"
    problem = SdpProblem(f"{kind}-eps{ball.epsilon:g}")
    noise = problem.add_block("noise", side)
    encoding = None if ball.is_trivial else ball.encode(problem)

    for k, cut in enumerate(cuts):
        flip = sorted(cut.cut)
        mixed = problem.add_block(f"mixture_pt{k}", side)
        terms = [(mixed, sdp.identity()), (noise, sdp.transposed(dims, flip, -1.0))]
        if encoding is None:
            rhs = transpose_factors(center.data, dims, flip)
        else:
            block, read = encoding.state_term
            terms.append((block, sdp.compose(sdp.transposed(dims, flip, -1.0), read)))
            rhs = np.zeros((side, side))
        problem.add_matrix_equality(terms, rhs)
    if separable_noise:
        add_ppt_cone(problem, [(noise, sdp.identity())], dims, cuts, "noise")
    problem.set_objective([(noise, np.eye(side))])

    solution = sdp.solve(problem, settings)
    solution.raise_for_status()
    low, high = solution.bounds
    state = center if encoding is None else nearest_density(encoding.state(solution), dims)
    w = _clip_psd(solution.value(noise))

    exact = is_exact_dims(dims)
    if exact:
        upper, certified = max(high, 0.0), w
    else:
        offset = separable_ball_offset(state.data + w, dims)
        if separable_noise:
            offset = max(offset, separable_ball_offset(w, dims))
        if math.isinf(offset):
            upper, certified = math.inf, None
        else:
            certified = w + offset * np.eye(side)
            upper = max(float(np.real(np.trace(certified))), high)
    value = BracketedValue(max(low, 0.0), upper, exact, _provenance(exact), solution.meta())
    return RobustnessSolution(value, state, certified, separable_noise)


def solve_max_entropy(
    ball: SmoothingBall, settings: Optional[NumericSettings] = None
) -> tuple[BracketedValue, Optional[np.ndarray]]:
    """min Tr(sigma) over the ball with sigma >= state and sigma PPT; bracket in trace units."""
    center = ball.center
    dims, side = center.dims, center.side
    if len(nontrivial_dims(dims)) <= 1:
        return BracketedValue.point(1.0, Provenance.CLOSED_FORM), center.data
    params = isotropic_parameters(center)
    if params is not None and not is_exact_dims(dims):
        d, f = params
        g = smoothed_weight(d, f, ball.epsilon) if ball.epsilon > 0 else f
        trace = max(1.0, g * d)
        sigma = isotropic(d, g).data + global_robustness(d, g) * isotropic(d, 0.0).data
        return BracketedValue.point(trace, Provenance.CLOSED_FORM, {"weight": g}), sigma

    problem = SdpProblem(f"max-relative-entropy-eps{ball.epsilon:g}")
    sigma = problem.add_block("sigma", side)
    gap = problem.add_block("sigma_minus_state", side)
    terms = [(gap, sdp.identity()), (sigma, sdp.scaled(-1.0))]
    if ball.is_trivial:
        problem.add_matrix_equality(terms, -center.data)
    else:
        encoding = ball.encode(problem)
        problem.add_matrix_equality(terms + [encoding.state_term], np.zeros((side, side)))
    add_ppt_cone(problem, [(sigma, sdp.identity())], dims, bipartitions(len(dims)), "sigma")
    problem.set_objective([(sigma, np.eye(side))])

    solution = sdp.solve(problem, settings)
    solution.raise_for_status()
    low, high = solution.bounds
    optimum = _clip_psd(solution.value(sigma))

    exact = is_exact_dims(dims)
    if exact:
        upper, certified = high, optimum
    else:
        offset = separable_ball_offset(optimum, dims)
        if math.isinf(offset):
            upper, certified = math.inf, None
        else:
            certified = optimum + offset * np.eye(side)
            upper = max(float(np.real(np.trace(certified))), high)
    # the smoothed state has unit trace and sigma dominates it
    value = BracketedValue(
        max(low, 1.0), max(upper, 1.0), exact, _provenance(exact), solution.meta()
    )
    return value, certified


def _log_one_plus(value: BracketedValue) -> BracketedValue:
    return value.map(lambda s: math.log2(1.0 + s))


def e_max(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    value, _ = solve_max_entropy(SmoothingBall(state, 0.0), settings)
    return value.map(math.log2)


def r_global(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    return solve_robustness(SmoothingBall(state, 0.0), False, settings).value


def lr_global(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    return _log_one_plus(r_global(state, settings))


def r_sep(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    return solve_robustness(SmoothingBall(state, 0.0), True, settings).value


def lr(state: DensityMatrix, settings: Optional[NumericSettings] = None) -> BracketedValue:
    return _log_one_plus(r_sep(state, settings))


def e_max_smooth(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> BracketedValue:
    ball = SmoothingBall(state, eps)
    if ball.is_trivial:
        return e_max(state, settings)
    value, _ = solve_max_entropy(ball, settings)
    return value.map(math.log2)


def lr_smooth(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> BracketedValue:
    ball = SmoothingBall(state, eps)
    if ball.is_trivial:
        return lr(state, settings)
    return _log_one_plus(solve_robustness(ball, True, settings).value)
