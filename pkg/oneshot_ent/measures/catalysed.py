"""Programs on rho (x) Psi_K reduced by the U x U* twirl on the catalyst.

A catalyst-twirled operator is S1 (x) Psi_K + S2 (x) (I - Psi_K)/(K^2 - 1). Its partial
transpose splits over the symmetric and antisymmetric subspaces of the catalyst, so PPT becomes
two conditions on operators living on rho's factors only:

    S1^T/K + S2^T/(K(K+1)) >= 0        -S1^T/K + S2^T/(K(K-1)) >= 0

The explicitly separable side uses T1 (x) iso_{1/K} + T2 (x) (I - Psi_K)/(K^2 - 1), where the
isotropic state of weight 1/K is separable; it is certified when T1 and T2 are.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.measures.ball import BallEncoding, SmoothingBall
from oneshot_ent.measures.isotropic import isotropic_parameters
from oneshot_ent.models import (
    BracketedValue,
    DensityMatrix,
    NumericSettings,
    Provenance,
    SdpBlock,
)
from oneshot_ent.quantum import (
    StateValidationError,
    hermitian_part,
    isotropic,
    nearest_density,
    transpose_factors,
    uu_star_twirl,
)
from oneshot_ent.sdp.problem import Adjoint, SdpProblem
from oneshot_ent.separability import (
    add_ppt_cone,
    bipartitions,
    is_exact_dims,
    separable_ball_offset,
)

logger = logging.getLogger("oneshot-ent")

Terms = list[tuple[SdpBlock, Adjoint]]


@dataclass
class CatalystSolution:
    """E_max^eps(rho (x) Psi_K) bracket with the certified optimizer of the inner program."""

    value: BracketedValue
    K: int
    smoothed: DensityMatrix
    weight: float
    sigma: np.ndarray

    @property
    def sigma_trace(self) -> float:
        return float(np.real(np.trace(self.sigma)))


def catalyst_size(delta: float) -> int:
    if delta <= 0:
        raise StateValidationError(f"delta must be positive, got {delta}")
    return math.ceil(1.0 + 1.0 / delta - 1e-12)


def _scaled(terms: Terms, dims: Sequence[int], cut: Sequence[int], coef: float) -> Terms:
    return [
        (block, sdp.compose(sdp.transposed(dims, cut, coef), adjoint)) for block, adjoint in terms
    ]


def _add_catalyst_ppt(
    problem: SdpProblem,
    s1: Terms,
    s2: Terms,
    dims: Sequence[int],
    K: int,
    rhs: tuple[Optional[np.ndarray], Optional[np.ndarray]] = (None, None),
    label: str = "cat",
) -> None:
    """Symmetric and antisymmetric PPT conditions for S1 (x) Psi_K + S2 (x) Phi_K."""
    side = math.prod(dims)
    fixed_1 = rhs[0] if rhs[0] is not None else np.zeros((side, side))
    fixed_2 = rhs[1] if rhs[1] is not None else np.zeros((side, side))
    for k, cut in enumerate(bipartitions(len(dims))):
        flip = sorted(cut.cut)
        t1 = transpose_factors(fixed_1, dims, flip)
        t2 = transpose_factors(fixed_2, dims, flip)

        sym = problem.add_block(f"{label}_sym{k}", side)
        problem.add_matrix_equality(
            [(sym, sdp.identity())]
            + _scaled(s1, dims, flip, -1.0 / K)
            + _scaled(s2, dims, flip, -1.0 / (K * (K + 1))),
            t1 / K + t2 / (K * (K + 1)),
        )
        anti = problem.add_block(f"{label}_anti{k}", side)
        problem.add_matrix_equality(
            [(anti, sdp.identity())]
            + _scaled(s1, dims, flip, 1.0 / K)
            + _scaled(s2, dims, flip, -1.0 / (K * (K - 1))),
            -t1 / K + t2 / (K * (K - 1)),
        )


def _psd(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(matrix))
    return (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.conj().T


def _certify_pair(
    t1: np.ndarray, t2: np.ndarray, dims: Sequence[int], twirl: bool
) -> tuple[np.ndarray, np.ndarray, float]:
    """Make T1, T2 explicitly separable; returns them and the trace added."""
    if twirl:
        return uu_star_twirl(t1, dims), uu_star_twirl(t2, dims), 0.0
    if is_exact_dims(dims):
        return t1, t2, 0.0
    side = t1.shape[0]
    c1, c2 = separable_ball_offset(t1, dims), separable_ball_offset(t2, dims)
    if math.isinf(c1) or math.isinf(c2):
        return t1, t2, math.inf
    return t1 + c1 * np.eye(side), t2 + c2 * np.eye(side), (c1 + c2) * side


def _state_terms(
    problem: SdpProblem, ball: SmoothingBall
) -> tuple[Optional[BallEncoding], Optional[SdpBlock]]:
    if ball.is_trivial:
        return None, None
    side = ball.center.side
    encoding = ball.encode(problem, trace=None)
    leftover = problem.add_block("leftover", side)
    corner = np.zeros((encoding.rank + side,) * 2, dtype=complex)
    corner[encoding.rank:, encoding.rank:] = np.eye(side)
    problem.add_constraint([(encoding.block, corner), (leftover, np.eye(side))], 1.0)
    return encoding, leftover


def _dominate(
    problem: SdpProblem,
    s1: Terms,
    s2: Terms,
    ball: SmoothingBall,
    encoding: Optional[BallEncoding],
    leftover,
) -> None:
    """S1 >= X1 and S2 >= X2 for the twirled smoothed state X1 (x) Psi_K + X2 (x) Phi_K."""
    side = ball.center.side
    g1 = problem.add_block("dominate_singlet", side)
    g2 = problem.add_block("dominate_rest", side)
    neg = [(block, sdp.compose(sdp.scaled(-1.0), adj)) for block, adj in s1]
    if encoding is None:
        problem.add_matrix_equality([(g1, sdp.identity())] + neg, -ball.center.data)
    else:
        problem.add_matrix_equality(
            [(g1, sdp.identity()), encoding.state_term] + neg, np.zeros((side, side))
        )
    neg = [(block, sdp.compose(sdp.scaled(-1.0), adj)) for block, adj in s2]
    terms = [(g2, sdp.identity())] + neg
    if leftover is not None:
        terms.append((leftover, sdp.identity()))
    problem.add_matrix_equality(terms, np.zeros((side, side)))


def _smoothed_parts(ball, encoding, leftover, solution) -> tuple[np.ndarray, np.ndarray]:
    side = ball.center.side
    if encoding is None:
        return ball.center.data, np.zeros((side, side))
    return _psd(encoding.state(solution)), _psd(solution.value(leftover))


def catalysed_max_entropy(
    state: DensityMatrix,
    eps: float,
    K: int,
    settings: Optional[NumericSettings] = None,
) -> CatalystSolution:
    """Bracket of E_max^eps(rho (x) Psi_K) computed on rho's factors."""
    if K < 2:
        raise StateValidationError(f"Catalyst dimension must be at least 2, got {K}")
    ball = SmoothingBall(state, eps)
    dims, side = state.dims, state.side
    name = f"catalysed-max-entropy-K{K}-eps{eps:g}"

    relaxed = SdpProblem(name + "-ppt")
    encoding, leftover = _state_terms(relaxed, ball)
    s1 = relaxed.add_block("singlet_part", side)
    s2 = relaxed.add_block("rest_part", side)
    _dominate(relaxed, [(s1, sdp.identity())], [(s2, sdp.identity())], ball, encoding, leftover)
    _add_catalyst_ppt(relaxed, [(s1, sdp.identity())], [(s2, sdp.identity())], dims, K)
    relaxed.set_objective([(s1, np.eye(side)), (s2, np.eye(side))])
    lower_solution = sdp.solve(relaxed, settings)
    lower_solution.raise_for_status()
    lower = max(lower_solution.bounds[0], 1e-300)

    inner = SdpProblem(name + "-separable")
    encoding, leftover = _state_terms(inner, ball)
    t1 = inner.add_block("iso_part", side)
    t2 = inner.add_block("rest_part", side)
    _dominate(
        inner,
        [(t1, sdp.scaled(1.0 / K))],
        [(t1, sdp.scaled((K - 1.0) / K)), (t2, sdp.identity())],
        ball,
        encoding,
        leftover,
    )
    cuts = bipartitions(len(dims))
    add_ppt_cone(inner, [(t1, sdp.identity())], dims, cuts, "iso_part")
    add_ppt_cone(inner, [(t2, sdp.identity())], dims, cuts, "rest_part")
    inner.set_objective([(t1, np.eye(side)), (t2, np.eye(side))])
    upper_solution = sdp.solve(inner, settings)
    upper_solution.raise_for_status()

    twirl = isotropic_parameters(state) is not None and not is_exact_dims(dims)
    x1, x2 = _smoothed_parts(ball, encoding, leftover, upper_solution)
    if twirl:
        x1, x2 = uu_star_twirl(x1, dims), uu_star_twirl(x2, dims)
    part1, part2, added = _certify_pair(
        _psd(upper_solution.value(t1)), _psd(upper_solution.value(t2)), dims, twirl
    )
    upper = max(float(np.real(np.trace(part1 + part2))) + added, upper_solution.bounds[1])
    upper = max(upper, lower)

    iso = isotropic(K, 1.0 / K).data
    rest = isotropic(K, 0.0).data
    sigma = np.kron(part1, iso) + np.kron(part2, rest)
    weight = float(np.real(np.trace(x1)))
    exact = upper - lower <= 1e-6 * max(1.0, lower)
    value = BracketedValue(
        lower=math.log2(lower),
        upper=math.log2(upper) if math.isfinite(upper) else math.inf,
        exact=exact,
        provenance=(Provenance.PPT_RELAXATION, Provenance.SDP_CERTIFIED),
        solver_meta={
            "iterations": float(lower_solution.iterations + upper_solution.iterations),
            "gap": max(lower_solution.gap, upper_solution.gap),
            "K": float(K),
        },
    )
    logger.debug(f"{name}: trace bracket [{lower:.9f}, {upper:.9f}], smoothed weight {weight:.9f}")
    return CatalystSolution(
        value=value,
        K=K,
        smoothed=nearest_density(x1, dims),
        weight=weight,
        sigma=sigma,
    )


def catalysed_global_robustness(
    singlet_part: np.ndarray,
    rest_part: np.ndarray,
    dims: Sequence[int],
    K: int,
    settings: Optional[NumericSettings] = None,
) -> BracketedValue:
    """R_G of P1 (x) Psi_K + P2 (x) Phi_K with noise taken catalyst-twirled as well."""
    side = math.prod(dims)
    name = f"catalysed-global-robustness-K{K}"
    p1, p2 = hermitian_part(singlet_part), hermitian_part(rest_part)
    base = float(np.real(np.trace(p1 + p2)))

    relaxed = SdpProblem(name + "-ppt")
    w1 = relaxed.add_block("noise_singlet", side)
    w2 = relaxed.add_block("noise_rest", side)
    _add_catalyst_ppt(
        relaxed, [(w1, sdp.identity())], [(w2, sdp.identity())], dims, K, rhs=(p1, p2)
    )
    relaxed.set_objective([(w1, np.eye(side)), (w2, np.eye(side))])
    lower_solution = sdp.solve(relaxed, settings)
    lower_solution.raise_for_status()

    inner = SdpProblem(name + "-separable")
    t1 = inner.add_block("iso_part", side)
    t2 = inner.add_block("rest_part", side)
    g1 = inner.add_block("noise_singlet", side)
    g2 = inner.add_block("noise_rest", side)
    inner.add_matrix_equality([(g1, sdp.identity()), (t1, sdp.scaled(-1.0 / K))], -p1)
    inner.add_matrix_equality(
        [(g2, sdp.identity()), (t1, sdp.scaled(-(K - 1.0) / K)), (t2, sdp.scaled(-1.0))], -p2
    )
    cuts = bipartitions(len(dims))
    add_ppt_cone(inner, [(t1, sdp.identity())], dims, cuts, "iso_part")
    add_ppt_cone(inner, [(t2, sdp.identity())], dims, cuts, "rest_part")
    inner.set_objective([(t1, np.eye(side)), (t2, np.eye(side))], offset=-base)
    upper_solution = sdp.solve(inner, settings)
    upper_solution.raise_for_status()

    twirl = (
        len(dims) == 2
        and dims[0] == dims[1]
        and not is_exact_dims(dims)
        and np.allclose(uu_star_twirl(p1, dims), p1, atol=1e-10)
        and np.allclose(uu_star_twirl(p2, dims), p2, atol=1e-10)
    )
    part1, part2, added = _certify_pair(
        _psd(upper_solution.value(t1)), _psd(upper_solution.value(t2)), dims, twirl
    )
    upper = float(np.real(np.trace(part1 + part2))) + added - base
    upper = max(upper, upper_solution.bounds[1], 0.0)
    lower = max(lower_solution.bounds[0], 0.0)
    return BracketedValue(
        lower=lower,
        upper=max(upper, lower),
        exact=upper - lower <= 1e-6,
        provenance=(Provenance.PPT_RELAXATION, Provenance.SDP_CERTIFIED),
        solver_meta={
            "iterations": float(lower_solution.iterations + upper_solution.iterations),
            "gap": max(lower_solution.gap, upper_solution.gap),
            "K": float(K),
        },
    )

