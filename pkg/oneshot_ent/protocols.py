"""Two-branch measure-prepare channels for distillation, dilution and catalytic dilution.

A channel here is X -> Tr(E X) tau_1 + Tr((I - E) X) tau_2. On separable inputs its output depends
only on p = Tr(E sigma), and the global robustness of the output is convex in p, so (delta-)SEPP is
decided at the two endpoints of the range of p over the separable set.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from oneshot_ent.measures.ball import SmoothingBall
from oneshot_ent.measures.catalysed import (
    catalysed_global_robustness,
    catalysed_max_entropy,
    catalyst_size,
)
from oneshot_ent.measures.isotropic import global_robustness, isotropic_parameters
from oneshot_ent.measures.min_entropy import solve_min_entropy
from oneshot_ent.measures.robustness import r_global, solve_robustness
from oneshot_ent.models import (
    BracketedValue,
    Branch,
    DensityMatrix,
    Effect,
    MeasurePrepareChannel,
    NumericSettings,
    ProtocolOutcome,
    Provenance,
    SeppReport,
)
from oneshot_ent.quantum import (
    MAX_SIDE,
    DimensionBudgetError,
    StateValidationError,
    catalyst_blocks,
    complement_effect,
    fidelity,
    group_parties,
    identity_effect,
    isotropic,
    make_density,
    make_effect,
    max_entangled,
    nearest_density,
    permute_factors,
    tensor,
)
from oneshot_ent.separability import RelaxationGapError, max_linear_over_sep

logger = logging.getLogger("oneshot-ent")

SEPP_TOL = 1e-6
RATE_SLACK = 1e-6
M_CAP = 2**10


class SeppVerificationError(RuntimeError):
    def __init__(self, message: str, report: SeppReport):
        super().__init__(message)
        self.report = report


def apply(channel: MeasurePrepareChannel, state: DensityMatrix) -> DensityMatrix:
    if tuple(state.dims) != tuple(channel.input_dims):
        raise StateValidationError(
            f"Channel expects input dims {list(channel.input_dims)}, got {list(state.dims)}"
        )
    out = np.zeros_like(channel.branches[0].output.data, dtype=complex)
    for branch in channel.branches:
        weight = float(np.real(np.trace(branch.effect.data @ state.data)))
        out = out + weight * branch.output.data
    return make_density(out, channel.output_dims, tol=1e-7)


def replacer(output: DensityMatrix, input_dims: Sequence[int]) -> MeasurePrepareChannel:
    return MeasurePrepareChannel(
        branches=(Branch(identity_effect(input_dims), output),),
        input_dims=tuple(input_dims),
        output_dims=output.dims,
    )


def two_branch(
    effect: Effect, first: DensityMatrix, second: DensityMatrix, catalyst_K: Optional[int] = None
) -> MeasurePrepareChannel:
    if first.dims != second.dims:
        raise StateValidationError(f"Branch outputs disagree on dims: {first.dims}, {second.dims}")
    return MeasurePrepareChannel(
        branches=(Branch(effect, first), Branch(complement_effect(effect), second)),
        input_dims=effect.dims,
        output_dims=first.dims,
        catalyst_K=catalyst_K,
    )


def _check_bipartite(state: DensityMatrix) -> None:
    if state.n_factors != 2:
        raise StateValidationError(f"Catalysis needs a bipartite state, got {list(state.dims)}")


def with_catalyst(state: DensityMatrix, K: int) -> DensityMatrix:
    """rho (x) Psi_K regrouped as (A A') | (B B')."""
    _check_bipartite(state)
    return group_parties(tensor(state, max_entangled(K)), ((0, 2), (1, 3)))


def _check_budget(side: int, label: str) -> None:
    if side * side > MAX_SIDE:
        raise DimensionBudgetError(f"{label} needs a {side}x{side}-factor output beyond {MAX_SIDE}")


def output_robustness(
    output: DensityMatrix,
    catalyst_K: Optional[int] = None,
    settings: Optional[NumericSettings] = None,
) -> BracketedValue:
    """R_G of a channel output, through the cheapest exact route available."""
    if catalyst_K is not None:
        K = catalyst_K
        head = [d // K for d in output.dims]
        ordered = permute_factors(output.data, [head[0], K, head[1], K], [0, 2, 1, 3])
        singlet_part, rest_part = catalyst_blocks(ordered, head, K)
        return catalysed_global_robustness(singlet_part, rest_part, head, K, settings)
    params = isotropic_parameters(output)
    if params is not None:
        d, f = params
        return BracketedValue.point(global_robustness(d, f), Provenance.CLOSED_FORM)
    return r_global(output, settings)


def _mix(p: float, channel: MeasurePrepareChannel) -> DensityMatrix:
    first, second = (branch.output.data for branch in channel.branches)
    return nearest_density(p * first + (1 - p) * second, channel.output_dims)


def verify_sepp(
    channel: MeasurePrepareChannel,
    delta: float = 0.0,
    settings: Optional[NumericSettings] = None,
) -> SeppReport:
    """Worst-case R_G of the output over separable inputs, checked against `delta`."""
    if delta < 0:
        raise StateValidationError(f"delta must be non-negative, got {delta}")
    branches = channel.branches
    if len(branches) > 2:
        raise StateValidationError(f"Only two-branch channels can be verified, got {len(branches)}")

    if len(branches) == 1:
        side = math.prod(channel.input_dims)
        binding = make_density(np.eye(side) / side, channel.input_dims)
        worst = output_robustness(branches[0].output, channel.catalyst_K, settings)
        p_range = (1.0, 1.0)
    else:
        effect = branches[0].effect
        top = max_linear_over_sep(effect, settings=settings)
        bottom = max_linear_over_sep(complement_effect(effect), settings=settings)
        p_max = min(max(top.certified_max, 0.0), 1.0)
        p_min = min(max(1.0 - bottom.certified_max, 0.0), p_max)
        candidates = []
        for p, point in ((p_max, top.product_point), (p_min, bottom.product_point)):
            value = output_robustness(_mix(p, channel), channel.catalyst_K, settings)
            logger.debug(f"SEPP endpoint p={p:.9f}: R_G in [{value.lower:.3e}, {value.upper:.3e}]")
            candidates.append((value, point))
        worst, binding = max(candidates, key=lambda item: (item[0].upper, item[0].lower))
        p_range = (p_min, p_max)

    return SeppReport(
        is_sepp=worst.upper <= delta + SEPP_TOL,
        worst_case_robustness=worst,
        binding_input=binding,
        delta=delta,
        p_range=p_range,
    )


def _certify(channel: MeasurePrepareChannel, delta: float, settings) -> SeppReport:
    report = verify_sepp(channel, delta, settings)
    if report.is_sepp:
        return report
    worst = report.worst_case_robustness
    if worst.lower <= delta + SEPP_TOL:
        raise RelaxationGapError(
            f"Output robustness bracket [{worst.lower:.3e}, {worst.upper:.3e}] straddles {delta}",
            worst.lower,
            worst.upper,
        )
    raise SeppVerificationError(
        f"Worst-case output robustness {worst.lower:.6f} exceeds {delta}", report
    )


def build_distill(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> ProtocolOutcome:
    """Tr(A rho) Psi_M + Tr((I - A) rho) (I - Psi_M)/(M^2 - 1) with M = 2^floor(E_min^eps)."""
    solution = solve_min_entropy(state, eps, settings)
    measure = solution.value
    log_m = min(math.floor(measure.lower + RATE_SLACK), int(math.log2(M_CAP)))
    M = 2 ** max(log_m, 0)
    _check_budget(M, "Distillation")
    logger.info(f"distill: E_min^{eps:g} in [{measure.lower:.6f}, {measure.upper:.6f}], M = {M}")

    if M == 1:
        channel = replacer(max_entangled(1), state.dims)
    else:
        sep = max_linear_over_sep(solution.effect, settings=settings)
        if sep.certified_max > 1.0 / M + SEPP_TOL:
            raise RelaxationGapError(
                f"Separable maximum of Tr(A sigma) may reach {sep.certified_max:.9f} > 1/{M}",
                sep.achieved_max,
                sep.certified_max,
            )
        channel = two_branch(solution.effect, max_entangled(M), isotropic(M, 0.0))
    report = _certify(channel, 0.0, settings)

    achieved = fidelity(apply(channel, state).data, max_entangled(M).data)
    return ProtocolOutcome(
        kind="distill",
        log_M=math.log2(M),
        channel=channel,
        achieved_fidelity=achieved,
        sepp_report=report,
        measure=measure,
        bound_lower=float(math.floor(measure.lower + RATE_SLACK)),
        bound_upper=measure.upper,
        epsilon=eps,
        target=max_entangled(M),
    )


def build_dilute(
    state: DensityMatrix, eps: float, settings: Optional[NumericSettings] = None
) -> ProtocolOutcome:
    """Tr(Psi_M w) rho_eps + (1 - Tr(Psi_M w)) pi with M = 1 + ceil(R(rho_eps))."""
    solution = solve_robustness(SmoothingBall(state, eps), separable_noise=True, settings=settings)
    if solution.noise is None:
        raise RelaxationGapError(
            "Separable noise could not be certified", solution.value.lower, solution.value.upper
        )
    smoothed = solution.state
    s_up = max(float(np.real(np.trace(solution.noise))), 0.0)
    M = 1 + max(math.ceil(s_up - RATE_SLACK), 0)
    _check_budget(M, "Dilution")
    measure = solution.value.map(lambda s: math.log2(1.0 + s))
    logger.info(f"dilute: R^{eps:g} in [{solution.value.lower:.6f}, {s_up:.6f}], M = {M}")

    if M == 1:
        channel = replacer(smoothed, [1, 1])
    else:
        filler = nearest_density(solution.noise / s_up, state.dims)
        channel = two_branch(make_effect(max_entangled(M).data, [M, M]), smoothed, filler)
    report = _certify(channel, 0.0, settings)

    achieved = fidelity(apply(channel, max_entangled(M)).data, state.data)
    return ProtocolOutcome(
        kind="dilute",
        log_M=math.log2(M),
        channel=channel,
        achieved_fidelity=achieved,
        sepp_report=report,
        measure=measure,
        bound_lower=measure.lower,
        bound_upper=measure.upper + 1.0,
        epsilon=eps,
        target=smoothed,
    )


def build_catalytic_dilute(
    state: DensityMatrix,
    eps: float,
    delta: float,
    settings: Optional[NumericSettings] = None,
) -> ProtocolOutcome:
    """Psi_M (x) Psi_K -> rho_eps (x) Psi_K by a delta-SEPP channel, K = ceil(1 + 1/delta)."""
    K = catalyst_size(delta)
    _check_bipartite(state)
    solution = catalysed_max_entropy(state, eps, K, settings)
    measure = solution.value
    if not math.isfinite(measure.upper):
        raise RelaxationGapError(
            "Separable operator for rho (x) Psi_K could not be certified",
            measure.lower,
            measure.upper,
        )
    smoothed = solution.smoothed
    ratio = solution.sigma_trace / (solution.weight * K)
    M = max(math.ceil(ratio - RATE_SLACK), 1)
    t = M * K
    _check_budget(t, "Catalytic dilution")
    logger.info(f"catalytic dilute: K = {K}, weight {solution.weight:.6f}, M = {M}")

    target = np.kron(smoothed.data, max_entangled(K).data)
    dims = [*state.dims, K, K]
    filler = nearest_density((t * solution.sigma / solution.sigma_trace - target) / (t - 1), dims)
    parties = ((0, 2), (1, 3))
    channel = two_branch(
        make_effect(max_entangled(t).data, [t, t]),
        group_parties(make_density(target, dims), parties),
        group_parties(filler, parties),
        catalyst_K=K,
    )
    report = _certify(channel, delta, settings)

    achieved = fidelity(smoothed.data, state.data)
    log_k = math.log2(K)
    return ProtocolOutcome(
        kind="catalytic-dilute",
        log_M=math.log2(M),
        channel=channel,
        achieved_fidelity=achieved,
        sepp_report=report,
        measure=measure,
        bound_lower=measure.lower - log_k - math.log2(1 + delta),
        bound_upper=measure.upper - math.log2(1 - eps) - log_k + 1.0,
        epsilon=eps,
        delta=delta,
        catalyst_K=K,
        target=smoothed,
    )
