"""Separable-set operations: PPT relaxation on one side, explicit separable states on the other."""

import itertools
import logging
import math
import string
from typing import Optional, Sequence

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.models import (
    Bipartition,
    DensityMatrix,
    Effect,
    NumericSettings,
    SdpBlock,
    SepOptResult,
)
from oneshot_ent.quantum import (
    is_isotropic,
    isotropic_weight,
    nearest_density,
    partial_transpose,
    pure_state,
)
from oneshot_ent.sdp.problem import Adjoint, SdpProblem

logger = logging.getLogger("oneshot-ent")

PPT_TOL = 1e-9
SEESAW_TOL = 1e-10
SEESAW_MAX_SWEEPS = 500
EXACT_PAIRS = {(2, 2), (2, 3), (3, 2)}


class RelaxationGapError(RuntimeError):
    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class UnsupportedDimensionsError(ValueError):
    pass


def nontrivial_dims(dims: Sequence[int]) -> tuple[int, ...]:
    return tuple(d for d in dims if d > 1)


def is_exact_dims(dims: Sequence[int]) -> bool:
    """PPT equals separability: at most one nontrivial factor, or 2x2 / 2x3."""
    dims = nontrivial_dims(dims)
    return len(dims) <= 1 or (len(dims) == 2 and dims in EXACT_PAIRS)


def bipartitions(n_factors: int) -> list[Bipartition]:
    """One cut per bipartition: subsets not containing factor 0."""
    others = range(1, n_factors)
    return [
        Bipartition(frozenset(subset))
        for size in range(1, n_factors)
        for subset in itertools.combinations(others, size)
    ]


def single_factor_cuts(n_factors: int) -> list[Bipartition]:
    if n_factors == 2:
        return [Bipartition.of(1)]
    return [Bipartition.of(k) for k in range(n_factors)]


def ppt_check(
    state: DensityMatrix, cuts: Optional[Sequence[Bipartition]] = None
) -> tuple[bool, list[float]]:
    cuts = list(cuts) if cuts is not None else single_factor_cuts(state.n_factors)
    minima = [float(np.linalg.eigvalsh(partial_transpose(state, cut))[0]) for cut in cuts]
    return all(value >= -PPT_TOL for value in minima), minima


def sep_membership_exact(state: DensityMatrix) -> bool:
    if not is_exact_dims(state.dims):
        raise UnsupportedDimensionsError(
            f"Exact separability test needs 2x2 or 2x3 dimensions, got {list(state.dims)}"
        )
    if len(nontrivial_dims(state.dims)) <= 1:
        return True
    return ppt_check(state, bipartitions(state.n_factors))[0]


def add_ppt_cone(
    problem: SdpProblem,
    terms: Sequence[tuple[SdpBlock, Adjoint]],
    dims: Sequence[int],
    cuts: Sequence[Bipartition],
    label: str,
) -> list[SdpBlock]:
    """Require X^T_c >= 0 for each cut, where X = sum_j L_j(X_j) is given by adjoint terms."""
    side = math.prod(dims)
    blocks = []
    for k, cut in enumerate(cuts):
        block = problem.add_block(f"{label}_pt{k}", side)
        flipped = [
            (var, sdp.compose(sdp.transposed(dims, sorted(cut.cut), -1.0), adjoint))
            for var, adjoint in terms
        ]
        problem.add_matrix_equality([(block, sdp.identity())] + flipped, np.zeros((side, side)))
        blocks.append(block)
    return blocks


def ball_radius(side: int) -> float:
    return 1.0 / math.sqrt(side * (side - 1))


def separable_ball_offset(matrix: np.ndarray, dims: Sequence[int]) -> float:
    """Smallest c >= 0 with X + cI inside the bipartite separable ball around the scaled identity.

    Returns inf when no separable ball is available (three or more nontrivial factors).
    """
    if len(nontrivial_dims(dims)) > 2:
        return math.inf
    side = matrix.shape[0]
    if side == 1:
        return 0.0
    trace = float(np.real(np.trace(matrix)))
    distance = float(np.linalg.norm(matrix - (trace / side) * np.eye(side)))
    return max(0.0, (distance / ball_radius(side) - trace) / side)


def round_to_separable(state: np.ndarray, dims: Sequence[int]) -> Optional[DensityMatrix]:
    """Mix a trace-one operator with white noise until it is provably separable."""
    if len(nontrivial_dims(dims)) <= 1:
        return nearest_density(state, dims)
    if is_exact_dims(dims):
        return nearest_density(state, dims)
    offset = separable_ball_offset(state, dims)
    if math.isinf(offset):
        return None
    side = state.shape[0]
    return nearest_density((state + offset * np.eye(side)) / (1 + offset * side), dims)


def _contract(tensor: np.ndarray, vectors: list[np.ndarray], keep: int) -> np.ndarray:
    m = len(vectors)
    rows, cols = string.ascii_lowercase[:m], string.ascii_uppercase[:m]
    operands, subscripts = [tensor], [rows + cols]
    for j, vec in enumerate(vectors):
        if j == keep:
            continue
        operands.extend((vec.conj(), vec))
        subscripts.extend((rows[j], cols[j]))
    output = rows[keep] + cols[keep]
    return np.einsum(",".join(subscripts) + "->" + output, *operands)


def _product_vector(vectors: list[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for vec in vectors:
        out = np.kron(out, vec)
    return out


def seesaw_product_max(
    effect: Effect,
    restarts: int = 32,
    rng: Optional[np.random.Generator] = None,
) -> tuple[float, DensityMatrix]:
    """Alternating top-eigenvector updates over product vectors; the value is attained."""
    rng = rng if rng is not None else np.random.default_rng(0)
    dims = effect.dims
    tensor = effect.data.reshape(tuple(dims) + tuple(dims))
    best_value, best_vectors = -math.inf, None

    for restart in range(max(restarts, 1)):
        vectors = []
        for d in dims:
            vec = rng.normal(size=d) + 1j * rng.normal(size=d)
            vectors.append(vec / np.linalg.norm(vec))
        value = -math.inf
        for _ in range(SEESAW_MAX_SWEEPS):
            for k in range(len(dims)):
                eigvals, eigvecs = np.linalg.eigh(_contract(tensor, vectors, k))
                vectors[k] = eigvecs[:, -1]
            product = _product_vector(vectors)
            new_value = float(np.real(product.conj() @ effect.data @ product))
            converged = abs(new_value - value) < SEESAW_TOL
            value = new_value
            if converged:
                break
        logger.debug(f"see-saw restart {restart}: {value:.12f}")
        if value > best_value:
            best_value, best_vectors = value, [v.copy() for v in vectors]

    return best_value, pure_state(_product_vector(best_vectors), dims)


def _isotropic_effect_max(effect: Effect) -> SepOptResult:
    d = effect.dims[0]
    a = float(np.real(isotropic_weight(effect)))
    b = float(np.real(np.trace(effect.data)) - a) / (d * d - 1)
    diagonal, off = a / d + b * (1 - 1 / d), b
    basis = np.eye(d)
    if diagonal >= off:
        value, point = diagonal, pure_state(np.kron(basis[0], basis[0]), effect.dims)
    else:
        value, point = off, pure_state(np.kron(basis[0], basis[1]), effect.dims)
    return SepOptResult(
        ppt_value=value,
        heuristic_value=value,
        witness=point,
        product_point=point,
        exact=True,
        solver_meta={"closed_form": 1.0},
    )


def ppt_max_linear(
    effect: Effect,
    cuts: Optional[Sequence[Bipartition]] = None,
    settings: Optional[NumericSettings] = None,
) -> tuple[float, DensityMatrix, dict[str, float]]:
    """max Tr(A sigma) over trace-one states that are PPT across every cut."""
    dims = effect.dims
    cuts = list(cuts) if cuts is not None else bipartitions(len(dims))
    problem = SdpProblem("max-linear-over-ppt", maximize=True)
    sigma = problem.add_block("sigma", effect.side)
    problem.set_objective([(sigma, effect.data)])
    problem.add_constraint([(sigma, np.eye(effect.side))], 1.0)
    add_ppt_cone(problem, [(sigma, sdp.identity())], dims, cuts, "sigma")

    solution = sdp.solve(problem, settings)
    solution.raise_for_status()
    _, upper = solution.bounds
    witness = nearest_density(solution.value(sigma), dims)
    return upper, witness, solution.meta()


def max_linear_over_sep(
    effect: Effect,
    cuts: Optional[Sequence[Bipartition]] = None,
    settings: Optional[NumericSettings] = None,
) -> SepOptResult:
    settings = settings or NumericSettings()
    dims = effect.dims
    if len(dims) == 2 and dims[0] == dims[1] and dims[0] > 1 and is_isotropic(effect):
        return _isotropic_effect_max(effect)
    if len(nontrivial_dims(dims)) <= 1:
        eigvals, eigvecs = np.linalg.eigh(effect.data)
        point = pure_state(eigvecs[:, -1], dims)
        value = float(eigvals[-1])
        return SepOptResult(value, value, point, point, True)

    ppt_value, witness, meta = ppt_max_linear(effect, cuts, settings)
    rng = np.random.default_rng(settings.seed)
    heuristic, product = seesaw_product_max(effect, settings.seesaw_restarts, rng)

    rounded = round_to_separable(witness.data, dims)
    if rounded is not None and not is_exact_dims(dims):
        ball_value = float(np.real(np.trace(effect.data @ rounded.data)))
        if ball_value > heuristic:
            heuristic, product = ball_value, rounded

    if heuristic > ppt_value + 1e-6:
        logger.warning(
            f"see-saw value {heuristic:.9f} exceeds PPT bound {ppt_value:.9f}; solver tolerance?"
        )
    exact = is_exact_dims(dims)
    if exact and abs(ppt_value - heuristic) > 1e-6:
        logger.debug(f"see-saw stopped {ppt_value - heuristic:.2e} below the exact PPT value")
    return SepOptResult(
        ppt_value=ppt_value,
        heuristic_value=min(heuristic, ppt_value),
        witness=witness,
        product_point=product,
        exact=exact,
        solver_meta=meta,
    )
