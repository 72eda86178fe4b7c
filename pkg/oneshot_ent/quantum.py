"""Finite-dimensional state primitives.

Factors are ordered row-major in the Kronecker product; cuts are sets of factor indices.
"""

import math
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from oneshot_ent.models import Bipartition, DensityMatrix, Effect

TOL = 1e-8
SUPPORT_CUTOFF = 1e-10
MAX_SIDE = 256

Operator = Union[np.ndarray, DensityMatrix, Effect]


class StateValidationError(ValueError):
    pass


class DimensionBudgetError(ValueError):
    pass


def as_array(matrix: Operator) -> np.ndarray:
    if isinstance(matrix, (DensityMatrix, Effect)):
        return matrix.data
    return np.asarray(matrix, dtype=complex)


def _check_dims(side: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise StateValidationError(f"Invalid factor dimensions {list(dims)}")
    if math.prod(dims) != side:
        raise StateValidationError(f"Dimensions {list(dims)} do not multiply to matrix side {side}")
    if side > MAX_SIDE:
        raise DimensionBudgetError(f"Matrix side {side} exceeds the dense budget of {MAX_SIDE}")
    return dims


def _square(matrix: Operator) -> np.ndarray:
    arr = np.array(as_array(matrix), dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StateValidationError(f"Expected a square matrix, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def make_density(matrix: Operator, dims: Sequence[int], tol: float = TOL) -> DensityMatrix:
    arr = _square(matrix)
    dims = _check_dims(arr.shape[0], dims)

    deviation = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if deviation > tol:
        raise StateValidationError(f"Matrix is not Hermitian (deviation {deviation:.2e})")
    herm = hermitian_part(arr)

    eigvals, eigvecs = np.linalg.eigh(herm)
    if eigvals[0] < -tol:
        raise StateValidationError(f"Negative eigenvalue {eigvals[0]:.3e} beyond tolerance")
    trace = float(np.sum(eigvals))
    if abs(trace - 1.0) > tol:
        raise StateValidationError(f"Trace {trace:.10f} deviates from 1")

    if eigvals[0] < 0:
        eigvals = np.clip(eigvals, 0.0, None)
        herm = (eigvecs * eigvals) @ eigvecs.conj().T
    herm = herm / np.real(np.trace(herm))
    return DensityMatrix(data=_freeze(herm), dims=dims)


def nearest_density(matrix: Operator, dims: Sequence[int], slack: float = 1e-6) -> DensityMatrix:
    """Clamp an operator that is a state up to `slack` (SDP read-outs) and renormalize."""
    herm = hermitian_part(_square(matrix))
    eigvals, eigvecs = np.linalg.eigh(herm)
    scale = max(float(np.sum(np.abs(eigvals))), 1e-300)
    if eigvals[0] < -slack * scale:
        raise StateValidationError(f"Operator has eigenvalue {eigvals[0]:.3e}; not a state")
    eigvals = np.clip(eigvals, 0.0, None)
    total = float(np.sum(eigvals))
    if total <= 0:
        raise StateValidationError("Operator has zero trace after clamping")
    return make_density((eigvecs * (eigvals / total)) @ eigvecs.conj().T, dims)


def make_effect(matrix: Operator, dims: Sequence[int], tol: float = TOL) -> Effect:
    arr = _square(matrix)
    dims = _check_dims(arr.shape[0], dims)
    deviation = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if deviation > tol:
        raise StateValidationError(f"Effect is not Hermitian (deviation {deviation:.2e})")
    herm = hermitian_part(arr)
    eigvals, eigvecs = np.linalg.eigh(herm)
    if eigvals[0] < -tol or eigvals[-1] > 1.0 + tol:
        raise StateValidationError(
            f"Effect spectrum [{eigvals[0]:.3e}, {eigvals[-1]:.3e}] leaves [0, 1]"
        )
    if eigvals[0] < 0 or eigvals[-1] > 1:
        herm = (eigvecs * np.clip(eigvals, 0.0, 1.0)) @ eigvecs.conj().T
    return Effect(data=_freeze(herm), dims=dims)


def identity_effect(dims: Sequence[int]) -> Effect:
    return make_effect(np.eye(math.prod(dims)), dims)


def complement_effect(effect: Effect) -> Effect:
    return make_effect(np.eye(effect.side) - effect.data, effect.dims)


def max_entangled_vector(M: int) -> np.ndarray:
    vec = np.zeros(M * M, dtype=complex)
    vec[[i * M + i for i in range(M)]] = 1.0 / math.sqrt(M)
    return vec


def max_entangled(M: int) -> DensityMatrix:
    if M < 1:
        raise StateValidationError(f"Rank must be >= 1, got {M}")
    vec = max_entangled_vector(M)
    return make_density(np.outer(vec, vec.conj()), [M, M])


def pure_state(vector: Sequence[complex], dims: Sequence[int]) -> DensityMatrix:
    vec = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise StateValidationError("Zero vector is not a state")
    vec = vec / norm
    return make_density(np.outer(vec, vec.conj()), dims)


def transpose_factors(matrix: np.ndarray, dims: Sequence[int], cut: Iterable[int]) -> np.ndarray:
    """Transpose the factors in `cut`; works on any square operator, not only states."""
    dims = tuple(dims)
    m = len(dims)
    tensor = np.asarray(matrix).reshape(dims + dims)
    axes = list(range(2 * m))
    for k in cut:
        axes[k], axes[m + k] = axes[m + k], axes[k]
    side = math.prod(dims)
    return tensor.transpose(axes).reshape(side, side)


def partial_transpose(
    state: Operator, cut: Bipartition, dims: Optional[Sequence[int]] = None
) -> np.ndarray:
    if dims is None:
        dims = state.dims
    cut.validate(len(dims))
    return transpose_factors(as_array(state), dims, cut.cut)


def trace_factors(matrix: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    dims = list(dims)
    tensor = np.asarray(matrix).reshape(tuple(dims) + tuple(dims))
    for k in sorted(set(traced), reverse=True):
        m = len(dims)
        tensor = np.trace(tensor, axis1=k, axis2=m + k)
        dims.pop(k)
    side = math.prod(dims) if dims else 1
    return tensor.reshape(side, side)


def partial_trace(state: DensityMatrix, cut: Bipartition) -> DensityMatrix:
    cut.validate(state.n_factors)
    remaining = [d for k, d in enumerate(state.dims) if k not in cut.cut]
    return make_density(trace_factors(state.data, state.dims, cut.cut), remaining)


def reduced_state(state: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = set(keep)
    traced = [k for k in range(state.n_factors) if k not in keep]
    if not traced:
        return state
    return partial_trace(state, Bipartition(frozenset(traced)))


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(np.asarray(matrix, dtype=complex)))
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T


def fidelity(rho: Operator, sigma: Operator) -> float:
    """Squared trace-norm overlap (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2."""
    a, b = as_array(rho), as_array(sigma)
    if a.shape != b.shape:
        raise StateValidationError(f"Shape mismatch {a.shape} vs {b.shape}")
    root = psd_sqrt(b)
    inner = np.linalg.eigvalsh(hermitian_part(root @ a @ root))
    value = float(np.sum(np.sqrt(np.clip(inner, 0.0, None)))) ** 2
    return min(max(value, 0.0), 1.0)


def _pair_dimension(side: int, dims: Optional[Sequence[int]]) -> int:
    if dims is not None:
        if len(dims) != 2 or dims[0] != dims[1]:
            raise StateValidationError(f"Twirl needs two equal factors, got {list(dims)}")
        return int(dims[0])
    d = math.isqrt(side)
    if d * d != side:
        raise StateValidationError(f"Side {side} is not d*d for equal factors")
    return d


def uu_star_twirl(matrix: Operator, dims: Optional[Sequence[int]] = None) -> np.ndarray:
    """Haar average of (U x U*) X (U x U*)^dag, in closed form."""
    arr = as_array(matrix)
    if dims is None and isinstance(matrix, (DensityMatrix, Effect)):
        dims = matrix.dims
    d = _pair_dimension(arr.shape[0], dims)
    if d == 1:
        return np.array(arr, dtype=complex)
    psi = max_entangled_vector(d)
    projector = np.outer(psi, psi.conj())
    weight = psi.conj() @ arr @ psi
    rest = np.trace(arr) - weight
    return weight * projector + rest * (np.eye(d * d) - projector) / (d * d - 1)


def isotropic_weight(matrix: Operator) -> complex:
    arr = as_array(matrix)
    psi = max_entangled_vector(math.isqrt(arr.shape[0]))
    return psi.conj() @ arr @ psi


def is_isotropic(state: Operator, dims: Optional[Sequence[int]] = None, tol: float = 1e-10) -> bool:
    arr = as_array(state)
    if dims is None and isinstance(state, (DensityMatrix, Effect)):
        dims = state.dims
    if dims is None or len(dims) != 2 or dims[0] != dims[1]:
        return False
    return bool(np.max(np.abs(uu_star_twirl(arr, dims) - arr)) <= tol)


def isotropic(d: int, f: float) -> DensityMatrix:
    if not 0.0 <= f <= 1.0:
        raise StateValidationError(f"Isotropic weight must lie in [0, 1], got {f}")
    if d == 1:
        return make_density(np.ones((1, 1)), [1, 1])
    psi = max_entangled_vector(d)
    projector = np.outer(psi, psi.conj())
    return make_density(f * projector + (1 - f) * (np.eye(d * d) - projector) / (d * d - 1), [d, d])


def werner(d: int, p: float) -> DensityMatrix:
    """p on the normalized antisymmetric projector, 1-p on the symmetric one."""
    if not 0.0 <= p <= 1.0:
        raise StateValidationError(f"Werner weight must lie in [0, 1], got {p}")
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    identity = np.eye(d * d)
    anti = (identity - swap) / 2
    sym = (identity + swap) / 2
    return make_density(p * anti / (d * (d - 1) / 2) + (1 - p) * sym / (d * (d + 1) / 2), [d, d])


def tensor(*states: DensityMatrix) -> DensityMatrix:
    data = np.ones((1, 1), dtype=complex)
    dims: list[int] = []
    for state in states:
        data = np.kron(data, state.data)
        dims.extend(state.dims)
    return make_density(data, dims)


def permute_factors(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    dims = tuple(dims)
    m = len(dims)
    side = math.prod(dims)
    axes = list(order) + [m + k for k in order]
    return np.asarray(matrix).reshape(dims + dims).transpose(axes).reshape(side, side)


def group_parties(state: DensityMatrix, parties: Sequence[Sequence[int]]) -> DensityMatrix:
    """Reorder factors so each party's factors are adjacent, then merge them."""
    order = [k for party in parties for k in party]
    if sorted(order) != list(range(state.n_factors)):
        raise StateValidationError(f"Parties {parties} do not partition {state.n_factors} factors")
    data = permute_factors(state.data, state.dims, order)
    merged = [math.prod(state.dims[k] for k in party) for party in parties]
    return make_density(data, merged)


def twirl_catalyst(matrix: np.ndarray, head_dims: Sequence[int], K: int) -> np.ndarray:
    """Apply uu_star_twirl to the trailing K x K factors, blockwise over the leading ones."""
    D = math.prod(head_dims)
    blocks = np.asarray(matrix, dtype=complex).reshape(D, K * K, D, K * K)
    out = np.empty_like(blocks)
    for i in range(D):
        for j in range(D):
            out[i, :, j, :] = uu_star_twirl(blocks[i, :, j, :], [K, K])
    return out.reshape(D * K * K, D * K * K)


def catalyst_blocks(
    matrix: np.ndarray, head_dims: Sequence[int], K: int
) -> tuple[np.ndarray, np.ndarray]:
    """(P1, P2) with twirl(X) = P1 x Psi_K + P2 x (I - Psi_K)/(K^2 - 1)."""
    D = math.prod(head_dims)
    psi = max_entangled_vector(K)
    projector = np.outer(psi, psi.conj())
    blocks = np.asarray(matrix, dtype=complex).reshape(D, K * K, D, K * K)
    p1 = np.einsum("iajb,ba->ij", blocks, projector)
    p2 = np.einsum("iaja->ij", blocks) - p1
    return p1, p2


def from_catalyst_blocks(p1: np.ndarray, p2: np.ndarray, K: int) -> np.ndarray:
    psi = max_entangled_vector(K)
    projector = np.outer(psi, psi.conj())
    rest = (np.eye(K * K) - projector) / (K * K - 1)
    return np.kron(p1, projector) + np.kron(p2, rest)


def support_projector(state: Operator, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(as_array(state)))
    top = max(float(eigvals[-1]), 0.0)
    kept = eigvecs[:, eigvals > cutoff * top] if top > 0 else eigvecs[:, :0]
    return kept @ kept.conj().T


def purity(state: Operator) -> float:
    arr = as_array(state)
    return float(np.real(np.trace(arr @ arr)))


def von_neumann_entropy(state: Operator) -> float:
    eigvals = np.linalg.eigvalsh(hermitian_part(as_array(state)))
    eigvals = eigvals[eigvals > 1e-15]
    return float(-np.sum(eigvals * np.log2(eigvals)))


def random_state(
    dims: Sequence[int], rng: np.random.Generator, rank: Optional[int] = None
) -> DensityMatrix:
    side = math.prod(dims)
    rank = rank or side
    ginibre = rng.normal(size=(side, rank)) + 1j * rng.normal(size=(side, rank))
    rho = ginibre @ ginibre.conj().T
    return make_density(rho / np.real(np.trace(rho)), dims)


def random_pure_state(
    dims: Sequence[int], rng: np.random.Generator, schmidt: Optional[Sequence[float]] = None
) -> DensityMatrix:
    """Random pure bipartite state; with `schmidt`, its squared Schmidt coefficients are fixed."""
    if schmidt is None:
        vec = rng.normal(size=math.prod(dims)) + 1j * rng.normal(size=math.prod(dims))
        return pure_state(vec, dims)
    d_a, d_b = dims
    coeffs = np.sqrt(np.asarray(schmidt, dtype=float) / np.sum(schmidt))
    u = _random_unitary(d_a, rng)
    v = _random_unitary(d_b, rng)
    vec = sum(c * np.kron(u[:, k], v[:, k]) for k, c in enumerate(coeffs))
    return pure_state(vec, dims)


def schmidt_state(coefficients: Sequence[float]) -> DensityMatrix:
    """sum_k sqrt(c_k)|kk> for squared Schmidt coefficients c_k."""
    coeffs = np.sqrt(np.asarray(coefficients, dtype=float) / np.sum(coefficients))
    d = len(coeffs)
    vec = np.zeros(d * d, dtype=complex)
    for k, c in enumerate(coeffs):
        vec[k * d + k] = c
    return pure_state(vec, [d, d])


def _random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases
