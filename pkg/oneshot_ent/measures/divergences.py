import math

import numpy as np

from oneshot_ent.models import DensityMatrix
from oneshot_ent.quantum import (
    SUPPORT_CUTOFF,
    Operator,
    StateValidationError,
    as_array,
    hermitian_part,
    purity,
    reduced_state,
    support_projector,
    von_neumann_entropy,
)

SUPPORT_LEAK_TOL = 1e-9
PURITY_TOL = 1e-9


class SupportError(ValueError):
    pass


def d_max(rho: DensityMatrix, sigma: Operator) -> float:
    """log2 min{lambda : rho <= lambda sigma}, restricted to the support of sigma."""
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(as_array(sigma)))
    top = max(float(eigvals[-1]), 0.0)
    keep = eigvals > SUPPORT_CUTOFF * top if top > 0 else np.zeros_like(eigvals, dtype=bool)
    if not np.any(keep):
        raise SupportError("sigma has empty support")
    basis = eigvecs[:, keep]

    leak = 1.0 - float(np.real(np.trace(basis.conj().T @ rho.data @ basis)))
    if leak > SUPPORT_LEAK_TOL:
        raise SupportError(f"rho has weight {leak:.3e} outside the support of sigma")

    scale = 1.0 / np.sqrt(eigvals[keep])
    restricted = (basis.conj().T @ rho.data @ basis) * np.outer(scale, scale)
    return math.log2(float(np.linalg.eigvalsh(hermitian_part(restricted))[-1]))


def d_min(rho: DensityMatrix, sigma: Operator) -> float:
    """-log2 Tr(P_rho sigma); inf when sigma is orthogonal to the support of rho."""
    overlap = float(np.real(np.trace(support_projector(rho) @ as_array(sigma))))
    if overlap <= 1e-15:
        return math.inf
    return -math.log2(overlap)


def e_r_pure(state: DensityMatrix, keep: int = 0) -> float:
    """Relative entropy of entanglement of a pure state: entropy of one marginal."""
    if purity(state) < 1.0 - PURITY_TOL:
        raise StateValidationError(
            f"Closed-form relative entropy needs a pure state (purity {purity(state):.10f})"
        )
    if state.n_factors < 2:
        return 0.0
    return max(von_neumann_entropy(reduced_state(state, [keep])), 0.0)
