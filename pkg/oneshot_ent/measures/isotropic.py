"""Closed forms on the isotropic family f Psi_d + (1 - f)(I - Psi_d)/(d^2 - 1).

Every measure here is invariant under the U x U* twirl, so its optimizers can be taken isotropic
and the optimizations collapse to one or three real variables.
"""

import math
from typing import Optional

import numpy as np
from scipy import optimize

from oneshot_ent.models import DensityMatrix
from oneshot_ent.quantum import is_isotropic, isotropic_weight


def isotropic_parameters(state: DensityMatrix) -> Optional[tuple[int, float]]:
    """(d, f) when the state is isotropic on two equal factors, else None."""
    dims = state.dims
    if len(dims) != 2 or dims[0] != dims[1] or dims[0] < 2 or not is_isotropic(state):
        return None
    f = float(np.real(isotropic_weight(state)))
    return dims[0], min(max(f, 0.0), 1.0)


def isotropic_fidelity(f: float, g: float) -> float:
    """Fidelity of two isotropic states; they commute, so it is classical."""
    return (math.sqrt(f * g) + math.sqrt(max(1 - f, 0.0) * max(1 - g, 0.0))) ** 2


def global_robustness(d: int, f: float) -> float:
    return max(0.0, f * d - 1.0)


def smoothed_weight(d: int, f: float, eps: float) -> float:
    """Smallest singlet weight g <= f reachable inside the fidelity ball, floored at 1/d."""
    floor = 1.0 / d
    if f <= floor or isotropic_fidelity(f, floor) >= 1 - eps:
        return min(f, floor)
    return optimize.brentq(lambda g: isotropic_fidelity(f, g) - (1 - eps), floor, f, xtol=1e-14)


def min_entropy_program(d: int, f: float, eps: float) -> tuple[float, float, float]:
    """min over A = a Psi + b (I - Psi) of max_sep Tr(A sigma) with Tr(A rho) >= 1 - eps.

    Returns (mu, a, b); the smoothed min-relative entropy is -log2(mu).
    """
    # variables (a, b, mu)
    result = optimize.linprog(
        c=[0.0, 0.0, 1.0],
        A_ub=[
            [1.0 / d, 1.0 - 1.0 / d, -1.0],
            [0.0, 1.0, -1.0],
            [-f, -(1.0 - f), 0.0],
        ],
        b_ub=[0.0, 0.0, -(1.0 - eps)],
        bounds=[(0.0, 1.0), (0.0, 1.0), (0.0, None)],
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"Isotropic min-entropy program failed: {result.message}")
    a, b, mu = (float(v) for v in result.x)
    return mu, a, b
