import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.models import DensityMatrix, SdpBlock, SdpSolution
from oneshot_ent.quantum import SUPPORT_CUTOFF, StateValidationError
from oneshot_ent.sdp.problem import Adjoint, SdpProblem


@dataclass(frozen=True)
class BallEncoding:
    """Block W = [[L, Y], [Y^dag, state]] over the support of the center rho = V L V^dag."""

    block: SdpBlock
    rank: int
    side: int

    @property
    def state_term(self) -> tuple[SdpBlock, Adjoint]:
        return self.block, sdp.embedded_in(self.rank + self.side, self.rank)

    def state(self, solution: SdpSolution) -> np.ndarray:
        w = solution.value(self.block)
        return w[self.rank:, self.rank:]


@dataclass(frozen=True)
class SmoothingBall:
    """States whose fidelity with `center` is at least 1 - epsilon."""

    center: DensityMatrix
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise StateValidationError(f"Smoothing must lie in [0, 1), got {self.epsilon}")

    @property
    def is_trivial(self) -> bool:
        return self.epsilon == 0.0

    def encode(
        self, problem: SdpProblem, name: str = "ball", trace: Optional[float] = 1.0
    ) -> BallEncoding:
        """Add W >= 0 with the certificate Re Tr(V Y) >= sqrt(1 - epsilon).

        With `trace=None` the trace of the state block is left to the caller.
        """
        eigvals, eigvecs = np.linalg.eigh(self.center.data)
        keep = eigvals > SUPPORT_CUTOFF * eigvals[-1]
        values, support = eigvals[keep], eigvecs[:, keep]
        rank, side = values.size, self.center.side
        total = rank + side

        w = problem.add_block(name, total)
        problem.add_matrix_equality(
            [(w, sdp.embedded_in(total, 0))], np.diag(values).astype(complex)
        )
        if trace is not None:
            corner = np.zeros((total, total), dtype=complex)
            corner[rank:, rank:] = np.eye(side)
            problem.add_constraint([(w, corner)], trace)

        overlap = np.zeros((total, total), dtype=complex)
        overlap[rank:, :rank] = support / 2
        overlap[:rank, rank:] = support.conj().T / 2
        problem.add_inequality([(w, overlap)], math.sqrt(1 - self.epsilon), sense=">=")
        return BallEncoding(block=w, rank=rank, side=side)
