from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from oneshot_ent.models.sdp_block import BlockKind, SdpBlock


class SdpStatus(str, Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal-infeasible"
    DUAL_INFEASIBLE = "dual-infeasible"
    ITERATION_LIMIT = "iteration-limit"
    REDUCED_ACCURACY = "reduced-accuracy"


class SdpSolverError(RuntimeError):
    def __init__(self, message: str, solution: "SdpSolution"):
        super().__init__(message)
        self.solution = solution


def _hermitian_part(embedded: np.ndarray) -> np.ndarray:
    d = embedded.shape[0] // 2
    real = 0.5 * (embedded[:d, :d] + embedded[d:, d:])
    imag = 0.5 * (embedded[d:, :d] - embedded[:d, d:])
    return real + 1j * imag


@dataclass
class SdpSolution:
    status: SdpStatus
    primal_value: float
    dual_value: float
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    name: str = ""
    primal: list[np.ndarray] = field(default_factory=list, repr=False)
    slack: list[np.ndarray] = field(default_factory=list, repr=False)
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    accept_reduced: bool = False

    @property
    def is_optimal(self) -> bool:
        return self.status is SdpStatus.OPTIMAL

    @property
    def bounds(self) -> tuple[float, float]:
        """Interval holding the optimum: (min, max) of primal and dual values."""
        return min(self.primal_value, self.dual_value), max(self.primal_value, self.dual_value)

    @property
    def is_usable(self) -> bool:
        if self.status is SdpStatus.REDUCED_ACCURACY:
            return self.accept_reduced
        return self.is_optimal

    def raise_for_status(self) -> None:
        if not self.is_usable:
            raise SdpSolverError(
                f"SDP '{self.name}' ended with status {self.status.value} after "
                f"{self.iterations} iterations (gap {self.gap:.2e})",
                self,
            )

    def value(self, block: SdpBlock) -> np.ndarray | float:
        return self._read(self.primal[block.index], block)

    def dual_slack(self, block: SdpBlock) -> np.ndarray | float:
        if block.kind is BlockKind.HERMITIAN:
            return 2.0 * _hermitian_part(self.slack[block.index])
        return self._read(self.slack[block.index], block)

    @staticmethod
    def _read(matrix: np.ndarray, block: SdpBlock) -> np.ndarray | float:
        if block.kind is BlockKind.SCALAR:
            return float(matrix[0, 0])
        if block.kind is BlockKind.HERMITIAN:
            return _hermitian_part(matrix)
        return matrix.copy()

    def meta(self) -> dict[str, float]:
        return {"iterations": float(self.iterations), "gap": float(self.gap)}
