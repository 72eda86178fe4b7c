from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

PASS_TOLERANCE = 1e-6


class RecordStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class TheoremRecord:
    theorem: int
    state: str
    eps: float
    delta: Optional[float]
    lower: float
    rate: float
    upper: float
    status: RecordStatus
    iterations: int = 0
    gap: float = 0.0
    wall_ms: float = 0.0
    note: str = ""
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is RecordStatus.PASS

    @property
    def key(self) -> tuple:
        return (self.theorem, self.state, self.eps, self.delta if self.delta is not None else -1.0)

    @staticmethod
    def within(lower: float, rate: float, upper: float) -> bool:
        return lower - PASS_TOLERANCE <= rate <= upper + PASS_TOLERANCE


@dataclass
class MonotonicityRecord:
    """A measure before and after a (delta-)SEPP channel, on one input."""

    protocol: str
    input_index: int
    before_upper: float
    after_lower: float
    allowance: float
    passed: bool
