import math
from dataclasses import dataclass, field
from enum import Enum


class Provenance(str, Enum):
    PPT_RELAXATION = "ppt-relaxation"
    SEESAW = "seesaw"
    CLOSED_FORM = "closed-form"
    SDP_CERTIFIED = "sdp-certified"
    SEPARABLE_BALL = "separable-ball"


@dataclass(frozen=True)
class BracketedValue:
    lower: float
    upper: float
    exact: bool
    provenance: tuple[Provenance, ...]
    solver_meta: dict[str, float] = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def value(self) -> float:
        if math.isinf(self.upper):
            return self.lower
        return 0.5 * (self.lower + self.upper)

    @classmethod
    def point(
        cls,
        value: float,
        provenance: Provenance,
        solver_meta: dict[str, float] | None = None,
    ) -> "BracketedValue":
        return cls(value, value, True, (provenance,), solver_meta or {})

    def map(self, func, increasing: bool = True) -> "BracketedValue":
        """Apply a monotone function to both endpoints."""
        lo, hi = func(self.lower), func(self.upper)
        if not increasing:
            lo, hi = hi, lo
        return BracketedValue(lo, hi, self.exact, self.provenance, dict(self.solver_meta))

    def to_dict(self) -> dict:
        return {
            "value_lower": self.lower,
            "value_upper": self.upper,
            "exact": self.exact,
            "provenance": [p.value for p in self.provenance],
            "solver_meta": self.solver_meta,
        }
