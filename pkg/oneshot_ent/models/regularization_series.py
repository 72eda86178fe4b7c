from dataclasses import dataclass, field
from typing import Optional


@dataclass
class SeriesEntry:
    n: int
    lower: float
    upper: float


@dataclass
class RegularizationSeries:
    state: str
    eps: float
    entries: list[SeriesEntry] = field(default_factory=list)
    reference: Optional[float] = None
