from dataclasses import dataclass, field
from typing import Optional

from oneshot_ent.models.bracketed_value import BracketedValue
from oneshot_ent.models.channel import MeasurePrepareChannel
from oneshot_ent.models.density_matrix import DensityMatrix
from oneshot_ent.models.sepp_report import SeppReport


@dataclass
class ProtocolOutcome:
    kind: str
    log_M: float
    channel: MeasurePrepareChannel
    achieved_fidelity: float
    sepp_report: SeppReport
    measure: BracketedValue
    bound_lower: float
    bound_upper: float
    epsilon: float
    delta: float = 0.0
    catalyst_K: Optional[int] = None
    target: Optional[DensityMatrix] = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return int(round(2**self.log_M))
