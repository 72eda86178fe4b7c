from dataclasses import dataclass

from oneshot_ent.models.bracketed_value import BracketedValue
from oneshot_ent.models.density_matrix import DensityMatrix


@dataclass
class SeppReport:
    is_sepp: bool
    worst_case_robustness: BracketedValue
    binding_input: DensityMatrix
    delta: float
    p_range: tuple[float, float] = (0.0, 1.0)
