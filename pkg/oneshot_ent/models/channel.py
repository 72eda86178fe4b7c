from dataclasses import dataclass
from typing import Optional

from oneshot_ent.models.density_matrix import DensityMatrix
from oneshot_ent.models.effect import Effect


@dataclass(frozen=True)
class Branch:
    effect: Effect
    output: DensityMatrix


@dataclass(frozen=True)
class MeasurePrepareChannel:
    """X -> sum_i Tr(E_i X) sigma_i; `catalyst_K` is set when the outputs carry a catalyst."""

    branches: tuple[Branch, ...]
    input_dims: tuple[int, ...]
    output_dims: tuple[int, ...]
    catalyst_K: Optional[int] = None
