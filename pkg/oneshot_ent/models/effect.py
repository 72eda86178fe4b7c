from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Effect:
    """Operator 0 <= A <= I; build through `quantum.make_effect`."""

    data: np.ndarray
    dims: tuple[int, ...]

    @property
    def side(self) -> int:
        return self.data.shape[0]
