from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated state; build through `quantum.make_density`."""

    data: np.ndarray
    dims: tuple[int, ...]

    @property
    def side(self) -> int:
        return self.data.shape[0]

    @property
    def n_factors(self) -> int:
        return len(self.dims)
