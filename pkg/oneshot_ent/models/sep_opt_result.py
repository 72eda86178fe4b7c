from dataclasses import dataclass, field

from oneshot_ent.models.density_matrix import DensityMatrix


@dataclass
class SepOptResult:
    """max over the separable set of Tr(A sigma), bracketed from both sides."""

    ppt_value: float
    heuristic_value: float
    witness: DensityMatrix
    product_point: DensityMatrix
    exact: bool
    solver_meta: dict[str, float] = field(default_factory=dict)

    @property
    def certified_max(self) -> float:
        """Upper bound on the true maximum."""
        return self.ppt_value

    @property
    def achieved_max(self) -> float:
        """Value reached by an explicit separable state."""
        return self.ppt_value if self.exact else self.heuristic_value
