from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class NumericSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    seesaw_restarts: int = 32
    seed: int = 20240611
    accept_reduced: bool = False
    dump_dir: Optional[Path] = None


@dataclass
class RunConfig:
    numerics: NumericSettings = field(default_factory=NumericSettings)
    out_dir: Path = Path("results")
    workers: int = 2
    dimension_budget: int = 256
    cache: bool = True
    battery: tuple[str, ...] = ("default",)
    eps_grid: tuple[float, ...] = (0.0, 0.01, 0.1)
    delta_grid: tuple[float, ...] = (1.0, 0.5)
    regularize_eps: float = 0.01
    regularize_n_max: int = 2
