from oneshot_ent.measures.ball import SmoothingBall
from oneshot_ent.measures.catalysed import (
    CatalystSolution,
    catalysed_global_robustness,
    catalysed_max_entropy,
    catalyst_size,
)
from oneshot_ent.measures.divergences import SupportError, d_max, d_min, e_r_pure
from oneshot_ent.measures.min_entropy import (
    MinEntropySolution,
    e_min,
    e_min_smooth,
    solve_min_entropy,
)
from oneshot_ent.measures.robustness import (
    RobustnessSolution,
    e_max,
    e_max_smooth,
    lr,
    lr_global,
    lr_smooth,
    r_global,
    r_sep,
    solve_max_entropy,
    solve_robustness,
)

__all__ = [
    "CatalystSolution",
    "MinEntropySolution",
    "RobustnessSolution",
    "SmoothingBall",
    "SupportError",
    "catalysed_global_robustness",
    "catalysed_max_entropy",
    "catalyst_size",
    "d_max",
    "d_min",
    "e_max",
    "e_max_smooth",
    "e_min",
    "e_min_smooth",
    "e_r_pure",
    "lr",
    "lr_global",
    "lr_smooth",
    "r_global",
    "r_sep",
    "solve_max_entropy",
    "solve_min_entropy",
    "solve_robustness",
]
