from oneshot_ent.sdp.problem import (
    CompiledSdp,
    SdpProblem,
    compose,
    embedded_in,
    hermitian_basis,
    identity,
    scalar_times,
    scaled,
    transposed,
)
from oneshot_ent.sdp.solver import solve

__all__ = [
    "CompiledSdp",
    "SdpProblem",
    "compose",
    "embedded_in",
    "hermitian_basis",
    "identity",
    "scalar_times",
    "scaled",
    "solve",
    "transposed",
]
