from dataclasses import dataclass
from enum import Enum


class BlockKind(str, Enum):
    HERMITIAN = "hermitian"
    SYMMETRIC = "symmetric"
    SCALAR = "scalar"


@dataclass(frozen=True)
class SdpBlock:
    name: str
    size: int
    kind: BlockKind
    index: int

    @property
    def embedded_size(self) -> int:
        """Side of the real symmetric block the solver sees."""
        if self.kind is BlockKind.HERMITIAN:
            return 2 * self.size
        return self.size
