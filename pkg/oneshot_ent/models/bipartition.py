from dataclasses import dataclass


@dataclass(frozen=True)
class Bipartition:
    cut: frozenset[int]

    @classmethod
    def of(cls, *indices: int) -> "Bipartition":
        return cls(cut=frozenset(indices))

    def validate(self, n_factors: int) -> None:
        if not self.cut or len(self.cut) >= n_factors:
            raise ValueError(f"Cut {sorted(self.cut)} is not proper for {n_factors} factors")
        if any(index < 0 or index >= n_factors for index in self.cut):
            raise ValueError(f"Cut {sorted(self.cut)} out of range for {n_factors} factors")
