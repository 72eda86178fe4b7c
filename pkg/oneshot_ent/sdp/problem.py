"""Block SDP modelling.

Problems are stated over Hermitian, real symmetric and scalar blocks and compiled to the real
standard form

    min <C, X>  s.t.  <A_i, X> = b_i,  X = diag(X_1, ..., X_k) >= 0.

A Hermitian block H of side n is carried as a real block Y of side 2n and read back as
H(Y) = (Y11 + Y22)/2 + i(Y21 - Y12)/2, which is PSD whenever Y is.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy import sparse

from oneshot_ent.models import BlockKind, SdpBlock
from oneshot_ent.quantum import transpose_factors

logger = logging.getLogger("oneshot-ent")

Coefficient = Union[np.ndarray, float]
Adjoint = Callable[[np.ndarray], Coefficient]

ZERO_ROW_TOL = 1e-13


def embed(matrix: np.ndarray) -> np.ndarray:
    real, imag = np.real(matrix), np.imag(matrix)
    return np.block([[real, -imag], [imag, real]])


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of n x n Hermitian matrices under <X, Y> = Tr(XY)."""
    basis = []
    for p in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[p, p] = 1.0
        basis.append(e)
    for p in range(n):
        for q in range(p + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[p, q] = sym[q, p] = 1 / math.sqrt(2)
            anti = np.zeros((n, n), dtype=complex)
            anti[p, q] = -1j / math.sqrt(2)
            anti[q, p] = 1j / math.sqrt(2)
            basis.extend((sym, anti))
    return basis


def symmetric_basis(n: int) -> list[np.ndarray]:
    basis = []
    for p in range(n):
        e = np.zeros((n, n))
        e[p, p] = 1.0
        basis.append(e)
    for p in range(n):
        for q in range(p + 1, n):
            e = np.zeros((n, n))
            e[p, q] = e[q, p] = 1 / math.sqrt(2)
            basis.append(e)
    return basis


def identity() -> Adjoint:
    return lambda e: e


def scaled(coef: float) -> Adjoint:
    return lambda e: coef * e


def transposed(dims: Sequence[int], cut: Sequence[int], coef: float = 1.0) -> Adjoint:
    """Adjoint of X -> coef * X^T_cut; the partial transpose is self-adjoint."""
    return lambda e: coef * transpose_factors(e, dims, cut)


def scalar_times(matrix: np.ndarray, coef: float = 1.0) -> Adjoint:
    """Adjoint of the map s -> coef * s * G, which sends E to coef * Tr(E G)."""
    return lambda e: coef * float(np.real(np.trace(e @ matrix)))


def embedded_in(total: int, start: int, coef: float = 1.0) -> Adjoint:
    """Adjoint of reading the square sub-block at (start, start) out of a block of side `total`."""

    def adjoint(e: np.ndarray) -> np.ndarray:
        n = e.shape[0]
        padded = np.zeros((total, total), dtype=e.dtype)
        padded[start:start + n, start:start + n] = coef * e
        return padded

    return adjoint


def compose(*adjoints: Adjoint) -> Adjoint:
    """Adjoint of L_1 o L_2 o ... given the adjoints in that same order."""

    def adjoint(e: np.ndarray) -> Coefficient:
        for adj in adjoints:
            e = adj(e)
        return e

    return adjoint


@dataclass
class CompiledSdp:
    sizes: list[int]
    c: list[np.ndarray]
    a: list[sparse.csr_matrix]
    b: np.ndarray
    maximize: bool
    offset: float

    @property
    def n_constraints(self) -> int:
        return self.b.shape[0]


class SdpProblem:
    def __init__(self, name: str, maximize: bool = False):
        self.name = name
        self.maximize = maximize
        self.blocks: list[SdpBlock] = []
        self._objective: dict[int, np.ndarray] = {}
        self._rows: list[dict[int, np.ndarray]] = []
        self._rhs: list[float] = []
        self.offset = 0.0

    def add_block(self, name: str, size: int, kind: BlockKind = BlockKind.HERMITIAN) -> SdpBlock:
        if kind is BlockKind.SCALAR:
            size = 1
        block = SdpBlock(name=name, size=size, kind=kind, index=len(self.blocks))
        self.blocks.append(block)
        return block

    def add_scalar(self, name: str) -> SdpBlock:
        return self.add_block(name, 1, BlockKind.SCALAR)

    def _lift(self, block: SdpBlock, coef: Coefficient) -> np.ndarray:
        if block.kind is BlockKind.SCALAR:
            return np.array([[float(np.real(coef))]])
        coef = np.asarray(coef)
        if coef.shape != (block.size, block.size):
            raise ValueError(
                f"Coefficient shape {coef.shape} does not fit block '{block.name}' "
                f"of side {block.size}"
            )
        if block.kind is BlockKind.HERMITIAN:
            coef = 0.5 * (coef + coef.conj().T)
            return 0.5 * embed(coef)
        if np.max(np.abs(np.imag(coef)), initial=0.0) > ZERO_ROW_TOL:
            raise ValueError(f"Complex coefficient on real block '{block.name}'")
        coef = np.real(coef)
        return 0.5 * (coef + coef.T)

    def set_objective(
        self, terms: Sequence[tuple[SdpBlock, Coefficient]], offset: float = 0.0
    ) -> None:
        self._objective = {}
        for block, coef in terms:
            lifted = self._lift(block, coef)
            self._objective[block.index] = self._objective.get(block.index, 0) + lifted
        self.offset = offset

    def add_constraint(self, terms: Sequence[tuple[SdpBlock, Coefficient]], rhs: float) -> None:
        row: dict[int, np.ndarray] = {}
        for block, coef in terms:
            lifted = self._lift(block, coef)
            row[block.index] = row.get(block.index, 0) + lifted
        self._append(row, float(rhs))

    def add_inequality(
        self, terms: Sequence[tuple[SdpBlock, Coefficient]], rhs: float, sense: str = "<="
    ) -> SdpBlock:
        """Turn `sum <= rhs` (or `>=`) into an equality with a fresh nonnegative slack."""
        slack = self.add_scalar(f"slack{len(self.blocks)}")
        sign = 1.0 if sense == "<=" else -1.0
        self.add_constraint(list(terms) + [(slack, sign)], rhs)
        return slack

    def add_matrix_equality(
        self,
        terms: Sequence[tuple[SdpBlock, Adjoint]],
        rhs: np.ndarray,
        hermitian: bool = True,
    ) -> None:
        """sum_j L_j(X_j) = rhs, one scalar row per basis element, given the adjoints of L_j."""
        rhs = np.asarray(rhs)
        basis = hermitian_basis(rhs.shape[0]) if hermitian else symmetric_basis(rhs.shape[0])
        for element in basis:
            row: dict[int, np.ndarray] = {}
            for block, adjoint in terms:
                lifted = self._lift(block, adjoint(element))
                row[block.index] = row.get(block.index, 0) + lifted
            value = float(np.real(np.trace(element @ rhs)))
            self._append(row, value)

    def _append(self, row: dict[int, np.ndarray], rhs: float) -> None:
        row = {k: v for k, v in row.items() if np.max(np.abs(v)) > ZERO_ROW_TOL}
        if not row:
            if abs(rhs) > 1e-9:
                raise ValueError(f"SDP '{self.name}' has an empty constraint with rhs {rhs:.3e}")
            return
        self._rows.append(row)
        self._rhs.append(rhs)

    def compile(self) -> CompiledSdp:
        sizes = [block.embedded_size for block in self.blocks]
        sign = -1.0 if self.maximize else 1.0
        c = [
            sign * np.asarray(self._objective.get(k, np.zeros((n, n))), dtype=float)
            for k, n in enumerate(sizes)
        ]
        a = []
        for k, n in enumerate(sizes):
            rows, cols, vals = [], [], []
            for i, row in enumerate(self._rows):
                if k not in row:
                    continue
                flat = row[k].ravel()
                nz = np.flatnonzero(np.abs(flat) > ZERO_ROW_TOL)
                rows.extend([i] * nz.size)
                cols.extend(nz.tolist())
                vals.extend(flat[nz].tolist())
            a.append(sparse.csr_matrix((vals, (rows, cols)), shape=(len(self._rows), n * n)))
        logger.debug(
            f"SDP '{self.name}': {len(self.blocks)} blocks, sides {sizes}, "
            f"{len(self._rows)} constraints"
        )
        return CompiledSdp(
            sizes=sizes,
            c=c,
            a=a,
            b=np.asarray(self._rhs, dtype=float),
            maximize=self.maximize,
            offset=self.offset,
        )

    def write_sdpa(self, path: Path) -> Path:
        """SDPA sparse format: F0 = -C, F_i = A_i, c_i = b_i (the problem is the SDPA dual)."""
        compiled = self.compile()
        lines = [f'"{self.name}"', str(compiled.n_constraints), str(len(compiled.sizes))]
        lines.append(" ".join(str(n) for n in compiled.sizes))
        lines.append(" ".join(f"{v:.16g}" for v in compiled.b))
        for blk, (cmat, n) in enumerate(zip(compiled.c, compiled.sizes), start=1):
            for i in range(n):
                for j in range(i, n):
                    if abs(cmat[i, j]) > ZERO_ROW_TOL:
                        lines.append(f"0 {blk} {i + 1} {j + 1} {-cmat[i, j]:.16g}")
        for blk, (amat, n) in enumerate(zip(compiled.a, compiled.sizes), start=1):
            coo = amat.tocoo()
            for row, col, val in zip(coo.row, coo.col, coo.data):
                i, j = divmod(int(col), n)
                if i <= j:
                    lines.append(f"{row + 1} {blk} {i + 1} {j + 1} {val:.16g}")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
        logger.info(f"Wrote SDPA dump of '{self.name}' to {path}")
        return path
