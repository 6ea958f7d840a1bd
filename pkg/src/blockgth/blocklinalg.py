"""Level/phase block matrices and stationary vectors.

A block-structured chain has states ``(level, phase)``.  Every level may have
its own number of phases, so the boundary level of a queueing model can be
smaller than the repeating levels.  Blocks are kept inside one dense array and
addressed through per-level offsets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

#: Tolerance used for every stochasticity test at construction time.
STOCHASTIC_TOL = 1e-12


class NotStochasticError(ValueError):
    """A matrix row leaves the admissible substochastic/stochastic range."""


class SingularPivotError(ArithmeticError):
    """``I - Phi`` could not be inverted (reducible chain or breakdown)."""


def _offsets(counts: Sequence[int]) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))


@dataclass(frozen=True)
class LevelPhaseIndex:
    """A state ``(level, phase)``; phases are 1-based as in the literature."""

    level: int
    phase: int

    def check(self, phase_counts: Sequence[int]) -> None:
        if not 0 <= self.level < len(phase_counts):
            raise IndexError(f"level {self.level} out of range")
        if not 1 <= self.phase <= phase_counts[self.level]:
            raise IndexError(
                f"phase {self.phase} out of range 1..{phase_counts[self.level]}"
            )

    def scalar(self, phase_counts: Sequence[int]) -> int:
        """Position of the state in the flattened (scalar) ordering."""
        self.check(phase_counts)
        return int(_offsets(phase_counts)[self.level]) + self.phase - 1


class BlockMatrix:
    """Dense nonnegative matrix partitioned into level blocks.

    Parameters
    ----------
    array : array_like, shape (sum(row_counts), sum(col_counts))
        Scalar entries.
    row_counts : sequence of int
        Phase count of every block row (level).
    col_counts : sequence of int, optional
        Phase count of every block column; defaults to ``row_counts``.
    stochastic : bool
        If set, every scalar row must sum to one within ``STOCHASTIC_TOL``.

    The instance is read-only: the stored array has its write flag cleared and
    accessors hand out copies.
    """

    __slots__ = ("_a", "row_counts", "col_counts", "row_offsets", "col_offsets")

    def __init__(self, array, row_counts: Sequence[int],
                 col_counts: Sequence[int] | None = None, *,
                 stochastic: bool = False, copy: bool = True):
        a = np.array(array, dtype=float, copy=copy)
        if a.ndim != 2:
            raise ValueError("block matrix needs a 2-d array")
        self.row_counts = tuple(int(c) for c in row_counts)
        self.col_counts = (self.row_counts if col_counts is None
                           else tuple(int(c) for c in col_counts))
        if min(self.row_counts + self.col_counts, default=1) < 1:
            raise ValueError("phase counts must be positive")
        self.row_offsets = _offsets(self.row_counts)
        self.col_offsets = _offsets(self.col_counts)
        if a.shape != (self.row_offsets[-1], self.col_offsets[-1]):
            raise ValueError(
                f"array shape {a.shape} inconsistent with phase counts "
                f"({self.row_offsets[-1]}, {self.col_offsets[-1]})"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite entry")
        if np.any(a < 0):
            raise NotStochasticError("negative entry in block matrix")
        a.setflags(write=False)
        self._a = a
        if stochastic:
            dev = np.max(np.abs(a.sum(axis=1) - 1.0), initial=0.0)
            if dev > STOCHASTIC_TOL:
                raise NotStochasticError(f"row sums deviate from 1 by {dev:.3e}")

    # construction helpers -------------------------------------------------
    @classmethod
    def from_blocks(cls, phase_counts: Sequence[int],
                    blocks: Mapping[tuple[int, int], object], **kw) -> "BlockMatrix":
        """Assemble a square block matrix from ``{(i, j): block}``; missing blocks are zero."""
        off = _offsets(phase_counts)
        a = np.zeros((off[-1], off[-1]))
        for (i, j), blk in blocks.items():
            blk = np.asarray(blk, dtype=float)
            if blk.shape != (phase_counts[i], phase_counts[j]):
                raise ValueError(f"block ({i},{j}) has shape {blk.shape}")
            a[off[i]:off[i + 1], off[j]:off[j + 1]] = blk
        return cls(a, phase_counts, copy=False, **kw)

    # basic properties -----------------------------------------------------
    @property
    def array(self) -> np.ndarray:
        """Read-only view of the scalar entries."""
        return self._a

    @property
    def num_levels(self) -> int:
        return len(self.row_counts)

    @property
    def phase_counts(self) -> tuple[int, ...]:
        if not self.is_square:
            raise ValueError("phase_counts is only defined for square block matrices")
        return self.row_counts

    @property
    def offsets(self) -> np.ndarray:
        return self.row_offsets

    @property
    def is_square(self) -> bool:
        return self.row_counts == self.col_counts

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def row_sums(self) -> np.ndarray:
        return self._a.sum(axis=1)

    def block(self, i: int, j: int) -> np.ndarray:
        return block_get(self, i, j)

    def is_stochastic(self, tol: float = STOCHASTIC_TOL) -> bool:
        return bool(np.max(np.abs(self.row_sums() - 1.0), initial=0.0) <= tol)

    def __repr__(self) -> str:
        return (f"BlockMatrix(levels={len(self.row_counts)}x{len(self.col_counts)}, "
                f"shape={self._a.shape})")


def block_get(m: BlockMatrix, i: int, j: int) -> np.ndarray:
    """Return a copy of block ``(i, j)``."""
    if not (0 <= i < len(m.row_counts) and 0 <= j < len(m.col_counts)):
        raise IndexError(f"block ({i},{j}) out of range")
    ro, co = m.row_offsets, m.col_offsets
    return m.array[ro[i]:ro[i + 1], co[j]:co[j + 1]].copy()


def row_defect(m: BlockMatrix, i: int, alpha: int) -> float:
    """Missing mass ``1 - sum`` of scalar row ``(i, alpha)``; ``alpha`` is 1-based."""
    LevelPhaseIndex(i, alpha).check(m.row_counts)
    s = float(m.array[m.row_offsets[i] + alpha - 1].sum())
    if s > 1.0 + STOCHASTIC_TOL:
        raise NotStochasticError(f"row ({i},{alpha}) sums to {s!r} > 1")
    return max(1.0 - s, 0.0)


def row_defects(m: BlockMatrix) -> np.ndarray:
    """Vectorised :func:`row_defect` over all scalar rows."""
    s = m.row_sums()
    if np.any(s > 1.0 + STOCHASTIC_TOL):
        raise NotStochasticError("matrix is not substochastic")
    return np.maximum(1.0 - s, 0.0)


def partition(m: BlockMatrix, n: int):
    """Split at level ``n`` into ``(T, U, D, Q)``.

    ``T`` covers levels ``0..n``, ``Q`` levels ``n+1..N``; ``U`` and ``D`` are the
    rectangular off-diagonal corners.
    """
    if not m.is_square:
        raise ValueError("partition needs a square block matrix")
    if not 0 <= n < m.num_levels - 1:
        raise IndexError(f"partition level {n} out of range 0..{m.num_levels - 2}")
    k = m.offsets[n + 1]
    pc = m.phase_counts
    lo, hi = pc[:n + 1], pc[n + 1:]
    a = m.array
    return (BlockMatrix(a[:k, :k], lo), BlockMatrix(a[:k, k:], lo, hi),
            BlockMatrix(a[k:, :k], hi, lo), BlockMatrix(a[k:, k:], hi))


def reassemble(T: BlockMatrix, U: BlockMatrix, D: BlockMatrix, Q: BlockMatrix) -> BlockMatrix:
    """Inverse of :func:`partition`."""
    a = np.block([[T.array, U.array], [D.array, Q.array]])
    return BlockMatrix(a, T.row_counts + Q.row_counts, copy=False)


class StationaryVector:
    """Level-partitioned nonnegative row vector."""

    __slots__ = ("_v", "phase_counts", "offsets")

    def __init__(self, values, phase_counts: Sequence[int], *, copy: bool = True):
        v = np.array(values, dtype=float, copy=copy).ravel()
        self.phase_counts = tuple(int(c) for c in phase_counts)
        self.offsets = _offsets(self.phase_counts)
        if v.size != self.offsets[-1]:
            raise ValueError("vector length inconsistent with phase counts")
        if np.any(v < 0):
            raise ValueError("stationary vector has a negative entry")
        v.setflags(write=False)
        self._v = v

    @property
    def array(self) -> np.ndarray:
        return self._v

    @property
    def num_levels(self) -> int:
        return len(self.phase_counts)

    def level(self, i: int) -> np.ndarray:
        return self._v[self.offsets[i]:self.offsets[i + 1]].copy()

    def level_masses(self) -> np.ndarray:
        return np.add.reduceat(self._v, self.offsets[:-1]) if self._v.size else self._v

    @property
    def total(self) -> float:
        return float(self._v.sum())

    def __len__(self) -> int:
        return self._v.size

    def __repr__(self) -> str:
        return f"StationaryVector(levels={self.num_levels}, total={self.total:.15g})"


# --------------------------------------------------------------------------
# matrix text format
# --------------------------------------------------------------------------

class MatrixFileError(ValueError):
    """Malformed matrix file; carries the offending line number."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_matrix(text: str, *, stochastic: bool = False) -> BlockMatrix:
    """Parse the block matrix text format (see ``docs/matrix_format.md``).

    ::

        levels 2
        phases 1 2
        block 0 1
        0.4 0.6
        block 1 0
        1.0
        0.5
        ...
    """
    lines = list(_content_lines(text))
    pos = 0

    def expect(keyword: str) -> tuple[int, list[str]]:
        nonlocal pos
        if pos >= len(lines):
            raise MatrixFileError(len(text.splitlines()) + 1, f"expected '{keyword}'")
        lineno, tok = lines[pos]
        if tok[0] != keyword:
            raise MatrixFileError(lineno, f"expected '{keyword}', got '{tok[0]}'")
        pos += 1
        return lineno, tok[1:]

    lineno, tok = expect("levels")
    try:
        nlev = int(tok[0]) if len(tok) == 1 else -1
    except ValueError:
        nlev = -1
    if nlev < 1:
        raise MatrixFileError(lineno, "'levels' takes one positive integer")
    lineno, tok = expect("phases")
    try:
        counts = [int(t) for t in tok]
    except ValueError:
        raise MatrixFileError(lineno, "phase counts must be integers") from None
    if len(counts) != nlev or min(counts) < 1:
        raise MatrixFileError(lineno, f"need {nlev} positive phase counts")
    off = _offsets(counts)
    a = np.zeros((off[-1], off[-1]))
    seen = set()
    while pos < len(lines):
        lineno, tok = lines[pos]
        if tok[0] != "block" or len(tok) != 3:
            raise MatrixFileError(lineno, "expected 'block i j'")
        try:
            i, j = int(tok[1]), int(tok[2])
        except ValueError:
            raise MatrixFileError(lineno, "block indices must be integers") from None
        if not (0 <= i < nlev and 0 <= j < nlev):
            raise MatrixFileError(lineno, f"block ({i},{j}) out of range")
        if (i, j) in seen:
            raise MatrixFileError(lineno, f"block ({i},{j}) given twice")
        seen.add((i, j))
        pos += 1
        for row in range(counts[i]):
            if pos >= len(lines):
                raise MatrixFileError(lineno, f"block ({i},{j}) truncated")
            rl, vals = lines[pos]
            if len(vals) != counts[j]:
                raise MatrixFileError(rl, f"expected {counts[j]} entries, got {len(vals)}")
            try:
                a[off[i] + row, off[j]:off[j + 1]] = [float(v) for v in vals]
            except ValueError:
                raise MatrixFileError(rl, "non-numeric entry") from None
            pos += 1
    try:
        return BlockMatrix(a, counts, copy=False, stochastic=stochastic)
    except ValueError as exc:
        raise MatrixFileError(lines[-1][0] if lines else 1, str(exc)) from None


def read_matrix(path, *, stochastic: bool = False) -> BlockMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), stochastic=stochastic)


def format_matrix(m: BlockMatrix) -> str:
    """Serialise a square block matrix; all-zero blocks are skipped."""
    pc = m.phase_counts
    out = [f"levels {m.num_levels}", "phases " + " ".join(map(str, pc))]
    for i in range(m.num_levels):
        for j in range(m.num_levels):
            blk = block_get(m, i, j)
            if not blk.any():
                continue
            out.append(f"block {i} {j}")
            out.extend(" ".join(repr(float(x)) for x in row) for row in blk)
    return "\n".join(out) + "\n"


def write_matrix(m: BlockMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(m))
