"""Block-form GTH: forward block elimination, level-0 scalar GTH, back substitution.

Forward elimination runs from the highest level down to level 1.  After the
elimination of level ``n`` the leading corner is the chain censored on levels
``0..n-1``; the final 0-level corner is solved with the scalar,
subtraction-free GTH recursion and the remaining levels are recovered by back
substitution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .blocklinalg import (
    BlockMatrix,
    NotStochasticError,
    SingularPivotError,
    StationaryVector,
    _offsets,
)

#: Row-sum tolerance for the censored corners produced during elimination.
ELIMINATION_TOL = 1e-10


class PivotSolver:
    """Subtraction-free factorisation of ``I - phi`` for a substochastic block.

    ``exit_mass[k]`` is the mass of row ``k`` that leaves the block, so
    ``1 - phi[k, k]`` equals the off-diagonal row sum plus the exit mass.  The
    states are eliminated last to first; each Schur-complement pivot is
    rebuilt from such sums rather than formed as a difference, and the exit
    masses are carried along.  Solves against nonnegative right-hand sides
    then only add nonnegative terms, which keeps full relative accuracy even
    when ``I - phi`` is badly conditioned.
    """

    def __init__(self, phi, exit_mass, level: int = 0):
        f = np.array(phi, dtype=float)
        e = np.array(exit_mass, dtype=float).reshape(-1)
        n = f.shape[0]
        if f.shape != (n, n) or e.shape != (n,):
            raise ValueError("pivot block must be square with one exit mass per row")
        d = np.empty(n)
        for k in range(n - 1, -1, -1):
            s = f[k, :k].sum() + e[k]
            if not s > 0.0:
                raise SingularPivotError(
                    f"I - Phi_{level} is singular (state {k + 1} cannot leave); chain reducible?")
            d[k] = s
            if k:
                w = f[:k, k] / s
                f[:k, :k] += np.outer(w, f[k, :k])
                e[:k] += w * e[k]
        self.f, self.d = f, d

    def right(self, x) -> np.ndarray:
        """``(I - phi)^{-1} @ x``."""
        f, d = self.f, self.d
        y = np.array(x, dtype=float)
        for k in range(d.size - 1, 0, -1):
            y[:k] += np.multiply.outer(f[:k, k] / d[k], y[k])
        for k in range(d.size):
            y[k] = (y[k] + f[k, :k] @ y[:k]) / d[k]
        return y

    def left(self, w) -> np.ndarray:
        """``w @ (I - phi)^{-1}``."""
        f, d = self.f, self.d
        u = np.array(w, dtype=float)
        for i in range(d.size - 1, 0, -1):
            u[..., :i] += np.multiply.outer(u[..., i] / d[i], f[i, :i])
        for k in range(d.size):
            u[..., k] = (u[..., k] + u[..., :k] @ f[:k, k]) / d[k]
        return u


@dataclass(frozen=True)
class EliminationRecord:
    """Blocks retained by forward elimination.

    ``pivots[k]`` is ``Phi_k``, the diagonal block of the chain censored on
    levels ``0..k``.  ``up[k]`` stacks the blocks above it in column ``k`` (rows
    of levels ``0..k-1``) and ``down[k]`` the blocks left of it in row ``k``.
    ``up[0]`` and ``down[0]`` are empty.
    """

    phase_counts: tuple[int, ...]
    pivots: tuple[np.ndarray, ...]
    up: tuple[np.ndarray, ...]
    down: tuple[np.ndarray, ...]

    @property
    def num_levels(self) -> int:
        return len(self.pivots)

    @property
    def offsets(self) -> np.ndarray:
        return _offsets(self.phase_counts)

    def solver(self, k: int) -> PivotSolver:
        """Factorised ``I - Phi_k``; row ``k`` of the censored corner leaves through ``down[k]``."""
        return PivotSolver(self.pivots[k], self.down[k].sum(axis=1), k)


def _span(idx: np.ndarray):
    """Contiguous index sets become slices so the update avoids fancy indexing."""
    if idx.size and idx[-1] - idx[0] + 1 == idx.size:
        return slice(int(idx[0]), int(idx[-1]) + 1)
    return idx


def _eliminate(P: BlockMatrix, stop: int, keep: bool):
    if not P.is_square:
        raise ValueError("transition matrix must be square")
    if not P.is_stochastic():
        raise NotStochasticError("forward elimination needs a stochastic matrix")
    off = P.offsets
    W = P.array.copy()
    pivots, up, down = {}, {}, {}
    for n in range(P.num_levels - 1, stop, -1):
        a, b = off[n], off[n + 1]
        phi = W[a:b, a:b].copy()
        col = W[:a, a:b]
        row = W[a:b, :a]
        if keep:
            pivots[n], up[n], down[n] = phi, col.copy(), row.copy()
        piv = PivotSolver(phi, row.sum(axis=1), n)
        rows = np.flatnonzero(col.any(axis=1))
        cols = np.flatnonzero(row.any(axis=0))
        if rows.size and cols.size:
            x = piv.right(row[:, cols])
            upd = col[rows] @ x
            rs, cs = _span(rows), _span(cols)
            if isinstance(rs, slice) and isinstance(cs, slice):
                W[rs, cs] += upd
            else:
                W[np.ix_(rows, cols)] += upd
        # the corner left behind must again be stochastic
        dev = np.max(np.abs(W[:a, :a].sum(axis=1) - 1.0))
        if dev > ELIMINATION_TOL:
            raise SingularPivotError(
                f"censored corner at level {n - 1} not stochastic (deviation {dev:.2e})")
    return W, pivots, up, down


def forward_eliminate(P: BlockMatrix) -> EliminationRecord:
    """Eliminate levels ``N, N-1, ..., 1`` of a stochastic block matrix.

    Zero blocks in the pivot row or column are skipped, so block-Hessenberg
    input costs ``O(N^2)`` block operations rather than ``O(N^3)``.

    Raises
    ------
    SingularPivotError
        If ``I - Phi_k`` is singular for some ``k >= 1``.
    """
    W, pivots, up, down = _eliminate(P, 0, keep=True)
    d0 = P.phase_counts[0]
    pivots[0] = W[:d0, :d0].copy()
    up[0] = np.zeros((0, d0))
    down[0] = np.zeros((d0, 0))
    n = P.num_levels
    return EliminationRecord(
        P.phase_counts,
        tuple(pivots[k] for k in range(n)),
        tuple(up[k] for k in range(n)),
        tuple(down[k] for k in range(n)),
    )


def eliminate_to(P: BlockMatrix, n: int) -> BlockMatrix:
    """The corner ``P^(n)`` left after eliminating levels ``N..n+1``."""
    if not 0 <= n < P.num_levels:
        raise IndexError(f"level {n} out of range")
    W, *_ = _eliminate(P, n, keep=False)
    k = P.offsets[n + 1]
    return BlockMatrix(W[:k, :k], P.phase_counts[:n + 1], copy=True)


def scalar_gth_level0(phi0) -> np.ndarray:
    """Scalar GTH on the level-0 censored block.

    Returns ``r0`` with ``r0[0] == 1`` and ``r0[b] = pi_{0,b} / pi_{0,1}``.
    Pivot denominators are the off-diagonal sums ``sum_{k<g} p[g, k]``, never
    ``1 - p[g, g]``.
    """
    p = np.array(phi0, dtype=float)
    r = p.shape[0]
    if p.shape != (r, r):
        raise ValueError("level-0 block must be square")
    denom = np.ones(r)
    for g in range(r - 1, 0, -1):
        s = p[g, :g].sum()
        if not s > 0.0:
            raise SingularPivotError(f"zero GTH denominator at phase {g + 1}; block reducible")
        denom[g] = s
        p[:g, :g] += np.outer(p[:g, g], p[g, :g]) / s
    r0 = np.zeros(r)
    r0[0] = 1.0
    for b in range(1, r):
        r0[b] = r0[:b] @ p[:b, b] / denom[b]
    return r0


def back_substitute(rec: EliminationRecord, r0) -> np.ndarray:
    """Recover the unnormalised rows ``r_1..r_N`` level by level.

    ``r_j = (sum_{i<j} r_i P^(j)_{i,j}) (I - Phi_j)^{-1}``.  Returns the flat
    concatenation ``(r_0, ..., r_N)``.
    """
    off = rec.offsets
    r = np.empty(off[-1])
    r[:off[1]] = r0
    for j in range(1, rec.num_levels):
        r[off[j]:off[j + 1]] = rec.solver(j).left(r[:off[j]] @ rec.up[j])
    np.maximum(r, 0.0, out=r)
    return r


def normalize(r, phase_counts: Sequence[int]) -> StationaryVector:
    r = np.asarray(r, dtype=float)
    tot = r.sum()
    if not tot > 0.0:
        raise ValueError("cannot normalise a zero vector")
    return StationaryVector(r / tot, phase_counts, copy=False)


def solve(P: BlockMatrix) -> StationaryVector:
    """Stationary vector of an irreducible stochastic block matrix."""
    rec = forward_eliminate(P)
    return normalize(back_substitute(rec, scalar_gth_level0(rec.pivots[0])), P.phase_counts)


# --------------------------------------------------------------------------
# block upper-Hessenberg chains given column by column
# --------------------------------------------------------------------------

def solve_hessenberg(phase_counts: Sequence[int],
                     column: Callable[[int], np.ndarray],
                     down: Callable[[int], np.ndarray],
                     checkpoint: int | None = None) -> StationaryVector:
    """Block GTH for a chain that moves down at most one level per step.

    The matrix is never materialised.  ``column(j)`` returns the original block
    column ``j`` restricted to levels ``0..j`` (shape ``(offset[j+1], d_j)``)
    and ``down(j)`` the block ``P_{j,j-1}``.  Because only the pivot column is
    modified, eliminating level ``n`` touches one block column.

    The back substitution needs the pivot columns in ascending order while
    elimination produces them descending.  For long chains the working column
    is checkpointed every ``checkpoint`` levels and each segment is recomputed
    once, so memory is ``O(N^1.5)`` blocks instead of ``O(N^2)``.
    """
    pc = tuple(int(c) for c in phase_counts)
    off = _offsets(pc)
    N = len(pc) - 1
    if checkpoint is None:
        checkpoint = N + 1 if off[-1] ** 2 <= 2e7 else max(1, math.isqrt(N))

    def step(col: np.ndarray, n: int):
        a = off[n]
        phi, up, dn = col[a:], col[:a], down(n)
        # row n of the corner holds only P_{n,n-1} left of the diagonal
        piv = PivotSolver(phi, dn.sum(axis=1), n)
        x = piv.right(dn)
        rmat = piv.left(up)
        return column(n - 1) + up @ x, rmat

    # first sweep: checkpoints and the level-0 pivot
    col = np.array(column(N), dtype=float)
    saved = {}
    for n in range(N, 0, -1):
        if n % checkpoint == 0 or n == N:
            saved[n] = col
        col, _ = step(col, n)
    r = np.empty(off[-1])
    r[:off[1]] = scalar_gth_level0(col)

    tops = sorted(saved)
    lo = 0
    for top in tops:
        # recompute R-blocks for levels lo+1..top from the checkpoint at `top`
        col = saved.pop(top)
        rblocks = {}
        for n in range(top, lo, -1):
            col, rblocks[n] = step(col, n)
        for j in range(lo + 1, top + 1):
            r[off[j]:off[j + 1]] = r[:off[j]] @ rblocks.pop(j)
        lo = top
    np.maximum(r, 0.0, out=r)
    return normalize(r, pc)
