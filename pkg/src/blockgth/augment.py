"""Stochastic completions of the northwest corner of an M/G/1-type chain.

The RA-CM puts the depth-``M`` censored column into the last block column and
rescales each scalar row to mass one.  The natural LBCA puts each row's exact
tail sum there instead.  Both keep the block-Hessenberg shape, so their
stationary vectors come from :func:`gth.solve_hessenberg` without
materialising the matrix.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import gth
from .blocklinalg import BlockMatrix, StationaryVector, _offsets, row_defects
from .mg1 import MG1Spec, censored_column, g_columns, stop_depth

#: Row masses at or below this are treated as zero by the renormalisation rule.
ZERO_MASS = 1e-14

SCALED, UNIFORM, ZERO = "scaled", "uniform-spread", "zero-row"


class ReducibleAugmentationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RenormReport:
    """Per scalar row ``(i, alpha)`` of levels ``0..N``."""

    target: np.ndarray      # missing mass c of the corner
    captured: np.ndarray    # mass c^(M) of the truncated censored column
    scale: np.ndarray       # c / c^(M) on scaled rows, nan elsewhere
    branch: tuple[str, ...]
    M: int


def renormalize(column: np.ndarray, target: np.ndarray):
    """Rescale each row of ``column`` so that it carries mass ``target``.

    Rows with captured mass spread their target uniformly over the phases;
    rows with no target mass are zeroed.
    """
    cap = column.sum(axis=1)
    out = np.zeros_like(column)
    scale = np.full(cap.shape, np.nan)
    branch = []
    r = column.shape[1]
    for k, (c, cm) in enumerate(zip(target, cap)):
        if c <= ZERO_MASS:
            branch.append(ZERO)
        elif cm > ZERO_MASS:
            scale[k] = c / cm
            out[k] = column[k] * scale[k]
            branch.append(SCALED)
        else:
            out[k] = c / r
            branch.append(UNIFORM)
    return out, cap, scale, tuple(branch)


def racm_column(spec: MG1Spec, N: int, M: int | None = 100, *, eps: float | None = None,
                series=None):
    """Renormalised censored column and its report.

    Either a fixed depth ``M`` or a tolerance ``eps`` (via :func:`stop_depth`);
    a precomputed series for the same spec may be passed to avoid recomputation.
    """
    if series is None:
        if eps is not None:
            M, _, series = stop_depth(spec, N, eps, return_series=True)
        else:
            series = g_columns(spec, M, keep_terms=False)
    col = censored_column(spec, N, series)
    target = row_defects(spec.corner(N))
    out, cap, scale, branch = renormalize(col, target)
    return out, RenormReport(target, cap, scale, branch, series.M)


def lbca_column(spec: MG1Spec, N: int) -> np.ndarray:
    """Exact tail sums ``B_{>N}`` and ``A_{>N-i}`` for levels ``0..N``."""
    off = _offsets(spec.phase_counts(N))
    col = np.empty((off[-1], spec.r))
    col[:off[1]] = spec.b_tail(N)
    for i in range(1, N + 1):
        col[off[i]:off[i + 1]] = spec.a_tail(N - i)
    return col


def augmented_matrix(spec: MG1Spec, N: int, extra: np.ndarray) -> BlockMatrix:
    """``T_N`` with ``extra`` added to its last block column."""
    T = spec.corner(N)
    a = T.array.copy()
    a[:, T.offsets[N]:] += extra
    return BlockMatrix(a, T.phase_counts, copy=False, stochastic=True)


def racm(spec: MG1Spec, N: int, M: int | None = 100, *, eps: float | None = None):
    """Renormalised approximated censored matrix ``P~^(N;M)`` and its report."""
    col, rep = racm_column(spec, N, M, eps=eps)
    return augmented_matrix(spec, N, col), rep


def natural_lbca(spec: MG1Spec, N: int) -> BlockMatrix:
    return augmented_matrix(spec, N, lbca_column(spec, N))


def check_irreducible(P: BlockMatrix) -> None:
    """Breadth-first reachability from state 0 in ``P`` and in its transpose."""
    adj = P.array > 0
    n = adj.shape[0]
    for mat in (adj, adj.T):
        seen = np.zeros(n, bool)
        seen[0] = True
        todo = deque([0])
        while todo:
            for j in np.flatnonzero(mat[todo.popleft()] & ~seen):
                seen[j] = True
                todo.append(j)
        if not seen.all():
            raise ReducibleAugmentationError(
                f"augmented chain is reducible ({int((~seen).sum())} states unreachable)")


def _column_support_irreducible(spec: MG1Spec, N: int, extra: np.ndarray) -> None:
    # cheap reachability on the scalar graph; the matrix is at most a few thousand states
    if spec.r0 + N * spec.r <= 5000:
        check_irreducible(augmented_matrix(spec, N, extra))


def augmented_stationary(spec: MG1Spec, N: int, extra: np.ndarray,
                         check: bool = True) -> StationaryVector:
    """Stationary vector of ``T_N + (0, ..., 0, extra)`` by block-Hessenberg GTH."""
    if check:
        _column_support_irreducible(spec, N, extra)

    def column(j):
        c = spec.column(j)
        return c + extra if j == N else c

    return gth.solve_hessenberg(spec.phase_counts(N), column, spec.down)


# --------------------------------------------------------------------------
# generic augmentations of a substochastic corner (comparison fixtures)
# --------------------------------------------------------------------------

def first_column_augment(T: BlockMatrix) -> BlockMatrix:
    """Missing row mass goes to state ``(0, 1)``."""
    a = T.array.copy()
    a[:, 0] += row_defects(T)
    return BlockMatrix(a, T.phase_counts, copy=False, stochastic=True)


def uniform_augment(T: BlockMatrix) -> BlockMatrix:
    """Missing row mass is spread evenly over all states."""
    a = T.array + row_defects(T)[:, None] / T.shape[1]
    return BlockMatrix(a, T.phase_counts, copy=False, stochastic=True)


def last_column_augment(T: BlockMatrix) -> BlockMatrix:
    """Missing row mass goes to the last scalar state."""
    a = T.array.copy()
    a[:, -1] += row_defects(T)
    return BlockMatrix(a, T.phase_counts, copy=False, stochastic=True)


# --------------------------------------------------------------------------
# error measures
# --------------------------------------------------------------------------

def l1_truncation_error(approx: StationaryVector, ref: StationaryVector) -> float:
    """``sum_{n<=N} ||approx_n - ref_n||_1 + sum_{n>N} ||ref_n||_1``."""
    n = approx.num_levels
    if n > ref.num_levels or approx.phase_counts != ref.phase_counts[:n]:
        raise ValueError("approximation levels/phases do not match the reference prefix")
    k = approx.offsets[-1]
    r = ref.array
    return float(np.abs(approx.array - r[:k]).sum() + r[k:].sum())


def perturbation_bound(Pn: BlockMatrix, pin: StationaryVector, delta_norm: float) -> float:
    """``||Z|| * delta_norm`` with ``Z = (I - P + 1 pi)^{-1}``.

    Norms are the operator norms for row vectors under ``l1`` (maximum
    absolute row sum), so ``delta_norm`` must be measured the same way.  The
    result bounds ``||pi~ - pi||_1`` for any stochastic ``P~`` with
    ``||P~ - P|| <= delta_norm``.
    """
    if delta_norm == 0:
        return 0.0
    return z_norm(Pn, pin) * delta_norm


def z_norm(Pn: BlockMatrix, pin: StationaryVector) -> float:
    n = Pn.shape[0]
    m = np.eye(n) - Pn.array + np.outer(np.ones(n), pin.array)
    try:
        z = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        raise ReducibleAugmentationError("I - P + 1 pi is singular") from None
    return float(np.abs(z).sum(axis=1).max())


def row_norm(a: np.ndarray) -> float:
    """Maximum absolute row sum."""
    return float(np.abs(a).sum(axis=1).max(initial=0.0))


# --------------------------------------------------------------------------
# truncation comparison (LBCA versus RA-CM)
# --------------------------------------------------------------------------

TABLE_COLUMNS = ("N", "method", "l1_error", "improvement", "relative_rate_percent")
DEFAULT_N_LIST = (10, 15, 20, 25, 30, 35, 40, 50, 100, 200)


@dataclass(frozen=True)
class ComparisonRow:
    N: int
    lbca: float
    racm: float

    @property
    def improvement(self) -> float:
        return self.lbca - self.racm

    @property
    def relative_rate_percent(self) -> float:
        return 100.0 * self.improvement / self.lbca if self.lbca > 0 else 0.0


def compare_truncations(spec: MG1Spec, N_list: Iterable[int] = DEFAULT_N_LIST,
                        M: int = 100, N_ref: int = 3000,
                        reference: StationaryVector | None = None) -> list[ComparisonRow]:
    """l1(N, inf) errors of the natural LBCA and of the RA-CM for each ``N``."""
    if reference is None:
        reference = augmented_stationary(spec, N_ref, lbca_column(spec, N_ref), check=False)
    series = g_columns(spec, M, keep_terms=False)  # independent of N
    rows = []
    for N in sorted(set(N_list)):
        lb = augmented_stationary(spec, N, lbca_column(spec, N))
        rc_col, _ = racm_column(spec, N, series=series)
        rc = augmented_stationary(spec, N, rc_col)
        rows.append(ComparisonRow(N, l1_truncation_error(lb, reference),
                                  l1_truncation_error(rc, reference)))
    return rows


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def format_comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    """Two lines per ``N``: the LBCA baseline and the RA-CM with its improvement."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        w.writerow([row.N, "lbca", _fmt(row.lbca), _fmt(0.0), _fmt(0.0)])
        w.writerow([row.N, "racm", _fmt(row.racm), _fmt(row.improvement),
                    _fmt(row.relative_rate_percent)])
    return buf.getvalue()


def parse_comparison_csv(text: str) -> list[ComparisonRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    acc: dict[int, dict[str, float]] = {}
    for rec in reader:
        acc.setdefault(int(rec["N"]), {})[rec["method"]] = float(rec["l1_error"])
    return [ComparisonRow(n, v["lbca"], v["racm"]) for n, v in sorted(acc.items())]
