"""Censoring of finite block chains onto level prefixes ``L_{<=n}``."""
from __future__ import annotations

import numpy as np

from .blocklinalg import BlockMatrix, NotStochasticError, partition
from .gth import PivotSolver


def censor_prefix(P: BlockMatrix, n: int) -> BlockMatrix:
    """Transition matrix ``T + U (I - Q)^{-1} D`` of the chain watched on levels ``0..n``.

    ``(I - Q)^{-1} D`` is obtained from one multi-right-hand-side solve; the
    fundamental matrix itself is never formed.  The solve is factorised the
    GTH way: every complement state leaves towards ``E`` with the row mass of
    ``D``, so no pivot is computed by subtraction.

    Raises
    ------
    SingularPivotError
        If some complement state cannot reach ``E`` (``I - Q`` singular).
    """
    if not P.is_stochastic():
        raise NotStochasticError("censoring needs a stochastic matrix")
    if n == P.num_levels - 1:
        return P
    T, U, D, Q = partition(P, n)
    d = D.array
    x = PivotSolver(Q.array, d.sum(axis=1), n + 1).right(d)
    return BlockMatrix(T.array + U.array @ x, T.row_counts, copy=False, stochastic=True)


def censor_composition_check(P: BlockMatrix, n1: int, n2: int) -> float:
    """Max deviation between censoring to ``n2`` directly and via ``n1``."""
    if not n2 < n1 < P.num_levels - 1:
        raise ValueError("need n2 < n1 < N")
    direct = censor_prefix(P, n2)
    twice = censor_prefix(censor_prefix(P, n1), n2)
    return float(np.max(np.abs(direct.array - twice.array)))


def stationary_restriction_check(P: BlockMatrix, n: int) -> float:
    """Max deviation between the censored stationary vector and the restricted one."""
    from .gth import solve

    pi = solve(P).array
    k = P.offsets[n + 1]
    pin = solve(censor_prefix(P, n)).array
    return float(np.max(np.abs(pin - pi[:k] / pi[:k].sum())))
