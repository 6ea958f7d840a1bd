"""Reference computations for tests: power iteration, dense solves and long-buffer censoring."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .blocklinalg import BlockMatrix, StationaryVector


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class Cancelled(RuntimeError):
    pass


def power_iteration(P: BlockMatrix, tol: float = 1e-13, max_iter: int = 10**6,
                    should_stop: Callable[[], bool] | None = None) -> StationaryVector:
    """Iterate ``pi <- pi P`` from the uniform vector until ``||pi P - pi||_1 <= tol``.

    The chain must be aperiodic; damp periodic chains with ``(P + I) / 2``.
    ``should_stop`` is polled once per sweep.
    """
    a = P.array
    x = np.full(a.shape[0], 1.0 / a.shape[0])
    res = np.inf
    for _ in range(max_iter):
        if should_stop is not None and should_stop():
            raise Cancelled("power iteration cancelled")
        y = x @ a
        y /= y.sum()
        res = float(np.abs(y - x).sum())
        x = y
        if res <= tol:
            return StationaryVector(x, P.phase_counts, copy=False)
    raise ConvergenceError(f"no convergence after {max_iter} sweeps (residual {res:.3e})", res)


def dense_stationary(P: BlockMatrix) -> StationaryVector:
    """Direct linear solve of ``pi (I - P) = 0``, ``pi 1 = 1``."""
    n = P.shape[0]
    a = (np.eye(n) - P.array).T
    a[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    x = np.linalg.solve(a, b)
    return StationaryVector(np.maximum(x, 0.0), P.phase_counts, copy=False)


#: Largest scalar state count a dense censoring oracle may allocate.
MAX_DENSE_STATES = 20000


def dense_censor_oracle(spec, N: int, buffer: int | None = None) -> BlockMatrix:
    """Censored matrix on levels ``0..N`` of the LBCA truncated at ``N + buffer``.

    Exact whenever no path from the complement can reach level ``N + buffer``
    before returning; otherwise the far-boundary augmentation perturbs it.
    """
    from .augment import natural_lbca
    from .censor import censor_prefix

    if buffer is None:
        buffer = N + 200
    L = N + buffer
    if spec.r0 + L * spec.r > MAX_DENSE_STATES:
        raise MemoryError(f"dense oracle would need {spec.r0 + L * spec.r} states")
    return censor_prefix(natural_lbca(spec, L), N)


def reference_stationary(spec, N_ref: int = 3000) -> StationaryVector:
    """Stationary vector of the natural LBCA at ``N_ref``, used as the untruncated reference."""
    from .augment import augmented_stationary, lbca_column

    return augmented_stationary(spec, N_ref, lbca_column(spec, N_ref))


def reference_consistency(spec, N_ref: int = 3000, approx: StationaryVector | None = None) -> float:
    """Sensitivity of the reference to halving its truncation level.

    Without ``approx`` this is the l1 distance between the references at
    ``N_ref // 2`` and ``N_ref``.  With ``approx`` it is the change of
    ``l1_truncation_error(approx, .)`` between the two references.
    """
    from .augment import l1_truncation_error

    big = reference_stationary(spec, N_ref)
    half = reference_stationary(spec, N_ref // 2)
    if approx is None:
        return l1_truncation_error(half, big)
    return abs(l1_truncation_error(approx, half) - l1_truncation_error(approx, big))
