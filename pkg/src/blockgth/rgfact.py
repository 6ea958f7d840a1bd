"""RG-factorization ``I - P = (I - R_U)(I - Phi_D)(I - G_L)`` from forward elimination.

``R_{i,k} = P^(k)_{i,k} (I - Phi_k)^{-1}`` (expected visits to level ``k`` before
dropping below it) and ``G_{k,i} = (I - Phi_k)^{-1} P^(k)_{k,i}`` (distribution
of the entry point into the lower levels).  Both are read off the elimination
record, so the factorization is a by-product of one GTH pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gth
from .blocklinalg import BlockMatrix, StationaryVector, _offsets


@dataclass(frozen=True)
class RGFactors:
    """Dense storage of the three factors over the full scalar index range.

    ``R_upper`` is strictly block upper triangular, ``G_lower`` strictly block
    lower triangular and ``Phi_diag`` block diagonal.
    """

    phase_counts: tuple[int, ...]
    R_upper: np.ndarray
    Phi_diag: np.ndarray
    G_lower: np.ndarray

    @property
    def offsets(self) -> np.ndarray:
        return _offsets(self.phase_counts)

    @property
    def num_levels(self) -> int:
        return len(self.phase_counts)

    def R(self, i: int, j: int) -> np.ndarray:
        o = self.offsets
        return self.R_upper[o[i]:o[i + 1], o[j]:o[j + 1]].copy()

    def G(self, i: int, j: int) -> np.ndarray:
        o = self.offsets
        return self.G_lower[o[i]:o[i + 1], o[j]:o[j + 1]].copy()

    def Phi(self, k: int) -> np.ndarray:
        o = self.offsets
        return self.Phi_diag[o[k]:o[k + 1], o[k]:o[k + 1]].copy()


def factorize(P: BlockMatrix) -> RGFactors:
    rec = gth.forward_eliminate(P)
    off = rec.offsets
    n = off[-1]
    R, Phi, G = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    for k in range(rec.num_levels):
        a, b = off[k], off[k + 1]
        Phi[a:b, a:b] = rec.pivots[k]
        if k == 0:
            continue
        piv = rec.solver(k)
        R[:a, a:b] = piv.left(rec.up[k])
        G[a:b, :a] = piv.right(rec.down[k])
    return RGFactors(rec.phase_counts, R, Phi, G)


def residual(P: BlockMatrix, f: RGFactors) -> float:
    """``max |(I - R_U)(I - Phi_D)(I - G_L) - (I - P)|``."""
    eye = np.eye(P.shape[0])
    prod = (eye - f.R_upper) @ (eye - f.Phi_diag) @ (eye - f.G_lower)
    return float(np.max(np.abs(prod - (eye - P.array)), initial=0.0))


def solve_by_factors(f: RGFactors) -> StationaryVector:
    """Seed level 0 with the stationary row of ``Phi_0``, then ``pi_j = sum_{i<j} pi_i R_{i,j}``."""
    off = f.offsets
    pi = np.empty(off[-1])
    pi[:off[1]] = gth.scalar_gth_level0(f.Phi(0))
    for j in range(1, f.num_levels):
        pi[off[j]:off[j + 1]] = pi[:off[j]] @ f.R_upper[:off[j], off[j]:off[j + 1]]
    return gth.normalize(pi, f.phase_counts)


def level0_series(P: BlockMatrix, f: RGFactors) -> np.ndarray:
    """``P_{0,0} + sum_{k>=1} R_{0,k} (I - Phi_k) G_{k,0}``; reproduces ``Phi_0``."""
    off = f.offsets
    d0 = off[1]
    acc = P.array[:d0, :d0].copy()
    for k in range(1, f.num_levels):
        a, b = off[k], off[k + 1]
        Rk = f.R_upper[:d0, a:b]
        if not Rk.any():
            continue
        acc += Rk @ (np.eye(b - a) - f.Phi_diag[a:b, a:b]) @ f.G_lower[a:b, :d0]
    return acc


def dump_factors(f: RGFactors, path) -> None:
    """Write ``R_U``, ``Phi_D`` and ``G_L`` as three blocks sections in the matrix text format."""
    from .blocklinalg import format_matrix

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name, a in (("R_U", f.R_upper), ("Phi_D", f.Phi_diag), ("G_L", f.G_lower)):
            fh.write(f"# factor {name}\n")
            fh.write(format_matrix(BlockMatrix(a, f.phase_counts)))
