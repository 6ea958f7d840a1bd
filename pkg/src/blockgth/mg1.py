"""Chains of M/G/1 type and the exact censored last block-column.

Levels ``>= 1`` share ``r`` phases, level 0 has ``r0``.  With block ``A_k``
meaning "move up by ``k``" (``k >= -1``), the transition matrix is::

    B_0   B_1   B_2  ...
    C_0   A_0   A_1  ...
          A_-1  A_0  ...
                ...

Censoring onto levels ``0..N`` only changes the last block column.  Its
correction ``U Qhat D`` is assembled from the blocks
``G^(m)_s = (Q^m D)_{s,N}``, which vanish for ``s > m`` because the complement
chain falls by at most one level per step.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .blocklinalg import STOCHASTIC_TOL, BlockMatrix, NotStochasticError, _offsets


@dataclass(frozen=True, eq=False)
class MG1Spec:
    """Finite-support description of an infinite M/G/1-type chain.

    Parameters
    ----------
    B0 : (r0, r0)
        Level-0 diagonal block.
    B : (K, r0, r)
        ``B[k-1]`` is the jump from level 0 to level ``k``.
    C0 : (r, r0)
        Level 1 to level 0.
    A : (K + 2, r, r)
        ``A[k+1]`` is the repeating block ``A_k``, ``k = -1..K``.
    B_beyond, A_beyond :
        Aggregate mass of all jumps beyond the cutoff ``K`` (``sum_{k>K}``).  They
        keep the chain exactly stochastic while only ``K`` blocks are stored.
    generator :
        Rate blocks (diagonal blocks may be negative, rows sum to zero).
    """

    B0: np.ndarray
    B: np.ndarray
    C0: np.ndarray
    A: np.ndarray
    B_beyond: np.ndarray | None = None
    A_beyond: np.ndarray | None = None
    generator: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        B0 = np.atleast_2d(np.asarray(self.B0, dtype=float))
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 3 or A.shape[0] < 2 or A.shape[1] != A.shape[2]:
            raise ValueError("A must have shape (K+2, r, r) with K >= 0")
        r, r0 = A.shape[1], B0.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(-1, r0, r)
        C0 = np.asarray(self.C0, dtype=float).reshape(r, r0)
        K = max(A.shape[0] - 2, B.shape[0])
        if A.shape[0] - 2 < K:
            A = np.concatenate([A, np.zeros((K + 2 - A.shape[0], r, r))])
        if B.shape[0] < K:
            B = np.concatenate([B, np.zeros((K - B.shape[0], r0, r))])
        Bb = np.zeros((r0, r)) if self.B_beyond is None else np.asarray(self.B_beyond, float).reshape(r0, r)
        Ab = np.zeros((r, r)) if self.A_beyond is None else np.asarray(self.A_beyond, float).reshape(r, r)
        for name, val in (("B0", B0), ("B", B), ("C0", C0), ("A", A),
                          ("B_beyond", Bb), ("A_beyond", Ab)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        self._validate()

    # shapes ---------------------------------------------------------------
    @property
    def r(self) -> int:
        return self.A.shape[1]

    @property
    def r0(self) -> int:
        return self.B0.shape[0]

    @property
    def cutoff(self) -> int:
        return self.A.shape[0] - 2

    def phase_counts(self, N: int) -> tuple[int, ...]:
        return (self.r0,) + (self.r,) * N

    # block access -----------------------------------------------------------
    def a(self, k: int) -> np.ndarray:
        """``A_k``; zero outside ``-1..K``."""
        if -1 <= k <= self.cutoff:
            return self.A[k + 1]
        return np.zeros((self.r, self.r))

    def b(self, k: int) -> np.ndarray:
        """``B_k`` for ``k >= 1``; zero beyond the cutoff."""
        if k == 0:
            raise ValueError("B_0 is square; use spec.B0")
        if 1 <= k <= self.cutoff:
            return self.B[k - 1]
        return np.zeros((self.r0, self.r))

    def _tails(self):
        if "tails" not in self._cache:
            # suffix sums accumulated from the far end (small terms first)
            at = np.cumsum(self.A[::-1], axis=0)[::-1] + self.A_beyond
            bt = np.cumsum(self.B[::-1], axis=0)[::-1] + self.B_beyond
            self._cache["tails"] = (at, bt)
        return self._cache["tails"]

    def a_tail(self, i: int) -> np.ndarray:
        """``sum_{k>i} A_k`` including the mass beyond the cutoff."""
        at, _ = self._tails()
        if i >= self.cutoff:
            return self.A_beyond.copy()
        return at[max(i, -2) + 2].copy()

    def b_tail(self, n: int) -> np.ndarray:
        """``sum_{k>n} B_k`` for ``n >= 0``."""
        _, bt = self._tails()
        if n >= self.cutoff:
            return self.B_beyond.copy()
        return bt[max(n, 0)].copy()

    def a_padded(self, kmax: int) -> np.ndarray:
        """``A_{-1}..A_kmax`` stacked, zero-padded beyond the cutoff."""
        if kmax <= self.cutoff:
            return self.A[:kmax + 2]
        return np.concatenate([self.A, np.zeros((kmax - self.cutoff, self.r, self.r))])

    def b_padded(self, kmax: int) -> np.ndarray:
        """``B_1..B_kmax`` stacked, zero-padded beyond the cutoff."""
        if kmax <= self.cutoff:
            return self.B[:kmax]
        return np.concatenate([self.B, np.zeros((kmax - self.cutoff, self.r0, self.r))])

    def _validate(self) -> None:
        target = 0.0 if self.generator else 1.0
        tol = STOCHASTIC_TOL
        blocks = [self.B, self.C0, self.B_beyond, self.A_beyond, self.A[0], self.A[2:]]
        if not self.generator:
            blocks += [self.B0, self.A[1]]
        else:
            offd = [self.B0 - np.diag(np.diag(self.B0)), self.A[1] - np.diag(np.diag(self.A[1]))]
            blocks += offd
        if any(np.any(np.asarray(b) < 0) for b in blocks):
            raise NotStochasticError("negative transition probability/rate")
        rep = self.A.sum(axis=(0, 2)) + self.A_beyond.sum(axis=1)
        lvl1 = rep - self.A[0].sum(axis=1) + self.C0.sum(axis=1)
        bnd = self.B0.sum(axis=1) + self.B.sum(axis=(0, 2)) + self.B_beyond.sum(axis=1)
        for name, s in (("repeating", rep), ("level-1", lvl1), ("boundary", bnd)):
            dev = np.max(np.abs(s - target))
            if dev > tol * max(1.0, np.max(np.abs(self.A))):
                raise NotStochasticError(f"{name} rows off by {dev:.3e}")

    # finite corners ---------------------------------------------------------
    def column(self, j: int) -> np.ndarray:
        """Block column ``j`` of the infinite matrix restricted to levels ``0..j``."""
        r, r0 = self.r, self.r0
        if j == 0:
            return self.B0.copy()
        col = np.empty((r0 + j * r, r))
        col[:r0] = self.b(j)
        # rows i = 1..j carry A_{j-i}
        idx = np.arange(j, 0, -1)
        col[r0:] = self.a_padded(j)[idx].reshape(j * r, r)
        return col

    def down(self, j: int) -> np.ndarray:
        return self.C0 if j == 1 else self.A[0]

    def corner(self, N: int) -> BlockMatrix:
        """Northwest corner ``T_N`` (levels ``0..N``), substochastic."""
        pc = self.phase_counts(N)
        off = _offsets(pc)
        a = np.zeros((off[-1], off[-1]))
        for j in range(N + 1):
            a[:off[j + 1], off[j]:off[j + 1]] = self.column(j)
            if j >= 1:
                a[off[j]:off[j + 1], off[j - 1]:off[j]] = self.down(j)
        return BlockMatrix(a, pc, copy=False)

    def u_blocks(self, N: int, i: int, S: int) -> np.ndarray:
        """Row ``i`` of ``U``: blocks ``U_{i,s}`` for complement levels ``s = 0..S-1``, stacked horizontally."""
        if i == 0:
            blk = self.b_padded(N + S)[N:N + S]
            return blk.transpose(1, 0, 2).reshape(self.r0, S * self.r)
        k0 = N + 1 - i
        blk = self.a_padded(k0 + S - 1)[k0 + 1:k0 + S + 1]
        return blk.transpose(1, 0, 2).reshape(self.r, S * self.r)

    def u_tail_mass(self, N: int, i: int, S: int) -> np.ndarray:
        """Row sums of ``sum_{s>=S} U_{i,s}`` per phase of level ``i``."""
        if i == 0:
            return self.b_tail(N + S).sum(axis=1)
        return self.a_tail(N + S - i).sum(axis=1)


# --------------------------------------------------------------------------
# constrained path expansion
# --------------------------------------------------------------------------

class _PathRecursion:
    """Iterates ``G^(m+1)_i = sum_t A_{t-i} G^(m)_t`` and accumulates ``H_s``."""

    def __init__(self, spec: MG1Spec, keep_terms: bool):
        self.spec = spec
        r = spec.r
        self.m = 0
        self.G = spec.a(-1)[None].copy()
        self.H = np.zeros((16, r, r))
        self.H[0] = self.G[0]
        self.terms = [self.G.copy()] if keep_terms else None
        self._ah = np.zeros((r, 0))

    def _hstack_a(self, kmax: int) -> np.ndarray:
        # A_{-1} .. A_kmax side by side; grown geometrically
        need = (kmax + 2) * self.spec.r
        if self._ah.shape[1] < need:
            k = max(kmax, 2 * (self._ah.shape[1] // self.spec.r))
            a = self.spec.a_padded(k)
            self._ah = np.ascontiguousarray(a.transpose(1, 0, 2).reshape(self.spec.r, -1))
        return self._ah

    def step(self) -> None:
        r, m = self.spec.r, self.m
        ah = self._hstack_a(m + 1)
        g = self.G
        new = np.empty((m + 2, r, r))
        gflat = g.reshape((m + 1) * r, r)
        # i = 0: t = 0..m with A_0..A_m
        new[0] = ah[:, r:(m + 2) * r] @ gflat
        for i in range(1, m + 2):
            # t = i-1..m with A_{-1}..A_{m-i}
            new[i] = ah[:, :(m - i + 2) * r] @ gflat[(i - 1) * r:]
        self.G = new
        self.m = m + 1
        if self.H.shape[0] < m + 2:
            self.H = np.concatenate([self.H, np.zeros_like(self.H)])
        self.H[:m + 2] += new
        if self.terms is not None:
            self.terms.append(new)

    def run_to(self, M: int) -> None:
        while self.m < M:
            self.step()

    def series(self) -> "GColumnSeries":
        M = self.m
        H = self.H[:M + 1].copy()
        return GColumnSeries(M, H, H.sum(axis=2),
                             None if self.terms is None else tuple(self.terms))


@dataclass(frozen=True)
class GColumnSeries:
    """Blocks ``G^(m)_s`` for ``m <= M`` and their partial sums.

    ``H[s] = sum_{m=s}^{M} G^(m)_s`` and ``captured[s, p]`` is the row sum of
    ``H[s]`` at phase ``p``: the probability of returning from complement state
    ``(s, p)`` to level ``N`` within ``M`` steps.
    """

    M: int
    H: np.ndarray
    captured: np.ndarray
    terms: tuple[np.ndarray, ...] | None = None

    def block(self, m: int, s: int) -> np.ndarray:
        if self.terms is None:
            raise ValueError("series computed without keep_terms")
        if not 0 <= m <= self.M:
            raise IndexError("m out of range")
        t = self.terms[m]
        return t[s].copy() if s <= m else np.zeros(t.shape[1:])

    def fundamental_g(self) -> np.ndarray:
        """``sum_m G^(m)_0``, the truncated fundamental-period matrix ``G``."""
        return self.H[0].copy()


def g_columns(spec: MG1Spec, M: int, keep_terms: bool = True) -> GColumnSeries:
    if M < 0:
        raise ValueError("M must be nonnegative")
    rec = _PathRecursion(spec, keep_terms)
    rec.run_to(M)
    return rec.series()


#: Largest depth accepted by the enumeration oracle.
PATH_ORACLE_MAX_DEPTH = 8


def path_sum_oracle(spec: MG1Spec, m: int, i: int) -> np.ndarray:
    """Brute-force ``sum over admissible step sequences A_{k_1}...A_{k_m} A_{-1}``.

    Enumerates every ``(k_1..k_m)`` with partial levels ``i + k_1 + ... >= 0``
    that ends at level 0.
    """
    if m > PATH_ORACLE_MAX_DEPTH:
        raise ValueError(f"enumeration limited to m <= {PATH_ORACLE_MAX_DEPTH}")
    r = spec.r
    a_down = spec.a(-1)
    if m == 0:
        return a_down.copy() if i == 0 else np.zeros((r, r))
    kmax = min(spec.cutoff, m + 1)
    total = np.zeros((r, r))
    for steps in itertools.product(range(-1, kmax + 1), repeat=m):
        level = i
        ok = True
        for k in steps:
            level += k
            if level < 0:
                ok = False
                break
        if not ok or level != 0:
            continue
        prod = np.eye(r)
        for k in steps:
            prod = prod @ spec.a(k)
        total += prod @ a_down
    return total


# --------------------------------------------------------------------------
# censored column and truncation error
# --------------------------------------------------------------------------

def censored_column(spec: MG1Spec, N: int, g: GColumnSeries) -> np.ndarray:
    """``C_N^(M) = [U Qhat^(M) D]_{:,N}`` stacked over levels ``0..N``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    r, S = spec.r, g.M + 1
    hflat = g.H.reshape(S * r, r)
    pc = spec.phase_counts(N)
    off = _offsets(pc)
    col = np.empty((off[-1], r))
    for i in range(N + 1):
        col[off[i]:off[i + 1]] = spec.u_blocks(N, i, S) @ hflat
    return col


@dataclass(frozen=True)
class ErrorBound:
    """A-posteriori bound on the truncation error of the censored column.

    ``rows[(i, alpha)]`` bounds every entry ``[Delta_{i,N}]_{alpha, beta}``.
    """

    rows: np.ndarray
    r: int

    @property
    def max(self) -> float:
        return float(self.rows.max(initial=0.0))

    @property
    def matrix(self) -> np.ndarray:
        return np.repeat(self.rows[:, None], self.r, axis=1)


def error_bound(spec: MG1Spec, N: int, g: GColumnSeries) -> ErrorBound:
    """Weighted bound ``sum_{s,p} U_{i,s}(alpha,p) (1 - r_{s,p})``.

    For ``s <= M`` the captured masses are used; every complement level past
    ``M`` has captured mass zero, so the remaining row mass of ``U`` enters in
    full.
    """
    S = g.M + 1
    miss = np.clip(1.0 - g.captured, 0.0, None).reshape(-1)
    off = _offsets(spec.phase_counts(N))
    rows = np.empty(off[-1])
    for i in range(N + 1):
        rows[off[i]:off[i + 1]] = spec.u_blocks(N, i, S) @ miss + spec.u_tail_mass(N, i, S)
    return ErrorBound(rows, spec.r)


class DepthCeilingError(RuntimeError):
    def __init__(self, M: int, best: float):
        super().__init__(f"bound still {best:.3e} at depth ceiling M={M}")
        self.M = M
        self.best = best


#: Depth from which the mass recursion switches from direct sums to FFT correlation.
_FFT_FROM = 192


class _MassRecursion:
    """Row sums ``g^(m)_s = G^(m)_s 1`` and the row masses of ``C_N^(M)``.

    The weighted bound of a row equals its exact censored-column mass minus
    the row mass of the truncated column, so only these sums are needed to locate the
    stopping depth.  One correlation ``out_j = sum_t A_{t-j} g_t`` per step
    gives both the next masses (``j >= 0``) and the column mass increments of
    levels ``1..N`` (``j = i - N - 1``).  Small depths use direct sums; past
    ``_FFT_FROM`` the correlation runs through real FFTs, whose rounding
    (about ``1e-16`` per step relative to the row mass) is immaterial next to
    any practical tolerance.
    """

    def __init__(self, spec: MG1Spec, N: int):
        self.spec, self.N = spec, N
        r = spec.r
        self.m = 0
        self.g = spec.a(-1).sum(axis=1)[None]
        self.cap = np.zeros((16, r))
        self.cap[0] = self.g[0]
        self.off = _offsets(spec.phase_counts(N))
        self.target = np.concatenate([spec.u_tail_mass(N, i, 0) for i in range(N + 1)])
        self.W = np.zeros(self.off[-1])
        self._ah = np.zeros((r, 0))
        self._bh = np.zeros((spec.r0, 0))
        self._fft: dict[int, np.ndarray] = {}

    def _a_hstack(self, kmax: int) -> np.ndarray:
        r = self.spec.r
        if self._ah.shape[1] < (kmax + 2) * r:
            k = max(kmax, 2 * (self._ah.shape[1] // r))
            self._ah = np.ascontiguousarray(
                self.spec.a_padded(k).transpose(1, 0, 2).reshape(r, -1))
        return self._ah

    def _b_hstack(self, kmax: int) -> np.ndarray:
        r = self.spec.r
        if self._bh.shape[1] < kmax * r:
            k = max(kmax, 2 * (self._bh.shape[1] // r))
            self._bh = np.ascontiguousarray(
                self.spec.b_padded(k).transpose(1, 0, 2).reshape(self.spec.r0, -1))
        return self._bh

    def _correlate_direct(self) -> np.ndarray:
        r, m, N = self.spec.r, self.m, self.N
        ah = self._a_hstack(m + N + 1)
        gflat = self.g.reshape(-1)
        out = np.empty((N + m + 2, r))
        for j in range(-N, m + 2):
            t0 = max(j - 1, 0)
            # A_{t0-j} .. A_{m-j} against g_{t0} .. g_m
            out[j + N] = ah[:, (t0 - j + 1) * r:(m - j + 2) * r] @ gflat[t0 * r:]
        return out

    def _correlate_fft(self) -> np.ndarray:
        r, m, N = self.spec.r, self.m, self.N
        cap = 1 << int(m + N + 3).bit_length()
        L = 2 * cap
        if cap not in self._fft:
            # b_u = A_{cap-1-u}: reversed sequence so the correlation becomes a convolution
            seq = np.zeros((L, r, r))
            seq[:cap + 1] = self.spec.a_padded(cap - 1)[::-1]
            self._fft = {cap: np.fft.rfft(seq, axis=0)}
        gf = np.fft.rfft(self.g, L, axis=0)
        conv = np.fft.irfft(np.einsum("fab,fb->fa", self._fft[cap], gf), L, axis=0)
        # out_j sits at convolution index cap - 1 + j
        return conv[cap - 1 - N:cap + m + 1]

    def step(self) -> None:
        """Fold the current masses into the column and refresh the bound; ``m`` is unchanged."""
        m, N, off = self.m, self.N, self.off
        out = self._correlate_direct() if m < _FFT_FROM else self._correlate_fft()
        np.maximum(out, 0.0, out=out)
        for i in range(1, N + 1):
            self.W[off[i]:off[i + 1]] += out[i - 1]
        self.W[:off[1]] += self._b_hstack(N + m + 1)[:, N * self.spec.r:(N + m + 1) * self.spec.r] \
            @ self.g.reshape(-1)
        self._out = out
        self.bound_rows = np.maximum(self.target - self.W, 0.0)

    def advance(self) -> None:
        m = self.m
        self.g = self._out[self.N:self.N + m + 2].copy()
        if self.cap.shape[0] < m + 2:
            self.cap = np.concatenate([self.cap, np.zeros_like(self.cap)])
        self.cap[:m + 2] += self.g
        self.m = m + 1

    @property
    def captured(self) -> np.ndarray:
        return self.cap[:self.m + 1].copy()


@dataclass(frozen=True)
class DepthReport:
    """Outcome of :func:`stop_depth`."""

    M: int
    bound: float
    rows: np.ndarray          # per scalar row of levels 0..N
    captured: np.ndarray      # r^(M)_{s,p}, s = 0..M


def stop_depth(spec: MG1Spec, N: int, eps: float, max_depth: int = 10**5,
               return_series: bool = False, report: bool = False):
    """Smallest ``M`` whose a-posteriori bound is ``<= eps``.

    The depth grows one level at a time and the bound is evaluated after each
    step, so the returned depth is the exact minimum.  Only the row masses are
    propagated, which makes depths in the tens of thousands affordable.
    Returns ``(M, bound)``; with ``return_series`` the full block series at
    that depth is appended, and with ``report`` a :class:`DepthReport`
    replaces the bound.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if N < 1:
        raise ValueError("N must be at least 1")
    rec = _MassRecursion(spec, N)
    while True:
        rec.step()
        b = float(rec.bound_rows.max(initial=0.0))
        if b <= eps:
            break
        if rec.m >= max_depth:
            raise DepthCeilingError(rec.m, b)
        rec.advance()
    out = [rec.m, DepthReport(rec.m, b, rec.bound_rows.copy(), rec.captured) if report else b]
    if return_series:
        out.append(g_columns(spec, rec.m, keep_terms=False))
    return tuple(out)


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

def format_spec(spec: MG1Spec) -> str:
    """Serialise an MG1Spec; zero blocks are omitted."""
    out = ["mg1", f"boundary_phases {spec.r0}", f"phases {spec.r}",
           f"cutoff {spec.cutoff}", f"generator {int(spec.generator)}"]

    def emit(tag, blk):
        blk = np.atleast_2d(blk)
        if blk.any():
            out.append(f"block {tag}")
            out.extend(" ".join(repr(float(x)) for x in row) for row in blk)

    emit("B0", spec.B0)
    emit("C0", spec.C0)
    for k in range(1, spec.cutoff + 1):
        emit(f"B {k}", spec.b(k))
    for k in range(-1, spec.cutoff + 1):
        emit(f"A {k}", spec.a(k))
    emit("B_beyond", spec.B_beyond)
    emit("A_beyond", spec.A_beyond)
    return "\n".join(out) + "\n"


def parse_spec(text: str) -> MG1Spec:
    from .blocklinalg import MatrixFileError, _content_lines

    lines = list(_content_lines(text))
    if not lines or lines[0][1] != ["mg1"]:
        raise MatrixFileError(lines[0][0] if lines else 1, "expected 'mg1' header")
    head = {}
    pos = 1
    for key in ("boundary_phases", "phases", "cutoff", "generator"):
        if pos >= len(lines):
            raise MatrixFileError(lines[-1][0], f"missing '{key}' line")
        lineno, tok = lines[pos]
        if tok[0] != key or len(tok) != 2:
            raise MatrixFileError(lineno, f"expected '{key} <int>'")
        try:
            head[key] = int(tok[1])
        except ValueError:
            raise MatrixFileError(lineno, f"'{key}' needs an integer") from None
        pos += 1
    r0, r, K = head["boundary_phases"], head["phases"], head["cutoff"]
    B0, C0 = np.zeros((r0, r0)), np.zeros((r, r0))
    B, A = np.zeros((K, r0, r)), np.zeros((K + 2, r, r))
    Bb, Ab = np.zeros((r0, r)), np.zeros((r, r))
    while pos < len(lines):
        lineno, tok = lines[pos]
        if tok[0] != "block" or len(tok) < 2:
            raise MatrixFileError(lineno, "expected 'block <name> [index]'")
        name = tok[1]
        fixed = {"B0": B0, "C0": C0, "B_beyond": Bb, "A_beyond": Ab}
        if name in fixed and len(tok) == 2:
            target = fixed[name]
        elif name in ("B", "A") and len(tok) == 3:
            try:
                k = int(tok[2])
            except ValueError:
                raise MatrixFileError(lineno, "bad block index") from None
            lo = 1 if name == "B" else -1
            if not lo <= k <= K:
                raise MatrixFileError(lineno, f"block index {k} outside {lo}..{K}")
            target = B[k - 1] if name == "B" else A[k + 1]
        else:
            raise MatrixFileError(lineno, f"unknown block '{' '.join(tok[1:])}'")
        pos += 1
        for row in range(target.shape[0]):
            if pos >= len(lines):
                raise MatrixFileError(lineno, "block truncated")
            rl, vals = lines[pos]
            if len(vals) != target.shape[1]:
                raise MatrixFileError(rl, f"expected {target.shape[1]} entries")
            try:
                target[row] = [float(v) for v in vals]
            except ValueError:
                raise MatrixFileError(rl, "non-numeric entry") from None
            pos += 1
    try:
        return MG1Spec(B0, B, C0, A, Bb, Ab, generator=bool(head["generator"]))
    except ValueError as exc:
        raise MatrixFileError(lines[-1][0], str(exc)) from None
