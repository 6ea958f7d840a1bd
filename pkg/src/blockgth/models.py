"""Batch-arrival M^X/M/1 queue with multi-rate working vacations.

Phases of a nonzero level are the four vacation service modes followed by the
regular busy mode.  Level 0 has a single phase.  Batch sizes follow the
discrete Pareto law with survival ``P(X >= k) = k^{-alpha}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mg1 import MG1Spec


@dataclass(frozen=True)
class MxM1WvParams:
    lam: float = 0.4
    mu: float = 2.0
    theta: float = 0.4
    nu: tuple[float, ...] = (1.5, 1.3, 1.2, 1.6)
    p: tuple[float, ...] = (0.2, 0.3, 0.25, 0.25)
    alpha: float = 1.55
    #: number of batch sizes stored explicitly; the rest is aggregated exactly
    cutoff: int = 10000

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(x) for x in self.nu))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.nu) != 4 or len(self.p) != 4:
            raise ValueError("need four vacation rates and four entry probabilities")
        rates = (self.lam, self.mu, self.theta) + self.nu
        if min(rates) <= 0:
            raise ValueError("all rates must be positive")
        if min(self.p) < 0 or abs(sum(self.p) - 1.0) > 1e-12:
            raise ValueError("vacation-entry probabilities must sum to 1")
        if not self.alpha > 1:
            raise ValueError("pareto alpha must exceed 1")
        if self.cutoff < 1:
            raise ValueError("cutoff must be positive")

    @property
    def uniformization_constant(self) -> float:
        return self.lam + self.theta + self.mu + max(self.nu)


def pareto_pmf(alpha: float, K: int):
    """``g_k = k^-a - (k+1)^-a`` for ``k = 1..K`` and the remainder ``(K+1)^-a``.

    Differences are formed as ``-k^-a * expm1(-a log1p(1/k))`` to avoid
    cancellation at large ``k``.
    """
    if not alpha > 1 or K < 1:
        raise ValueError("need alpha > 1 and K >= 1")
    k = np.arange(1, K + 1, dtype=float)
    g = -(k ** -alpha) * np.expm1(-alpha * np.log1p(1.0 / k))
    return g, float((K + 1.0) ** -alpha)


def mean_batch_size(alpha: float, K: int) -> float:
    """``E[X]`` of the Pareto law, summed as ``sum_k P(X >= k)`` up to ``K``."""
    k = np.arange(1, K + 1, dtype=float)
    return float(np.sum((k ** -alpha)[::-1]))


def build_rate_spec(params: MxM1WvParams) -> MG1Spec:
    """Generator blocks, remapped so that ``A_{-1}`` is down and ``A_0`` local."""
    lam, mu, th = params.lam, params.mu, params.theta
    nu = np.array(params.nu)
    K = params.cutoff
    g, rem = pareto_pmf(params.alpha, K)
    entry = np.r_[params.p, 0.0]
    serv = np.r_[nu, mu]

    local = np.zeros((5, 5))
    local[np.arange(4), np.arange(4)] = -(lam + nu + th)
    local[:4, 4] = th
    local[4, 4] = -(lam + mu)

    A = np.zeros((K + 2, 5, 5))
    A[0] = np.diag(serv)
    A[1] = local
    A[2:] = lam * g[:, None, None] * np.eye(5)
    B = lam * g[:, None, None] * entry[None, None, :]
    return MG1Spec(
        B0=[[-lam]], B=B, C0=serv[:, None], A=A,
        B_beyond=lam * rem * entry[None, :], A_beyond=lam * rem * np.eye(5),
        generator=True,
    )


def uniformize(rate_spec: MG1Spec, c: float | None = None) -> MG1Spec:
    """``P = I + Q / c``; ``c`` defaults to the largest total outflow rate."""
    if not rate_spec.generator:
        raise ValueError("uniformize expects a rate specification")
    outflow = max(float(-rate_spec.B0.diagonal().min()), float(-rate_spec.A[1].diagonal().min()))
    if c is None:
        c = outflow
    if c < outflow * (1 - 1e-15) or not c > 0:
        raise ValueError(f"uniformization constant {c} below maximal outflow {outflow}")
    s = rate_spec
    return MG1Spec(
        B0=np.eye(s.r0) + s.B0 / c, B=s.B / c, C0=s.C0 / c,
        A=np.concatenate([s.A[:1] / c, (np.eye(s.r) + s.A[1] / c)[None], s.A[2:] / c]),
        B_beyond=s.B_beyond / c, A_beyond=s.A_beyond / c,
    )


def build_spec(params: MxM1WvParams | None = None, c: float | None = None) -> MG1Spec:
    """Uniformised transition-probability spec of the queue."""
    params = params or MxM1WvParams()
    return uniformize(build_rate_spec(params), c or params.uniformization_constant)


# --------------------------------------------------------------------------
# configuration file
# --------------------------------------------------------------------------

_KEYS = {"lambda": "lam", "mu": "mu", "theta": "theta", "alpha": "alpha", "cutoff": "cutoff"}


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> MxM1WvParams:
    """``key = value`` lines; keys lambda, mu, theta, nu1..nu4, p1..p4, alpha, cutoff."""
    kw, nu, p = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (s.strip() for s in line.partition("="))
        if not sep or not val:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        try:
            if key in _KEYS:
                kw[_KEYS[key]] = int(val) if key == "cutoff" else float(val)
            elif key[:2] == "nu" and key[2:] in "1234" and len(key) == 3:
                nu[int(key[2])] = float(val)
            elif key[:1] == "p" and key[1:] in "1234" and len(key) == 2:
                p[int(key[1])] = float(val)
            else:
                raise ConfigError(f"line {lineno}: unknown key '{key}'")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for '{key}'") from None
    defaults = MxM1WvParams()
    if nu:
        if sorted(nu) != [1, 2, 3, 4]:
            raise ConfigError("give all of nu1..nu4")
        kw["nu"] = tuple(nu[i] for i in range(1, 5))
    if p:
        if sorted(p) != [1, 2, 3, 4]:
            raise ConfigError("give all of p1..p4")
        kw["p"] = tuple(p[i] for i in range(1, 5))
    try:
        return MxM1WvParams(**{**defaults.__dict__, **kw})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def read_config(path) -> MxM1WvParams:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
