"""Transmit covariances: peaceful waterfilling, uniform SVD and greedy AN allocation.

Every scheme transmits along the right singular vectors of Bob's channel.
Signal and artificial noise (AN) occupy disjoint sets of those modes, so AN
lies in the null space of the signal precoder and Bob never sees it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import ChannelMatrix, MdlProfile, draw_eve_batch
from .errors import DimensionError, DomainError, InfeasibleError
from .rates import _sigma2, batch_rates_diag
from .rng import RngLike, SeededRng, as_generator

TIE_TOL = 1e-12


def waterfilling(gains_sq, power: float, noise) -> np.ndarray:
    """Classic waterfilling ``p_i = [mu - s2/d_i^2]^+`` with ``sum p = power``."""
    d2 = np.asarray(gains_sq, dtype=float)
    if power <= 0:
        raise DomainError("power must be > 0")
    if np.any(d2 < 0):
        raise DomainError("gains must be non-negative")
    s2 = _sigma2(noise)
    order = np.argsort(-d2, kind="stable")
    g = d2[order]
    if g[0] <= 0:
        raise InfeasibleError("all gains are zero; no mode can carry power")
    inv = np.full(g.shape, np.inf)
    inv[g > 0] = s2 / g[g > 0]
    k = 1
    mu = power + inv[0]
    while k < len(g) and mu > inv[k]:
        k += 1
        mu = (power + inv[:k].sum()) / k
    # mu - inv_i written as a sum of inverse-gain differences avoids cancellation
    act = inv[:k]
    p_sorted = np.zeros_like(g)
    p_sorted[:k] = np.maximum((power + (act[None, :] - act[:, None]).sum(axis=1)) / k, 0.0)
    p = np.empty_like(p_sorted)
    p[order] = p_sorted
    return p


@dataclass(frozen=True)
class PowerAllocation:
    """Per-mode signal and AN powers on Bob's singular modes."""

    signal_powers: np.ndarray
    an_powers: np.ndarray
    tau: float = 1.0
    threshold: float = 0.0
    degenerate: bool = False

    @property
    def s_count(self) -> int:
        return int(np.count_nonzero(self.signal_powers))

    @property
    def a_count(self) -> int:
        return int(np.count_nonzero(self.an_powers))

    @property
    def total_power(self) -> float:
        return float(self.signal_powers.sum() + self.an_powers.sum())

    @property
    def effective_tau(self) -> float:
        tot = self.total_power
        return float(self.signal_powers.sum() / tot) if tot > 0 else 0.0


def threshold_allocation(gains_sq, theta: float, tau: float, power: float) -> PowerAllocation:
    """Equal signal power on modes with ``d_i^2 > theta``, equal AN power elsewhere.

    ``c = tau P / S`` and ``gamma = (1 - tau) P / A``. With no AN mode left
    (``A == 0``) the full budget goes to the signal whatever ``tau`` is.
    """
    d2 = np.asarray(gains_sq, dtype=float)
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    if theta < 0:
        raise DomainError("theta must be >= 0")
    if power <= 0:
        raise DomainError("power must be > 0")
    sig = d2 > theta
    s, a = int(sig.sum()), int((~sig).sum())
    if s == 0 and tau > 0:
        raise InfeasibleError(f"no gain exceeds theta={theta}")
    p = np.zeros_like(d2)
    beta = np.zeros_like(d2)
    if a == 0:
        p[sig] = power / s
        return PowerAllocation(p, beta, tau, theta)
    if tau > 0:
        p[sig] = tau * power / s
    beta[~sig] = (1.0 - tau) * power / a
    return PowerAllocation(p, beta, tau, theta, degenerate=(tau == 0 and s >= 1))


def allocation_for_count(gains_sq, s: int, tau: float, power: float) -> PowerAllocation:
    """Threshold allocation whose threshold sits just below the ``s``-th strongest gain."""
    d2 = np.asarray(gains_sq, dtype=float)
    n = len(d2)
    if not 1 <= s <= n:
        raise DomainError(f"signal mode count must lie in [1, {n}], got {s}")
    if s < n and d2[s] >= d2[s - 1]:
        raise InfeasibleError(f"gains {s} and {s + 1} tie; no threshold selects exactly {s} modes")
    theta = float(d2[s]) if s < n else 0.5 * float(d2[-1])
    return threshold_allocation(d2, theta, tau, power)


def uniform_allocation(n: int, power: float) -> PowerAllocation:
    return PowerAllocation(np.full(n, power / n), np.zeros(n))


@dataclass(frozen=True)
class PrecoderSolution:
    f_signal: np.ndarray
    e_an: np.ndarray
    q_s: np.ndarray
    q_a: np.ndarray
    total_power: float
    allocation: PowerAllocation | None = None


def build_precoder(h: ChannelMatrix, alloc: PowerAllocation) -> PrecoderSolution:
    """Signal map ``F`` and AN map ``E`` from Bob's right singular vectors."""
    p, beta = alloc.signal_powers, alloc.an_powers
    if p.shape != (h.n,) or beta.shape != (h.n,):
        raise DimensionError(f"allocation has length {p.shape}, channel has {h.n} modes")
    t = h.svd[2]
    s_idx = np.flatnonzero(p)
    a_idx = np.flatnonzero(beta)
    f = t[:, s_idx] * np.sqrt(p[s_idx])
    e = t[:, a_idx] * np.sqrt(beta[a_idx])
    return PrecoderSolution(f, e, f @ f.conj().T, e @ e.conj().T, alloc.total_power, alloc)


class FrozenEveSet:
    """A fixed set of Eve realizations for scoring many allocations on the same draws.

    Stores ``G_k T`` for Bob's right singular basis ``T`` so that each
    candidate allocation costs two batched Cholesky factorizations.
    """

    def __init__(self, h: ChannelMatrix, eve: np.ndarray, noise):
        self.h = h
        self.sigma2 = _sigma2(noise)
        self.gains_sq = h.gains_sq
        self.eve = eve
        self.b = eve @ h.svd[2]

    @classmethod
    def draw(cls, h: ChannelMatrix, profile: MdlProfile, noise, draws: int, rng: RngLike = None) -> FrozenEveSet:
        if draws < 1:
            raise DomainError("draws must be >= 1")
        if isinstance(rng, SeededRng):
            streams = [rng.spawn(k) for k in range(draws)]
        else:
            streams = [as_generator(rng)] * draws
        return cls(h, draw_eve_batch(h, profile, streams), noise)

    def __len__(self):
        return self.b.shape[0]

    def bob_rate(self, alloc: PowerAllocation) -> float:
        return float(np.sum(np.log2(1.0 + self.gains_sq * alloc.signal_powers / self.sigma2)))

    def eve_rates(self, alloc: PowerAllocation) -> np.ndarray:
        return batch_rates_diag(self.b, alloc.signal_powers, alloc.an_powers, self.sigma2)

    def secrecy_rates(self, alloc: PowerAllocation) -> np.ndarray:
        return np.maximum(self.bob_rate(alloc) - self.eve_rates(alloc), 0.0)

    def mean_secrecy(self, alloc: PowerAllocation) -> float:
        return math.fsum(self.secrecy_rates(alloc)) / len(self)


def tau_grid(step: float) -> list[float]:
    """``1, 1 - step, 1 - 2 step, ...`` down to the last value above zero."""
    if not 0 < step <= 0.5:
        raise DomainError("tau step must lie in (0, 0.5]")
    out = []
    k = 0
    while True:
        t = round(1.0 - k * step, 12)
        if t <= 1e-12:
            return out
        out.append(t)
        k += 1


@dataclass
class GreedyResult:
    solution: PrecoderSolution
    mean_rs: float
    s_count: int
    tau: float
    trace: list[tuple[int, float, float]] = field(default_factory=list)


def greedy_an_search(
    h: ChannelMatrix,
    profile: MdlProfile,
    power: float,
    noise,
    eve_draws: int = 500,
    tau_grid_step: float = 0.05,
    rng: RngLike = None,
    *,
    frozen: FrozenEveSet | None = None,
    refine: bool = False,
) -> GreedyResult:
    """Greedy search over the signal-mode count ``S`` and power split ``tau``.

    The outer loop lowers the threshold one mode at a time (``S = 1, 2, ...``);
    the inner loop moves power into AN (``tau = 1, 1 - step, ...``). Each loop
    stops at its first non-improving step. All candidates are scored on one
    frozen set of Eve draws. Ties within 1e-12 keep the earlier candidate,
    which favours smaller ``S`` and larger ``tau``.

    With ``refine=True`` the best ``tau`` is polished by a bounded scalar
    search on ``[tau - step, tau + step]``.
    """
    if power <= 0:
        raise DomainError("power must be > 0")
    if frozen is None:
        frozen = FrozenEveSet.draw(h, profile, noise, eve_draws, rng)
    d2 = h.gains_sq
    n = h.n
    taus = tau_grid(tau_grid_step)
    trace: list[tuple[int, float, float]] = []
    best = None  # (mean, s, tau, alloc)

    for s in range(1, n + 1):
        if d2[s - 1] <= 0:
            break
        if s < n and d2[s] >= d2[s - 1]:
            continue
        s_best = None
        for tau in taus if s < n else taus[:1]:
            alloc = allocation_for_count(d2, s, tau, power)
            val = frozen.mean_secrecy(alloc)
            trace.append((s, tau, val))
            if s_best is None or val > s_best[0] + TIE_TOL:
                s_best = (val, s, tau, alloc)
            else:
                break
        if best is None or s_best[0] > best[0] + TIE_TOL:
            best = s_best
        else:
            break

    if best is None:
        raise InfeasibleError("channel has no mode with positive gain")
    val, s, tau, alloc = best
    if refine and s < n:
        lo, hi = max(tau - tau_grid_step, 1e-9), min(tau + tau_grid_step, 1.0)
        res = minimize_scalar(
            lambda t: -frozen.mean_secrecy(allocation_for_count(d2, s, float(t), power)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-6},
        )
        if -res.fun > val + TIE_TOL:
            tau = float(res.x)
            alloc = allocation_for_count(d2, s, tau, power)
            val = -float(res.fun)
    return GreedyResult(build_precoder(h, alloc), val, s, tau, trace)
