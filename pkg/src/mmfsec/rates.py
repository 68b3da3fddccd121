"""Information rates for Bob and Eve, secrecy rates and bounds on them.

All rates are in bits per channel use (log base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .channel import ChannelMatrix, MdlProfile, _eve_entries, draw_eve_channel
from .errors import DimensionError, DomainError
from .rng import RngLike, as_generator

_PSD_TOL = 1e-9
_EIG_CLIP = -1e-12


@dataclass(frozen=True)
class NoiseModel:
    """Per-mode additive noise variance (same at Bob and Eve)."""

    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"sigma2 must be finite and > 0, got {self.sigma2}")

    @classmethod
    def from_snr_db(cls, snr_db: float, power: float = 1.0) -> NoiseModel:
        """Noise variance giving ``10*log10(power / sigma2) == snr_db``."""
        return cls(power / 10.0 ** (snr_db / 10.0))


class RatePair(NamedTuple):
    r_b: float
    r_e: float


def _sigma2(noise) -> float:
    if isinstance(noise, NoiseModel):
        return noise.sigma2
    return NoiseModel(float(noise)).sigma2


def _entries(ch) -> np.ndarray:
    return ch.entries if isinstance(ch, ChannelMatrix) else np.asarray(ch, dtype=np.complex128)


def _hermitian(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def check_covariance(q, n: int, name: str = "covariance") -> np.ndarray:
    """Return ``q`` as a symmetrized complex ``n x n`` array, validating PSD."""
    q = np.asarray(q, dtype=np.complex128)
    if q.ndim == 0:
        q = q.reshape(1, 1)
    if q.shape != (n, n):
        raise DimensionError(f"{name} has shape {q.shape}, expected {(n, n)}")
    q = _hermitian(q)
    ev = np.linalg.eigvalsh(q)
    scale = max(float(np.trace(q).real), 1.0)
    if ev[0] < -_PSD_TOL * scale:
        raise DomainError(f"{name} is not positive semidefinite (min eigenvalue {ev[0]:.3e})")
    return q


def logdet_i_plus(a: np.ndarray) -> float:
    """``log2 |I + A|`` for Hermitian PSD ``A`` via its eigenvalues."""
    ev = np.linalg.eigvalsh(_hermitian(a))
    ev = np.maximum(ev, _EIG_CLIP)
    return float(np.sum(np.log1p(ev)) / math.log(2))


def rate(channel, q_s, q_a, noise) -> float:
    """``log2 |I + (sigma2 I + H Qa H^H)^-1 H Qs H^H|``.

    The interference-plus-noise matrix is Cholesky-factored as ``L L^H`` and
    the signal term is whitened by triangular solves; the rate is then the
    log-determinant of ``I + L^-1 H Qs H^H L^-H``.
    """
    h = _entries(channel)
    n = h.shape[0]
    if h.ndim != 2 or h.shape[1] != n:
        raise DimensionError("channel must be square")
    q_s = check_covariance(q_s, n, "q_s")
    q_a = check_covariance(q_a, n, "q_a")
    s2 = _sigma2(noise)
    k = s2 * np.eye(n) + _hermitian(h @ q_a @ h.conj().T)
    low = np.linalg.cholesky(k)
    x = solve_triangular(low, h, lower=True)
    return max(logdet_i_plus(x @ q_s @ x.conj().T), 0.0)


def rate_pair(h, g, q_s, q_a, noise) -> RatePair:
    return RatePair(rate(h, q_s, q_a, noise), rate(g, q_s, q_a, noise))


def secrecy_rate(h, g, q_s, q_a, noise) -> float:
    """``[R_b - R_e]^+``."""
    r_b, r_e = rate_pair(h, g, q_s, q_a, noise)
    return max(0.0, r_b - r_e)


# --------------------------------------------------------------------------
# Batched evaluation
# --------------------------------------------------------------------------


def _batch_logdet2(m: np.ndarray) -> np.ndarray:
    """log2 det of a stack of Hermitian PD matrices via Cholesky."""
    low = np.linalg.cholesky(_hermitian(m))
    diag = np.diagonal(low, axis1=-2, axis2=-1).real
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def batch_rates(gs: np.ndarray, q_s, q_a, sigma2: float) -> np.ndarray:
    """Rates of a stack of channels ``gs`` (shape ``(K, n, n)``) for fixed covariances.

    Uses ``log|s2 I + G(Qs+Qa)G^H| - log|s2 I + G Qa G^H|``, which equals
    :func:`rate` by the determinant product rule.
    """
    n = gs.shape[-1]
    gh = gs.conj().swapaxes(-1, -2)
    eye = sigma2 * np.eye(n)
    k_a = eye + gs @ q_a @ gh
    k_t = k_a + gs @ q_s @ gh
    return np.maximum(_batch_logdet2(k_t) - _batch_logdet2(k_a), 0.0)


def batch_rates_diag(b: np.ndarray, p: np.ndarray, beta: np.ndarray, sigma2: float) -> np.ndarray:
    """As :func:`batch_rates` for ``Qs = T diag(p) T^H``, ``Qa = T diag(beta) T^H``.

    ``b`` holds the products ``G_k T`` so no covariance matrix is ever formed.
    """
    n = b.shape[-1]
    bh = b.conj().swapaxes(-1, -2)
    eye = sigma2 * np.eye(n)
    k_a = eye + (b * beta) @ bh
    k_t = k_a + (b * p) @ bh
    if not np.any(beta):
        return np.maximum(_batch_logdet2(k_t) - n * math.log2(sigma2), 0.0)
    return np.maximum(_batch_logdet2(k_t) - _batch_logdet2(k_a), 0.0)


# --------------------------------------------------------------------------
# Monte Carlo estimates
# --------------------------------------------------------------------------


class MonteCarloEstimate(NamedTuple):
    value: float
    stderr: float


def estimated_secrecy_rate(h: ChannelMatrix, q_s, q_a, noise, profile: MdlProfile, draws: int, rng: RngLike = None) -> float:
    """Alice's estimate ``[R_b - mean_k R_e(G_k)]^+`` over fresh Eve draws.

    Eve terms are differenced per draw before averaging. Draws are taken in
    sequence from a single generator.
    """
    if draws < 1:
        raise DomainError("draws must be >= 1")
    gen = as_generator(rng)
    r_b = rate(h, q_s, q_a, noise)
    r_e = [rate(draw_eve_channel(h, profile, gen), q_s, q_a, noise) for _ in range(draws)]
    return max(0.0, r_b - math.fsum(r_e) / draws)


def ergodic_secrecy_rate_mc(
    h: ChannelMatrix, q, profile: MdlProfile, noise, draws: int, rng: RngLike = None, *, haar: bool = True
) -> MonteCarloEstimate:
    """Monte Carlo estimate of ``log|I + Q H^H H / s2| - E log|I + Q G^H G / s2|``."""
    if draws < 1:
        raise DomainError("draws must be >= 1")
    gen = as_generator(rng)
    s2 = _sigma2(noise)
    n = h.n
    q = check_covariance(q, n, "q")
    zero = np.zeros((n, n))
    r_b = rate(h, q, zero, s2)
    r_e = np.array([rate(_eve_entries(h.entries, profile, gen, haar=haar), q, zero, s2) for _ in range(draws)])
    value = r_b - math.fsum(r_e) / draws
    stderr = float(np.std(r_e, ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return MonteCarloEstimate(value, stderr)


# --------------------------------------------------------------------------
# Bounds on Eve's rate
# --------------------------------------------------------------------------


class EveRateBounds(NamedTuple):
    lower: float
    upper: float
    singular: bool


def eve_rate_bounds(g, q_s, q_a, noise) -> EveRateBounds:
    """Eigenvalue bounds on Eve's rate that need only the spectra of ``G``, ``Qs+Qa``, ``Qa``.

    With ``a_i = s2 / g_i**2`` sorted ascending (strongest Eve mode first),
    ``q`` the eigenvalues of ``Qs + Qa`` and ``b`` those of ``Qa``::

        upper = sum log(a_i + q_desc_i) - sum log(a_i + b_asc_i)
        lower = sum log(a_i + q_asc_i)  - sum log(a_i + b_desc_i)

    Opposite ordering maximizes ``log|A + Q|`` and equal ordering minimizes
    it, so each bound pairs the two determinant terms at their extremes. When
    ``Qa = 0`` the eigenvalues of ``Qs + Qa`` are those of ``Qs``. Each term is
    evaluated as ``log(1 + x g_i**2 / s2)``, so a zero singular value
    (``a_i`` infinite) contributes nothing and sets ``singular``.
    """
    ge = _entries(g)
    n = ge.shape[0]
    q_s = check_covariance(q_s, n, "q_s")
    q_a = check_covariance(q_a, n, "q_a")
    lower, upper, singular = eve_rate_bounds_batch(ge[None], q_s, q_a, _sigma2(noise))
    return EveRateBounds(float(lower[0]), float(upper[0]), bool(singular[0]))


def eve_rate_bounds_batch(gs: np.ndarray, q_s: np.ndarray, q_a: np.ndarray, sigma2: float):
    """Arrays ``(lower, upper, singular)`` of :func:`eve_rate_bounds` over a stack of channels."""
    n = gs.shape[-1]
    sv = np.linalg.svd(gs, compute_uv=False)  # descending, i.e. a_i ascending
    null = sv <= sv[..., :1] * n * np.finfo(float).eps
    g2 = np.where(null, 0.0, sv**2)
    q_asc = np.maximum(np.linalg.eigvalsh(_hermitian(q_s + q_a)), 0.0)
    b_asc = np.maximum(np.linalg.eigvalsh(_hermitian(q_a)), 0.0)

    def term(x):
        return np.sum(np.log1p(x * g2 / sigma2), axis=-1) / math.log(2)

    upper = term(q_asc[::-1]) - term(b_asc)
    lower = term(q_asc) - term(b_asc[::-1])
    return lower, upper, np.any(null, axis=-1)


# --------------------------------------------------------------------------
# Jensen lower bound on the ergodic secrecy rate
# --------------------------------------------------------------------------


def eve_gram_scalar(h: ChannelMatrix, profile: MdlProfile) -> float:
    """``c`` with ``E[G^H G] = c I`` under Haar isotropy."""
    if profile.normalize_trace:
        return h.power_trace / h.n
    return profile.mean_loss * h.power_trace / h.n


def eve_gram_mc(h: ChannelMatrix, profile: MdlProfile, draws: int, rng: RngLike = None) -> np.ndarray:
    """Monte Carlo estimate of ``E[G^H G]``."""
    if draws < 1:
        raise DomainError("draws must be >= 1")
    gen = as_generator(rng)
    acc = np.zeros((h.n, h.n), dtype=np.complex128)
    for _ in range(draws):
        g = _eve_entries(h.entries, profile, gen)
        acc += g.conj().T @ g
    return acc / draws


def secrecy_waterfilling(gains_sq, c: float, power: float, sigma2: float, tol: float = 1e-9) -> np.ndarray:
    """Maximize ``sum log(1 + d_i^2 q_i/s2) - log(1 + c q_i/s2)`` s.t. ``sum q = power``.

    Only modes with ``d_i^2 > c`` receive power. For multiplier ``lam`` each
    active mode takes the positive root of
    ``d^2/(s2 + d^2 q) - c/(s2 + c q) = lam``; ``lam`` is bisected until the
    power sum is within ``tol``.
    """
    d2 = np.asarray(gains_sq, dtype=float)
    if power <= 0:
        raise DomainError("power must be > 0")
    active = d2 > c * (1 + 1e-12)
    q = np.zeros_like(d2)
    if not np.any(active):
        return q
    da = d2[active]
    s2 = sigma2

    def alloc(lam):
        # lam*d2*c q^2 + lam*s2*(d2+c) q + lam*s2^2 - s2*(d2-c) = 0, stable positive root
        qa = lam * da * c
        qb = lam * s2 * (da + c)
        qc = lam * s2 * s2 - s2 * (da - c)
        root = -2.0 * qc / (qb + np.sqrt(qb * qb - 4.0 * qa * qc))
        return np.maximum(root, 0.0)

    hi = float(np.max(da - c)) / s2  # alloc(hi) == 0
    lo = hi / 2.0
    while alloc(lo).sum() < power:
        lo /= 2.0
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        total = alloc(mid).sum()
        if abs(total - power) <= tol or mid in (lo, hi):
            break
        if total > power:
            lo = mid
        else:
            hi = mid
    qa = alloc(mid)
    q[active] = qa * (power / qa.sum())
    return q


@dataclass(frozen=True)
class JensenBound:
    rate: float
    covariance: np.ndarray
    powers: np.ndarray
    gram_scalar: float
    gram_mc_deviation: float | None = None

    def __iter__(self):
        # unpacks as (rate, covariance)
        return iter((self.rate, self.covariance))


def jensen_secrecy_lower_bound(
    h: ChannelMatrix, profile: MdlProfile, power: float, noise, draws_for_gram: int = 0, rng: RngLike = None
) -> JensenBound:
    """Pessimistic ergodic secrecy rate with ``E[G^H G]`` in place of the random Gram.

    ``E[G^H G] = c I`` in closed form; with ``draws_for_gram > 0`` the Monte
    Carlo Gram is also computed and its max entrywise deviation from ``c I``
    is reported. The optimal covariance is diagonal in Bob's right singular
    basis.
    """
    s2 = _sigma2(noise)
    c = eve_gram_scalar(h, profile)
    dev = None
    if draws_for_gram > 0:
        m = eve_gram_mc(h, profile, draws_for_gram, rng)
        dev = float(np.max(np.abs(m - c * np.eye(h.n))))
    d2 = h.gains_sq
    q = secrecy_waterfilling(d2, c, power, s2)
    t = h.svd[2]
    cov = (t * q) @ t.conj().T
    value = float(np.sum(np.log2(1 + d2 * q / s2) - np.log2(1 + c * q / s2)))
    return JensenBound(max(value, 0.0), cov, q, c, dev)
