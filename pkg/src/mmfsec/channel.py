"""Channel model: Bob's fixed MMF channel and random eavesdropper channels.

Bob sees a fixed square transfer matrix ``H``. Eve sees ``G = diag(sqrt(l)) H U``
with a fresh loss vector ``l`` (mode-dependent loss) and a fresh Haar unitary
``U`` per realization, optionally rescaled so Eve receives the same total power
as Bob.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ChannelFormatError, DimensionError, DomainError, InfeasibleError
from .rng import RngLike, as_generator

DRAW_RULES = ("uniform-linear",)


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Square complex channel with a lazily computed, cached SVD.

    ``svd`` returns ``(left, d, right)`` with ``entries == left @ diag(d) @ right^H``
    and ``d`` sorted descending. Transmit directions are the columns of ``right``.
    """

    entries: np.ndarray
    label: str | None = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"channel must be a non-empty square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def svd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        u, d, vh = np.linalg.svd(self.entries)
        return u, d, vh.conj().T

    @property
    def singular_values(self) -> np.ndarray:
        return self.svd[1]

    @property
    def gains_sq(self) -> np.ndarray:
        """Squared singular values (mode power gains), descending."""
        return self.svd[1] ** 2

    @property
    def power_trace(self) -> float:
        """tr(H H^H)."""
        return float(np.sum(np.abs(self.entries) ** 2))

    def __repr__(self):
        return f"ChannelMatrix(n={self.n}, label={self.label!r})"


@dataclass(frozen=True)
class MdlProfile:
    """Mode-dependent loss specification.

    Losses are power attenuations with ``l_max = 1`` and
    ``l_min = 10**(-mdl_db/10)``.
    """

    mdl_db: float = 20.0
    draw_rule: str = "uniform-linear"
    normalize_trace: bool = True

    def __post_init__(self):
        if not np.isfinite(self.mdl_db) or self.mdl_db < 0:
            raise DomainError(f"mdl_db must be finite and >= 0, got {self.mdl_db}")
        if self.draw_rule not in DRAW_RULES:
            raise DomainError(f"unknown draw_rule {self.draw_rule!r}; expected one of {DRAW_RULES}")

    @property
    def l_max(self) -> float:
        return 1.0

    @property
    def l_min(self) -> float:
        return 10.0 ** (-self.mdl_db / 10.0)

    @property
    def mean_loss(self) -> float:
        # endpoints and the uniform remainder all average to the interval midpoint
        return 0.5 * (self.l_max + self.l_min)


# --------------------------------------------------------------------------
# Random draws
# --------------------------------------------------------------------------


def draw_haar_unitary(n: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary.

    QR of a complex Ginibre matrix, with each column of Q multiplied by the
    phase of the matching diagonal entry of R. Without that phase fix the
    result is not Haar.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    gen = as_generator(rng)
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def draw_mdl_matrix(n: int, profile: MdlProfile, rng: RngLike = None) -> np.ndarray:
    """Draw the per-mode loss vector ``l`` (length ``n``, power scale).

    ``l_max`` and ``l_min`` each go to one uniformly chosen distinct mode; the
    other ``n - 2`` losses are uniform on ``[l_min, l_max]``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if profile.mdl_db == 0:
        return np.ones(n)
    if n == 1:
        raise InfeasibleError("a single mode cannot carry a nonzero MDL")
    gen = as_generator(rng)
    lo, hi = profile.l_min, profile.l_max
    loss = gen.uniform(lo, hi, size=n)
    i_max, i_min = gen.choice(n, size=2, replace=False)
    loss[i_max] = hi
    loss[i_min] = lo
    return loss


def _eve_entries(h: np.ndarray, profile: MdlProfile, gen: np.random.Generator, haar: bool = True) -> np.ndarray:
    n = h.shape[0]
    loss = draw_mdl_matrix(n, profile, gen)
    g = np.sqrt(loss)[:, None] * h
    if haar:
        g = g @ draw_haar_unitary(n, gen)
    if profile.normalize_trace:
        target = np.sum(np.abs(h) ** 2)
        have = np.sum(np.abs(g) ** 2)
        if have > 0:
            g = g * np.sqrt(target / have)
    return g


def draw_eve_channel(h: ChannelMatrix, profile: MdlProfile, rng: RngLike = None, *, haar: bool = True) -> ChannelMatrix:
    """One eavesdropper realization ``G = diag(sqrt(l)) H U``.

    Loss vector and unitary are both redrawn on every call, in that order.
    ``haar=False`` pins ``U`` to the identity (test hook).
    """
    return ChannelMatrix(_eve_entries(h.entries, profile, as_generator(rng), haar=haar))


def draw_eve_batch(h: ChannelMatrix, profile: MdlProfile, streams, *, haar: bool = True) -> np.ndarray:
    """Stack of Eve matrices, shape ``(K, n, n)``, one per RNG stream.

    Realization ``k`` depends only on ``streams[k]``, so batches can be split or
    reordered without changing any individual draw.
    """
    out = np.empty((len(streams), h.n, h.n), dtype=np.complex128)
    for k, s in enumerate(streams):
        out[k] = _eve_entries(h.entries, profile, as_generator(s), haar=haar)
    return out


def gen_synthetic_channel(n: int, spread_db: float, rng: RngLike = None, label: str | None = None) -> ChannelMatrix:
    """Synthetic stand-in for a measured channel.

    ``H = U1 diag(d) U2^H`` with independent Haar unitaries and ``d**2``
    log-spaced from 1 down to ``10**(-spread_db/10)``, scaled so ``tr(H H^H) = n``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not np.isfinite(spread_db) or spread_db < 0:
        raise DomainError("spread_db must be finite and >= 0")
    gen = as_generator(rng)
    u1 = draw_haar_unitary(n, gen)
    u2 = draw_haar_unitary(n, gen)
    if n == 1:
        d2 = np.ones(1)
    else:
        d2 = 10.0 ** (-spread_db / 10.0 * np.arange(n) / (n - 1))
    d2 *= n / d2.sum()
    h = (u1 * np.sqrt(d2)) @ u2.conj().T
    return ChannelMatrix(h, label=label)


# --------------------------------------------------------------------------
# File format
# --------------------------------------------------------------------------


def channel_to_json(ch: ChannelMatrix) -> str:
    """Canonical JSON text (single line plus trailing newline)."""
    obj = {"n": ch.n}
    if ch.label is not None:
        obj["label"] = ch.label
    flat = ch.entries.reshape(-1)
    obj["entries"] = [[float(z.real), float(z.imag)] for z in flat]
    return json.dumps(obj, allow_nan=False) + "\n"


def channel_from_json(text: str) -> ChannelMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ChannelFormatError("top level must be an object")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ChannelFormatError(f"field 'n' must be a positive integer, got {n!r}")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ChannelFormatError("field 'label' must be a string")
    entries = obj.get("entries")
    if not isinstance(entries, list):
        raise ChannelFormatError("field 'entries' must be an array")
    if len(entries) != n * n:
        raise DimensionError(f"field 'entries' has {len(entries)} elements, expected n*n = {n * n}")
    vals = np.empty(n * n, dtype=np.complex128)
    for k, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pair)
        ):
            raise ChannelFormatError(f"field 'entries[{k}]' must be a [re, im] pair of numbers")
        vals[k] = complex(pair[0], pair[1])
    return ChannelMatrix(vals.reshape(n, n), label=label)


def load_channel(path: str | os.PathLike) -> ChannelMatrix:
    with open(path, encoding="utf-8") as f:
        return channel_from_json(f.read())


def save_channel(ch: ChannelMatrix, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(channel_to_json(ch))


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def channel_digest(ch: ChannelMatrix) -> str:
    """64-bit FNV-1a of the canonical JSON bytes, as 16 hex digits."""
    return f"{fnv1a_64(channel_to_json(ch).encode('utf-8')):016x}"
