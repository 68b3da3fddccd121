"""Seeded SNR sweeps comparing precoding schemes against random eavesdroppers.

Stream layout under ``SeededRng(master_seed)``:

* ``(0, point, trial)`` evaluation draw of Eve for one trial,
* ``(1, point, k)`` k-th frozen Eve draw used inside the greedy search,
* ``(2, point)`` Monte Carlo cross-check of Eve's Gram matrix.

With ``share_eve_across_snr`` the point index is replaced by 0, so every SNR
point sees the same Eve realizations. Within a point all schemes are scored
on the same evaluation draws (paired comparison), and the search draws never
overlap the evaluation draws.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import ChannelMatrix, MdlProfile, draw_eve_batch
from .errors import ConfigError
from .precoding import (
    TIE_TOL,
    FrozenEveSet,
    PowerAllocation,
    allocation_for_count,
    greedy_an_search,
    uniform_allocation,
    waterfilling,
)
from .precoding import tau_grid as make_tau_grid
from .rates import NoiseModel, eve_rate_bounds_batch, jensen_secrecy_lower_bound
from .rng import SeededRng

SCHEMES = ("waterfilling", "svd-uniform", "greedy-an", "jensen-bound", "lemma-bounds")


@dataclass(frozen=True)
class SweepConfig:
    snr_db_points: tuple[float, ...]
    trials: int = 20000
    schemes: tuple[str, ...] = ("greedy-an", "waterfilling")
    power: float = 1.0
    mdl_db: float = 20.0
    master_seed: int = 0
    tau_grid_step: float = 0.05
    eve_draws: int = 500
    normalize_trace: bool = True
    share_eve_across_snr: bool = False
    refine_tau: bool = False
    gram_draws: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snr_db_points", tuple(float(s) for s in self.snr_db_points))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        self.validate()

    def validate(self):
        if not self.snr_db_points:
            raise ConfigError("at least one SNR point is required")
        if not all(math.isfinite(s) for s in self.snr_db_points):
            raise ConfigError("SNR points must be finite")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not (math.isfinite(self.power) and self.power > 0):
            raise ConfigError("power must be finite and > 0")
        if not (math.isfinite(self.mdl_db) and self.mdl_db >= 0):
            raise ConfigError("mdl_db must be finite and >= 0")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s) {bad}; choose from {list(SCHEMES)}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("schemes must not repeat")
        if not 0 < self.tau_grid_step <= 0.5:
            raise ConfigError("tau_grid_step must lie in (0, 0.5]")
        if self.eve_draws < 1:
            raise ConfigError("eve_draws must be >= 1")
        if self.gram_draws < 0:
            raise ConfigError("gram_draws must be >= 0")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    @property
    def profile(self) -> MdlProfile:
        return MdlProfile(self.mdl_db, normalize_trace=self.normalize_trace)

    def noise(self, snr_db: float) -> NoiseModel:
        return NoiseModel.from_snr_db(snr_db, self.power)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrialStats:
    snr_db: float
    scheme: str
    mean_rs: float
    min_rs: float
    std_rs: float
    trials: int
    wall_time: float = field(default=0.0, compare=False)
    samples: np.ndarray | None = field(default=None, compare=False, repr=False)


def _stats(snr_db, scheme, rs: np.ndarray, wall: float) -> TrialStats:
    n = len(rs)
    mean = math.fsum(rs) / n
    var = math.fsum((rs - mean) ** 2) / n
    return TrialStats(snr_db, scheme, mean, float(np.min(rs)), math.sqrt(var), n, wall, rs)


def _run_point(h: ChannelMatrix, config: SweepConfig, point: int) -> list[TrialStats]:
    snr = config.snr_db_points[point]
    noise = config.noise(snr)
    profile = config.profile
    root = SeededRng(config.master_seed)
    key = 0 if config.share_eve_across_snr else point

    t0 = time.perf_counter()
    streams = [root.spawn(0, key, t) for t in range(config.trials)]
    eve = FrozenEveSet(h, draw_eve_batch(h, profile, streams), noise)
    draw_time = time.perf_counter() - t0

    greedy = None
    if "greedy-an" in config.schemes or "lemma-bounds" in config.schemes:
        t0 = time.perf_counter()
        greedy = greedy_an_search(
            h,
            profile,
            config.power,
            noise,
            eve_draws=config.eve_draws,
            tau_grid_step=config.tau_grid_step,
            rng=root.spawn(1, key),
            refine=config.refine_tau,
        )
        search_time = time.perf_counter() - t0 + draw_time

    out = []
    for scheme in config.schemes:
        t0 = time.perf_counter()
        if scheme == "waterfilling":
            alloc = PowerAllocation(waterfilling(h.gains_sq, config.power, noise), np.zeros(h.n))
            out.append(_stats(snr, scheme, eve.secrecy_rates(alloc), time.perf_counter() - t0 + draw_time))
        elif scheme == "svd-uniform":
            alloc = uniform_allocation(h.n, config.power)
            out.append(_stats(snr, scheme, eve.secrecy_rates(alloc), time.perf_counter() - t0 + draw_time))
        elif scheme == "greedy-an":
            rs = eve.secrecy_rates(greedy.solution.allocation)
            out.append(_stats(snr, scheme, rs, time.perf_counter() - t0 + search_time))
        elif scheme == "jensen-bound":
            jb = jensen_secrecy_lower_bound(h, profile, config.power, noise, config.gram_draws, root.spawn(2, key))
            rs = np.full(config.trials, jb.rate)
            out.append(_stats(snr, scheme, rs, time.perf_counter() - t0))
        elif scheme == "lemma-bounds":
            sol = greedy.solution
            r_b = eve.bob_rate(sol.allocation)
            e_lo, e_hi, _ = eve_rate_bounds_batch(eve.eve, sol.q_s, sol.q_a, noise.sigma2)
            wall = time.perf_counter() - t0 + search_time
            out.append(_stats(snr, "lemma-lower", np.maximum(r_b - e_hi, 0.0), wall))
            out.append(_stats(snr, "lemma-upper", np.maximum(r_b - e_lo, 0.0), wall))
    return out


def _run_point_star(args):
    return _run_point(*args)


def run_sweep(h: ChannelMatrix, config: SweepConfig, workers: int = 1) -> list[TrialStats]:
    """Per SNR point and scheme, secrecy-rate statistics over ``config.trials`` Eve draws.

    Rows come back ordered by SNR point, then by the order of ``config.schemes``
    (``lemma-bounds`` expands to ``lemma-lower`` and ``lemma-upper``). Each point
    depends only on its own streams, so ``workers > 1`` yields identical output.
    """
    config.validate()
    jobs = [(h, config, i) for i in range(len(config.snr_db_points))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_point_star, jobs))
    else:
        parts = [_run_point(*j) for j in jobs]
    return [row for part in parts for row in part]


def unimodality_surface(
    h: ChannelMatrix,
    power: float,
    noise,
    profile: MdlProfile,
    s_values,
    tau_grid,
    eve_draws: int = 500,
    rng=None,
    *,
    frozen: FrozenEveSet | None = None,
) -> np.ndarray:
    """Frozen-draw mean secrecy rate on the full ``(S, tau)`` grid, shape ``(len(S), len(tau))``."""
    s_values, tau_grid = list(s_values), list(tau_grid)
    if not s_values or not tau_grid:
        raise ConfigError("grids must be non-empty")
    if frozen is None:
        frozen = FrozenEveSet.draw(h, profile, noise, eve_draws, rng)
    d2 = h.gains_sq
    grid = np.empty((len(s_values), len(tau_grid)))
    for i, s in enumerate(s_values):
        for j, tau in enumerate(tau_grid):
            grid[i, j] = frozen.mean_secrecy(allocation_for_count(d2, s, tau, power))
    return grid


def surface_argmax(grid: np.ndarray, s_values, tau_grid) -> tuple[int, float, float]:
    """``(S, tau, value)`` of the grid maximum; ties go to smaller S, then larger tau."""
    best = None
    for i, s in enumerate(s_values):
        for j, tau in enumerate(tau_grid):
            v = grid[i, j]
            if best is None or v > best[2] + TIE_TOL:
                best = (s, tau, float(v))
            elif abs(v - best[2]) <= TIE_TOL and (s, -tau) < (best[0], -best[1]):
                best = (s, tau, float(v))
    return best


def count_local_maxima(values) -> int:
    """Number of local maxima of a 1-D sequence; a flat run counts once."""
    v = np.asarray(values, dtype=float)
    # collapse plateaus
    keep = [0] + [i for i in range(1, len(v)) if abs(v[i] - v[i - 1]) > TIE_TOL]
    u = v[keep]
    if len(u) == 1:
        return 1
    count = 0
    for i in range(len(u)):
        left = u[i - 1] if i > 0 else -np.inf
        right = u[i + 1] if i < len(u) - 1 else -np.inf
        if u[i] > left and u[i] > right:
            count += 1
    return count


def greedy_matches_surface(h, power, noise, profile, eve_draws, tau_grid_step, rng) -> tuple[bool, tuple, tuple]:
    """Run the greedy search and the exhaustive grid on the same frozen draws."""
    frozen = FrozenEveSet.draw(h, profile, noise, eve_draws, rng)
    s_values = list(range(1, h.n + 1))
    taus = make_tau_grid(tau_grid_step)
    grid = unimodality_surface(h, power, noise, profile, s_values, taus, frozen=frozen)
    g = greedy_an_search(h, profile, power, noise, tau_grid_step=tau_grid_step, frozen=frozen)
    s_star, tau_star, v_star = surface_argmax(grid, s_values, taus)
    ok = g.s_count == s_star and abs(g.tau - tau_star) < 1e-12 and abs(g.mean_rs - v_star) <= TIE_TOL
    return ok, (g.s_count, g.tau, g.mean_rs), (s_star, tau_star, v_star)

