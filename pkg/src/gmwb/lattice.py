"""Nelson-Ramaswamy binomial lattice for the Hull-White short rate.

The lattice is centred on ``r0`` with constant spacing ``dr = sigma_r sqrt(dt)``;
all of the drift lives in the branch probabilities

    pi = 1/2 + (theta(t) - a r) sqrt(dt) / (2 sigma_r),   clamped to [0, 1].

Between two anniversary dates there are ``m`` steps, hence ``2**m`` paths from
each node.  For each path we keep its probability, the average of the ``m + 1``
rates visited (steps 0..m, both endpoints included) and the terminal level.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .yield_curve import HullWhiteParams, theta

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathTable:
    """Inter-anniversary paths for every start level of one anniversary step.

    Arrays have shape ``(n_start_levels, 2**m)``.
    """

    prob: np.ndarray
    avg_rate: np.ndarray
    terminal_level: np.ndarray


@dataclass
class RateLattice:
    m: int
    n_years: int
    dt_step: float
    dr: float
    r0: float
    nodes: list
    up_prob: list
    clamp_fraction: float
    _paths: dict = field(default_factory=dict, repr=False)

    def rates_at_date(self, n: int) -> np.ndarray:
        """Rate levels at anniversary ``n`` (``n*m + 1`` of them, ascending)."""
        return self.nodes[n * self.m]

    def paths(self, n: int) -> PathTable:
        """Paths from every level at date ``n - 1`` to date ``n`` (memoized)."""
        if n not in self._paths:
            self._paths[n] = _enumerate_all(self, n)
        return self._paths[n]


def build_lattice(curve, hw: HullWhiteParams, N: int, m: int) -> RateLattice:
    if N < 1 or m < 1:
        raise ValueError("need N >= 1 and m >= 1")
    if hw.sigma_r <= 0:
        raise ValueError("binomial lattice needs sigma_r > 0")
    dt = 1.0 / m
    dr = hw.sigma_r * np.sqrt(dt)
    nodes, probs = [], []
    clamped = total = 0
    for k in range(N * m + 1):
        j = np.arange(k + 1)
        r = hw.r0 + (2 * j - k) * dr
        nodes.append(r)
        if k < N * m:
            p = 0.5 + (theta(curve, hw, k * dt) - hw.a * r) * np.sqrt(dt) / (2 * hw.sigma_r)
            clamped += int(np.count_nonzero((p < 0) | (p > 1)))
            total += p.size
            probs.append(np.clip(p, 0.0, 1.0))
    frac = clamped / max(total, 1)
    if frac > 0.05:
        log.warning("branch probabilities clamped at %.1f%% of lattice nodes", 100 * frac)
    return RateLattice(m, N, dt, dr, hw.r0, nodes, probs, frac)


def enumerate_paths(lattice: RateLattice, n: int, start_level: int) -> PathTable:
    """The ``2**m`` paths leaving ``start_level`` at date ``n - 1``."""
    table = lattice.paths(n)
    s = slice(start_level, start_level + 1)
    return PathTable(table.prob[s][0], table.avg_rate[s][0], table.terminal_level[s][0])


def _enumerate_all(lat: RateLattice, n: int) -> PathTable:
    if not 1 <= n <= lat.n_years:
        raise ValueError(f"anniversary index {n} outside 1..{lat.n_years}")
    m = lat.m
    k0 = (n - 1) * m
    start = np.arange(k0 + 1)
    moves = np.array(list(itertools.product((0, 1), repeat=m)), dtype=int)  # 1 = up
    n_paths = moves.shape[0]
    level = np.repeat(start[:, None], n_paths, axis=1)
    prob = np.ones(level.shape)
    rate_sum = lat.nodes[k0][level].copy()
    for step in range(m):
        p_up = lat.up_prob[k0 + step][level]
        up = moves[:, step][None, :]
        prob *= np.where(up == 1, p_up, 1.0 - p_up)
        level = level + up
        rate_sum += lat.nodes[k0 + step + 1][level]
    return PathTable(prob, rate_sum / (m + 1), level)
