"""Monte Carlo oracles: exact-transition static pricer and LSM for surrender.

Rates are sampled exactly year by year from the conditional Gaussian law of
``(int r, r_n, dW^S)`` given ``r_{n-1}`` (Cholesky of the covariance), so
there is no time-discretization bias.  Mortality is handled by weighting with
survival probabilities rather than sampling death times.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import contract as ct
from .joint_law import conditional_moments
from .market import MarketModel
from .mortality import MortalityTable, no_mortality, survival_vector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationConfig:
    n_paths: int = 100_000
    seed: int = 12345
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError("n_paths must be >= 2")


@dataclass(frozen=True)
class PriceEstimate:
    mean: float
    half_width_95: float
    n_paths: int
    std: float = float("nan")

    def contains(self, value: float) -> bool:
        return abs(value - self.mean) <= self.half_width_95

    @classmethod
    def from_samples(cls, x) -> "PriceEstimate":
        x = np.asarray(x, dtype=float)
        sd = float(x.std(ddof=1))
        return cls(float(x.mean()), 1.96 * sd / np.sqrt(x.size), x.size, sd)


@dataclass
class SimulatedPaths:
    """Per-path, per-year draws; arrays have shape ``(n_paths, N)``."""

    int_r: np.ndarray
    r: np.ndarray          # r_n at the end of year n
    dW: np.ndarray         # fund Brownian increments

    @property
    def discount(self) -> np.ndarray:
        """Cumulative discount factors ``exp(-int_0^n r)``, shape ``(n_paths, N)``."""
        return np.exp(-np.cumsum(self.int_r, axis=1))


def _normals(rng, n_paths: int, N: int, antithetic: bool):
    if not antithetic:
        return rng.standard_normal((n_paths, N, 3))
    half = (n_paths + 1) // 2
    z = rng.standard_normal((half, N, 3))
    return np.concatenate([z, -z])[:n_paths]


def simulate_paths(market: MarketModel, N: int, config: SimulationConfig) -> SimulatedPaths:
    rng = np.random.default_rng(config.seed)
    z = _normals(rng, config.n_paths, N, config.antithetic)
    int_r = np.empty((config.n_paths, N))
    r_end = np.empty_like(int_r)
    dW = np.empty_like(int_r)
    r_prev = np.full(config.n_paths, market.hw.r0)
    for n in range(1, N + 1):
        law = conditional_moments(market.curve, market.hw, market.rho, n)
        L = np.linalg.cholesky(law.cov)
        mu1, mu2 = law.means(r_prev)
        eps = z[:, n - 1, :] @ L.T
        int_r[:, n - 1] = mu1 + eps[:, 0]
        r_end[:, n - 1] = mu2 + eps[:, 1]
        dW[:, n - 1] = eps[:, 2]
        r_prev = r_end[:, n - 1]
    return SimulatedPaths(int_r, r_end, dW)


def _growth(market: MarketModel, fee: float, paths: SimulatedPaths) -> np.ndarray:
    s = market.sigma_s
    return np.exp(paths.int_r - (market.q + fee + 0.5 * s**2) + s * paths.dW)


def static_cashflows(market: MarketModel, spec: ct.ContractSpec, paths: SimulatedPaths,
                     pi: np.ndarray):
    """Discounted, survival-weighted cashflows of the static scheme, path by path.

    Returns ``(total, alive_flows, states)`` where ``alive_flows[:, n-1]`` is the
    discounted value realized at ``n`` conditional on being alive at ``n - 1``
    (death benefit weighted by ``1 - pi_n``) and ``states`` holds ``(A_{n-}, B_{n-})``.
    """
    N = spec.maturity
    n_paths = paths.int_r.shape[0]
    growth = _growth(market, spec.fee, paths)
    disc = paths.discount
    A = np.full(n_paths, spec.premium)
    B = np.full(n_paths, spec.premium)
    A_pre = np.empty((n_paths, N))
    B_pre = np.empty((n_paths, N))
    alive = 1.0
    flows = np.zeros((n_paths, N))
    for n in range(1, N + 1):
        A = A * growth[:, n - 1]
        A_pre[:, n - 1], B_pre[:, n - 1] = A, B
        p = pi[n - 1]
        death = ct.death_benefit(spec, n, A, B)
        if n < N:
            w = ct.static_withdrawal(spec, A, B)
            live = ct.withdrawal_cashflow(spec, n, w)
            A, B = ct.apply_event(spec, n, A, B, w, check=False)
        else:
            live = ct.terminal_cashflow(spec, A, B)
        flows[:, n - 1] = alive * disc[:, n - 1] * (p * live + (1 - p) * death)
        alive *= p
    return flows.sum(axis=1), flows, (A_pre, B_pre)


def price_static(market: MarketModel, spec: ct.ContractSpec, mortality: MortalityTable | None = None,
                 config: SimulationConfig = SimulationConfig(), start_age: int = 65) -> PriceEstimate:
    """Scheme S: withdraw ``min(G, max admissible)`` every year, no surrender."""
    spec = spec.with_terms(scheme="S")
    paths = simulate_paths(market, spec.maturity, config)
    pi = survival_vector(mortality or no_mortality(), start_age, spec.maturity)
    total, _, _ = static_cashflows(market, spec, paths, pi)
    if config.antithetic:
        half = (config.n_paths + 1) // 2
        pair = 0.5 * (total[:half] + total[half:2 * half]) if config.n_paths % 2 == 0 else total
        est = PriceEstimate.from_samples(pair)
        return PriceEstimate(est.mean, est.half_width_95, config.n_paths, est.std)
    return PriceEstimate.from_samples(total)


def _basis(A, B, r, payoff):
    # total degree 2 in (A, B, r) plus the surrender payoff
    cols = [np.ones_like(A), A, B, r, A * A, A * B, A * r, B * B, B * r, r * r, payoff]
    return np.column_stack(cols)


def price_lsm(market: MarketModel, spec: ct.ContractSpec, mortality: MortalityTable | None = None,
              config: SimulationConfig = SimulationConfig(), start_age: int = 65) -> PriceEstimate:
    """Scheme S+S by least-squares Monte Carlo (in-sample pathwise payoffs).

    Surrender at ``n`` in ``1..N-1`` happens before the withdrawal and is
    exercised when its payoff beats the regressed continuation value.
    """
    spec = spec.with_terms(scheme="S+S")
    N = spec.maturity
    paths = simulate_paths(market, N, config)
    pi = survival_vector(mortality or no_mortality(), start_age, N)
    growth = _growth(market, spec.fee, paths)
    n_paths = config.n_paths
    disc_step = np.exp(-paths.int_r)

    # forward pass of the static policy to get pre-event states
    A = np.full(n_paths, spec.premium)
    B = np.full(n_paths, spec.premium)
    A_pre = np.empty((n_paths, N + 1))
    B_pre = np.empty((n_paths, N + 1))
    for n in range(1, N + 1):
        A = A * growth[:, n - 1]
        A_pre[:, n], B_pre[:, n] = A, B
        if n < N:
            w = ct.static_withdrawal(spec, A, B)
            A, B = ct.apply_event(spec, n, A, B, w, check=False)

    # backward pass: V holds value at date n (given alive at n, before events)
    V = ct.terminal_cashflow(spec, A_pre[:, N], B_pre[:, N])
    for n in range(N - 1, 0, -1):
        p = pi[n]  # survival from n to n+1
        death = ct.death_benefit(spec, n + 1, A_pre[:, n + 1], B_pre[:, n + 1])
        cont_next = disc_step[:, n] * (p * V + (1 - p) * death)
        A_n, B_n = A_pre[:, n], B_pre[:, n]
        w = ct.static_withdrawal(spec, A_n, B_n)
        hold = ct.withdrawal_cashflow(spec, n, w) + cont_next
        XS = ct.surrender_cashflow(spec, n, A_n, B_n)
        X = _basis(A_n / spec.premium, B_n / spec.premium, paths.r[:, n - 1], XS / spec.premium)
        fitted = _regress(X, cont_next)
        exercise = XS > ct.withdrawal_cashflow(spec, n, w) + fitted
        V = np.where(exercise, XS, hold)
    p1 = pi[0]
    death1 = ct.death_benefit(spec, 1, A_pre[:, 1], B_pre[:, 1])
    total = disc_step[:, 0] * (p1 * V + (1 - p1) * death1)
    return PriceEstimate.from_samples(total)


def _regress(X, y):
    # B is deterministic without step-up, so some columns are collinear; the
    # minimum-norm least-squares solution still gives the orthogonal projection.
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        log.debug("LSM basis rank %d < %d", rank, X.shape[1])
    return X @ coef
