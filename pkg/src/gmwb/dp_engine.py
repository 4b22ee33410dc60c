"""Backward induction on the rate lattice x (A, B) grid.

At every anniversary ``n`` and lattice level the value function is a matrix
over the grid ``a_i = i dA`` (rows) and ``b_j = j dB`` (columns).  One step
back from ``n`` to ``n - 1`` works as follows, for each start level:

* for each of the ``2**m`` lattice paths, the post-event investment account
  ``x = (a_i - w)^+`` (a multiple of ``min(dA, dB)``) is mapped to a distribution over
  the ``a``-buckets at ``n`` with the conditional lognormal law of the fund;
* the matrix ``C[x, B'] = sum_k q_k disc_k T_k @ (pi_n V_n^k + (1 - pi_n) X^D_n)``
  is the discounted expected value, given survival or death, of post-event
  state ``(x, B')``;
* each cell then picks the withdrawal maximizing ``X(w) + C[x(w), B'(w)]``
  and, where allowed, compares with surrender.

Post-event states always land on the grid because of the load-time grid
constraints; the only clamp is ``B'`` at the top of the ``B`` grid.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import contract as ct
from .joint_law import bucket_probabilities, conditional_moments, log_growth_mean
from .lattice import RateLattice, build_lattice
from .market import MarketModel
from .mortality import MortalityTable, no_mortality, survival_vector
from .yield_curve import market_discount

log = logging.getLogger(__name__)


class GridError(ValueError):
    pass


def _is_multiple(x: float, d: float) -> bool:
    k = x / d
    return abs(k - round(k)) < 1e-9


@dataclass(frozen=True)
class AccountGrid:
    n_a: int
    n_b: int
    delta_a: float
    delta_b: float

    @classmethod
    def from_bounds(cls, a_max: float, n_a: int, b_max: float, n_b: int) -> "AccountGrid":
        """Grid with ``n_a`` intervals on ``[0, a_max]`` and ``n_b`` on ``[0, b_max]``."""
        return cls(n_a, n_b, a_max / n_a, b_max / n_b)

    @property
    def a_max(self) -> float:
        return self.n_a * self.delta_a

    @property
    def b_max(self) -> float:
        return self.n_b * self.delta_b

    @property
    def x_step(self) -> float:
        """Spacing of post-withdrawal investment values ``a_i - w``."""
        return min(self.delta_a, self.delta_b)

    @property
    def a(self) -> np.ndarray:
        return np.arange(self.n_a + 1) * self.delta_a

    @property
    def b(self) -> np.ndarray:
        return np.arange(self.n_b + 1) * self.delta_b

    def validate(self, spec: ct.ContractSpec) -> None:
        problems = []
        if self.n_a < 1 or self.n_b < 1:
            problems.append("n_a and n_b must be >= 1")
        if not (_is_multiple(self.delta_a, self.delta_b) or _is_multiple(self.delta_b, self.delta_a)):
            problems.append(f"delta_a={self.delta_a} and delta_b={self.delta_b} are not commensurate")
        if not _is_multiple(spec.G, self.delta_b):
            problems.append(f"guarantee G={spec.G} is not a multiple of delta_b={self.delta_b}")
        if not _is_multiple(spec.premium, self.delta_b):
            problems.append(f"premium {spec.premium} is not a multiple of delta_b={self.delta_b}")
        if spec.premium > self.a_max + 1e-9 or spec.premium > self.b_max + 1e-9:
            problems.append("premium must lie inside the grid (a_max, b_max)")
        if spec.step_up != "none" or spec.bonus > 0:
            if abs(self.delta_a - self.delta_b) > 1e-12:
                problems.append("step-up/bonus require delta_a == delta_b")
        if spec.step_up != "none" and self.a_max > self.b_max + 1e-9:
            problems.append("step-up requires a_max <= b_max")
        if spec.bonus > 0 and not _is_multiple(spec.bonus, self.delta_b):
            problems.append(f"bonus {spec.bonus} is not a multiple of delta_b={self.delta_b}")
        if problems:
            raise GridError("; ".join(problems))


def default_grid(spec: ct.ContractSpec, n_a: int = 30, n_b: int | None = None,
                 a_max: float | None = None) -> AccountGrid:
    """Benchmark grids: ``A in [0, 3P]``; ``B in [0, P]`` without step-up, ``B = A`` grid with it."""
    P = spec.premium
    a_max = 3 * P if a_max is None else a_max
    if spec.step_up == "none" and spec.bonus == 0:
        n_b = spec.maturity if n_b is None else n_b
        return AccountGrid.from_bounds(a_max, n_a, P, n_b)
    n_b = n_a if n_b is None else n_b
    return AccountGrid.from_bounds(a_max, n_a, a_max, n_b)


@dataclass
class DPResult:
    value: float
    values: list = field(repr=False)      # values[n]: (levels, n_a+1, n_b+1), n = 1..N (index 0 unused)
    policy: list = field(repr=False)      # optimal withdrawal per cell, n = 1..N-1
    surrender: list = field(repr=False)   # surrender flag per cell, n = 1..N-1
    rates: list = field(repr=False)       # lattice rates at each date
    grid: AccountGrid = None
    spec: ct.ContractSpec = None


class LatticeValuer:
    """Precomputed lattice, joint-law moments and index maps for one valuation."""

    def __init__(self, market: MarketModel, spec: ct.ContractSpec, grid: AccountGrid, m: int = 2,
                 mortality: MortalityTable | None = None, start_age: int = 65, threads: int = 1,
                 lattice: RateLattice | None = None):
        grid.validate(spec)
        self.market, self.spec, self.grid, self.m = market, spec, grid, m
        self.threads = max(1, int(threads))
        N = spec.maturity
        self.N = N
        self.lattice = lattice or build_lattice(market.curve, market.hw, N, m)
        self.pi = survival_vector(mortality or no_mortality(), start_age, N)
        self.laws = [None] + [conditional_moments(market.curve, market.hw, market.rho, n) for n in range(1, N + 1)]
        ga, gb = grid.a, grid.b
        self.x_step = grid.x_step
        self.n_x = int(round(grid.a_max / self.x_step)) + 1
        self.x = np.arange(self.n_x) * self.x_step
        self._build_decisions(ga, gb)

    # -- decision sets --------------------------------------------------------
    def _build_decisions(self, ga, gb):
        spec, grid = self.spec, self.grid
        A, B = np.meshgrid(ga, gb, indexing="ij")
        if spec.scheme in ("S", "S+S"):
            W = ct.static_withdrawal(spec, A, B)[..., None]
            mask = np.ones(W.shape, dtype=bool)
        else:
            wmax = ct.max_withdrawal(spec, A, B)
            n_w = int(round(wmax.max() / grid.delta_b)) + 1
            W = np.arange(n_w) * grid.delta_b
            W = np.broadcast_to(W, A.shape + (n_w,)).copy()
            mask = W <= wmax[..., None] + 1e-9
            W = np.where(mask, W, 0.0)
        A_post, B_post = ct.apply_event(spec, 1, A[..., None], B[..., None], W, check=False)
        B_post = np.minimum(B_post, grid.b_max)
        self.W, self.w_mask = W, mask
        self.x_idx = np.rint(A_post / self.x_step).astype(int)
        self.b_idx = np.rint(B_post / grid.delta_b).astype(int)
        if not (np.allclose(self.x_idx * self.x_step, A_post) and np.allclose(self.b_idx * grid.delta_b, B_post)):
            raise GridError("post-event states fall off the grid")
        self.A, self.B = A, B

    # -- expectations ---------------------------------------------------------
    def transition(self, n: int, levels=None):
        """Bucket probabilities ``T[level, path, x, h]`` and path weights ``q_k disc_k``."""
        mk, spec = self.market, self.spec
        paths = self.lattice.paths(n)
        sel = slice(None) if levels is None else levels
        prob, avg, term = paths.prob[sel], paths.avg_rate[sel], paths.terminal_level[sel]
        law = self.laws[n]
        r_prev = self.lattice.rates_at_date(n - 1)[sel][:, None]
        r_n = self.lattice.rates_at_date(n)[term]
        int_r = avg  # unit year between anniversaries
        mu1, mu2 = law.means(r_prev)
        c = law.projection
        mu_t = c[0] * (int_r - mu1) + c[1] * (r_n - mu2)
        lm = log_growth_mean(int_r, mu_t, spec.fee, mk.q, mk.sigma_s)
        sd = mk.sigma_s * np.sqrt(law.sigma_tilde2)
        T = bucket_probabilities(lm[..., None], sd, self.x, self.grid.delta_a, self.grid.n_a)
        return T, prob * np.exp(-int_r), term

    def continuation_matrix(self, n: int, V_next: np.ndarray, levels=None) -> np.ndarray:
        """``C[level, x, B']`` at date ``n - 1`` from the date-``n`` surface."""
        pi = self.pi[n - 1]
        ga, gb = self.grid.a, self.grid.b
        XD = ct.death_benefit(self.spec, n, ga[:, None], gb[None, :])
        T, weight, term = self.transition(n, levels)
        payoff = pi * V_next[term] + (1.0 - pi) * XD     # (L, P, n_a+1, n_b+1)
        M = T @ payoff                                    # (L, P, n_x, n_b+1)
        return np.einsum("lk,lkxb->lxb", weight, M)

    def _decide(self, n: int, C: np.ndarray):
        spec = self.spec
        J = C[:, self.x_idx, self.b_idx]                  # (L, n_a+1, n_b+1, n_w)
        total = ct.withdrawal_cashflow(spec, n, self.W) + J
        total = np.where(self.w_mask, total, -np.inf)
        k = np.argmax(total, axis=-1)
        best = np.take_along_axis(total, k[..., None], axis=-1)[..., 0]
        w_star = np.take_along_axis(np.broadcast_to(self.W, total.shape), k[..., None], axis=-1)[..., 0]
        if spec.can_surrender(n):
            XS = ct.surrender_cashflow(spec, n, self.A, self.B)
            surr = XS > best
            best = np.where(surr, XS, best)
        else:
            surr = np.zeros(best.shape, dtype=bool)
        return best, w_star, surr

    def step(self, n: int, V_next: np.ndarray):
        """Surface, policy and surrender flags at date ``n - 1 >= 1``."""
        L = self.lattice.rates_at_date(n - 1).size
        if self.threads == 1 or L < 2:
            return self._decide(n - 1, self.continuation_matrix(n, V_next))
        chunks = np.array_split(np.arange(L), min(self.threads, L))

        def work(idx):
            return self._decide(n - 1, self.continuation_matrix(n, V_next, idx))

        with ThreadPoolExecutor(self.threads) as ex:
            parts = list(ex.map(work, chunks))
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))

    def terminal(self) -> np.ndarray:
        ga, gb = self.grid.a, self.grid.b
        VN = ct.terminal_cashflow(self.spec, ga[:, None], gb[None, :])
        L = self.lattice.rates_at_date(self.N).size
        return np.broadcast_to(VN, (L,) + VN.shape).copy()

    def run(self) -> DPResult:
        N = self.N
        values = [None] * (N + 1)
        policy = [None] * N
        surrender = [None] * N
        values[N] = self.terminal()
        for n in range(N, 1, -1):
            values[n - 1], policy[n - 1], surrender[n - 1] = self.step(n, values[n])
        C0 = self.continuation_matrix(1, values[1])
        P = self.spec.premium
        v0 = float(C0[0, int(round(P / self.grid.delta_b)), int(round(P / self.grid.delta_b))])
        rates = [self.lattice.rates_at_date(n) for n in range(N + 1)]
        return DPResult(v0, values, policy, surrender, rates, self.grid, self.spec)


def value_terminal(spec: ct.ContractSpec, grid: AccountGrid) -> np.ndarray:
    return ct.terminal_cashflow(spec, grid.a[:, None], grid.b[None, :])


def value_contract(market: MarketModel, spec: ct.ContractSpec, grid: AccountGrid | None = None,
                   m: int = 2, mortality: MortalityTable | None = None, start_age: int = 65,
                   threads: int = 1) -> DPResult:
    """Full backward sweep; ``spec.scheme`` selects S, S+S or D."""
    grid = grid or default_grid(spec)
    return LatticeValuer(market, spec, grid, m, mortality, start_age, threads).run()


def optimal_withdrawal(result: DPResult, n: int, level: int, i: int, j: int):
    """``(w*, value, surrendered)`` at date ``n`` for cell ``(a_i, b_j)``."""
    if n == result.spec.maturity:
        b = result.grid.b[j]
        return min(b, result.spec.G), float(result.values[n][level, i, j]), False
    return (float(result.policy[n][level, i, j]), float(result.values[n][level, i, j]),
            bool(result.surrender[n][level, i, j]))


@dataclass(frozen=True)
class Decomposition:
    cb: float
    value_stepup: float
    value_plain: float
    time_value_pct: float
    gmwb_pct: float
    stepup_pct: float


def coupon_bond_value(market: MarketModel, spec: ct.ContractSpec) -> float:
    """Present value of ``G`` paid at every anniversary."""
    n = np.arange(1, spec.maturity + 1)
    return float(np.sum(market_discount(market.curve, n)) * spec.G)


def value_decomposition(market: MarketModel, spec: ct.ContractSpec, grid_plain=None, grid_stepup=None,
                        m: int = 2, mortality=None, start_age: int = 65, step_up: str = "SU_W",
                        threads: int = 1) -> Decomposition:
    """Split the step-up D value into time value, GMWB value and step-up value."""
    plain = spec.with_terms(step_up="none", scheme="D", bonus=0.0)
    su = spec.with_terms(step_up=step_up, scheme="D", bonus=0.0)
    v_plain = value_contract(market, plain, grid_plain or default_grid(plain), m, mortality, start_age, threads).value
    v_su = value_contract(market, su, grid_stepup or default_grid(su), m, mortality, start_age, threads).value
    cb = coupon_bond_value(market, spec)
    return Decomposition(cb, v_su, v_plain, 100 * cb / v_su, 100 * (v_plain - cb) / v_su,
                         100 * (v_su - v_plain) / v_su)
