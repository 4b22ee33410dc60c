"""Management fee that prices the contract at par, by bisection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import contract as ct
from .dp_engine import AccountGrid, LatticeValuer, default_grid
from .lattice import build_lattice
from .market import MarketModel
from .mortality import MortalityTable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FairFeeResult:
    alpha_fair: float | None
    achieved_value: float
    iterations: int
    bracket: tuple
    sellable: bool = True
    message: str = ""


def solve_fair_fee(market: MarketModel, spec_template: ct.ContractSpec, grid: AccountGrid | None = None,
                   scheme: str | None = None, tolerance: float = 0.01, bracket=(0.0, 0.60), m: int = 2,
                   mortality: MortalityTable | None = None, start_age: int = 65, threads: int = 1,
                   max_iter: int = 60) -> FairFeeResult:
    """Bisect on the fee until ``|V0(alpha) - P| <= tolerance``.

    Assumes ``V0`` is nonincreasing in ``alpha``. If even ``alpha = lo`` leaves the
    contract below par (or ``alpha = hi`` still above it) the result is flagged
    ``sellable=False`` instead of raising.
    """
    spec = spec_template if scheme is None else spec_template.with_terms(scheme=scheme)
    grid = grid or default_grid(spec)
    lattice = build_lattice(market.curve, market.hw, spec.maturity, m)
    P = spec.premium

    def value(alpha: float) -> float:
        s = spec.with_terms(fee=alpha)
        return LatticeValuer(market, s, grid, m, mortality, start_age, threads, lattice).run().value

    lo, hi = bracket
    v_lo, v_hi = value(lo), value(hi)
    if v_lo < P - tolerance:
        return FairFeeResult(None, v_lo, 0, (lo, hi), False,
                             f"unsellable at par: value {v_lo:.4f} < {P} already at alpha={lo}")
    if v_hi > P + tolerance:
        return FairFeeResult(None, v_hi, 0, (lo, hi), False,
                             f"unsellable at par: value {v_hi:.4f} > {P} even at alpha={hi}")
    if abs(v_lo - P) <= tolerance:
        return FairFeeResult(lo, v_lo, 0, (lo, hi))
    if abs(v_hi - P) <= tolerance:
        return FairFeeResult(hi, v_hi, 0, (lo, hi))

    prev = v_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        v = value(mid)
        log.debug("fair fee iteration %d: alpha=%.6f value=%.6f", it, mid, v)
        if v > prev + 1e-9 and mid > lo:
            log.warning("value not monotone in alpha near %.6f", mid)
        if abs(v - P) <= tolerance:
            return FairFeeResult(mid, v, it, (lo, hi))
        if v > P:
            lo, prev = mid, v
        else:
            hi = mid
    return FairFeeResult(mid, v, max_iter, (lo, hi), abs(v - P) <= tolerance,
                         "iteration limit reached")
