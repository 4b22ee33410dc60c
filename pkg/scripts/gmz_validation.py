"""Validation set (flat 5% curve, a = 1, sigma_r = 20%): lattice values against an MC oracle, by m.

    python3 scripts/gmz_validation.py [--paths 100000]
"""

import argparse
import logging

import numpy as np

from gmwb.contract import ContractSpec
from gmwb.dp_engine import AccountGrid, value_contract
from gmwb.lattice import build_lattice
from gmwb.market import scenario_gmz
from gmwb.monte_carlo import SimulationConfig, price_static
from gmwb.yield_curve import market_discount

def lattice_bond(lat, T):
    """Zero-coupon bond maturing at ``T`` by backward induction over the anniversary paths."""
    v = np.ones(lat.rates_at_date(T).size)
    for n in range(T, 0, -1):
        pt = lat.paths(n)
        v = np.sum(pt.prob * np.exp(-pt.avg_rate) * v[pt.terminal_level], axis=1)
    return float(v[0])


CASES = [(5, 0.01915, 100.22), (10, 0.00795, 100.34), (20, 0.00248, 100.35)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=100_000)
    args = p.parse_args()
    logging.basicConfig(level=logging.ERROR)
    mk = scenario_gmz()
    for T, fee, target in CASES:
        spec = ContractSpec(maturity=T, fee=fee, penalties=(0.0,), scheme="S", surrender_allowed=False)
        grid = AccountGrid.from_bounds(300, 30, 100, 20 if T == 20 else 10)
        est = price_static(mk, spec, None, SimulationConfig(args.paths, seed=T, antithetic=True))
        print(f"T={T}: target {target}, MC {est.mean:.3f} +- {est.half_width_95:.3f}")
        for m in (2, 4, 8):
            v = value_contract(mk, spec, grid, m).value
            lat = build_lattice(mk.curve, mk.hw, T, m)
            ratio = lattice_bond(lat, T) / float(market_discount(mk.curve, T))
            print(f"  m={m}: {v:.3f}   lattice/market bond ratio at T: {ratio:.4f}")


if __name__ == "__main__":
    main()
