"""Lattice and grid refinement for the benchmark static contract, against the exact-transition MC oracle.

    python3 scripts/convergence.py [--scenario 2021] [--paths 400000]
"""

import argparse
import logging

from gmwb.contract import ContractSpec
from gmwb.dp_engine import AccountGrid, value_contract
from gmwb.market import scenario_2021, scenario_2022
from gmwb.monte_carlo import SimulationConfig, price_static
from gmwb.mortality import ssa_male

BENCH = {"2021": (scenario_2021, 0.1351, 0.15), "2022": (scenario_2022, 0.006270, 0.10)}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scenario", choices=sorted(BENCH), default="2021")
    p.add_argument("--paths", type=int, default=400_000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()
    logging.basicConfig(level=logging.ERROR)

    make, fee, beta = BENCH[args.scenario]
    mk, ssa = make(), ssa_male()
    spec = ContractSpec(fee=fee, penalties=(beta,), scheme="S")
    est = price_static(mk, spec, ssa, SimulationConfig(args.paths, seed=args.seed, antithetic=True))
    print(f"MC oracle: {est.mean:.4f} +- {est.half_width_95:.4f} ({args.paths} paths)")

    print("\nm refinement (A on [0, 300] with 30 intervals, B with 10)")
    for m in (1, 2, 4, 8):
        v = value_contract(mk, spec, AccountGrid.from_bounds(300, 30, 100, 10), m, ssa).value
        print(f"  m={m:<3d} {v:.4f}  diff {v - est.mean:+.4f}")

    print("\ngrid refinement at m=4")
    for n_a, n_b in ((30, 10), (60, 20), (120, 40)):
        v = value_contract(mk, spec, AccountGrid.from_bounds(300, n_a, 100, n_b), 4, ssa, threads=4).value
        print(f"  n_a={n_a:<4d} n_b={n_b:<3d} {v:.4f}  diff {v - est.mean:+.4f}")


if __name__ == "__main__":
    main()
