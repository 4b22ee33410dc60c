"""Recompute the benchmark tables and write one CSV per table, with target values alongside.

    python3 scripts/reproduce_tables.py --out results/ [--only stability calibration ...] [--threads 4]
"""

import argparse
import csv
import itertools
import logging
import time
from pathlib import Path

from gmwb.contract import ContractSpec
from gmwb.dp_engine import AccountGrid, default_grid, value_contract, value_decomposition
from gmwb.fair_fee import solve_fair_fee
from gmwb.market import scenario_2021, scenario_2022, scenario_gmz
from gmwb.monte_carlo import SimulationConfig, price_lsm, price_static
from gmwb.mortality import ssa_male

MARKETS = {"2021": scenario_2021, "2022": scenario_2022}
BENCH = {"2021": (0.1351, 0.15), "2022": (0.006270, 0.10)}
SSA = ssa_male()


def write(out: Path, name: str, header, rows):
    path = out / f"{name}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"\n{name}  ->  {path}")
    for r in rows:
        print("  " + "  ".join(f"{x:.4f}" if isinstance(x, float) else str(x) for x in r))


def bench_spec(scenario, **kw):
    fee, beta = BENCH[scenario]
    kw.setdefault("fee", fee)
    return ContractSpec(penalties=(kw.pop("beta", beta),), **kw)


def validation(out, threads):
    rows = []
    cases = [(5, 0.01915, 100.22, 0.02783, 99.72), (10, 0.00795, 100.34, 0.01582, 99.75),
             (20, 0.00248, 100.35, 0.00829, 99.49)]
    for T, fs, ts, fd, td in cases:
        grid = AccountGrid.from_bounds(300, 30, 100, 20 if T == 20 else 10)
        for scheme, fee, beta, target in (("S", fs, 0.0, ts), ("D", fd, 0.10, td)):
            spec = ContractSpec(maturity=T, fee=fee, penalties=(beta,), scheme=scheme, surrender_allowed=False)
            v = value_contract(scenario_gmz(), spec, grid, 2, threads=threads).value
            rows.append([T, scheme, 100 * fee, v, target])
    write(out, "validation", ["T", "scheme", "alpha_pct", "value", "target"], rows)


def lsm(out, threads):
    rows = []
    for T, su in itertools.product((5, 10, 20), ("none", "SU_W")):
        spec = bench_spec("2021", maturity=T, step_up=su, scheme="S+S")
        nb = 20 if T == 20 else 10
        n = int(300 / (100 / nb))
        grid = AccountGrid.from_bounds(300, 30, 100, nb) if su == "none" else AccountGrid.from_bounds(300, n, 300, n)
        v = value_contract(scenario_2021(), spec, grid, 2, SSA, threads=threads).value
        est = price_lsm(scenario_2021(), spec, SSA, SimulationConfig(100_000, seed=12345))
        rows.append([T, su, v, est.mean, est.half_width_95, v - est.mean])
    write(out, "lsm", ["T", "step_up", "dp_ss", "lsm_mean", "lsm_half_width", "difference"], rows)


def stability(out, threads):
    rows = []
    spec = bench_spec("2021", step_up="SU_W", scheme="D")
    for (a_max, n), m in itertools.product([(200, 20), (200, 40), (300, 30), (300, 60), (400, 40)], (2, 3, 4)):
        g = AccountGrid.from_bounds(a_max, n, a_max, n)
        rows.append([a_max, n, m, value_contract(scenario_2021(), spec, g, m, SSA, threads=threads).value])
    write(out, "stability", ["a_max", "n_intervals", "m", "value"], rows)


def calibration(out, threads):
    rows = []
    targets = {"2021": (13.51, (99.13, 99.32, 100.00)), "2022": (0.6270, (97.48, 98.09, 100.00))}
    for s, (alpha_t, triple) in targets.items():
        res = solve_fair_fee(MARKETS[s](), bench_spec(s, scheme="D"), mortality=SSA, bracket=(0.0, 0.30),
                             threads=threads)
        alpha = "" if res.alpha_fair is None else 100 * res.alpha_fair
        for scheme, t in zip(("S", "S+S", "D"), triple):
            v = value_contract(MARKETS[s](), bench_spec(s, scheme=scheme), m=2, mortality=SSA, threads=threads).value
            rows.append([s, scheme, alpha, alpha_t, v, t])
    write(out, "calibration", ["scenario", "scheme", "fair_alpha_pct", "target_alpha_pct",
                               "value_at_target_alpha", "target_value"], rows)


def decomposition(out, threads):
    rows = []
    targets = {"2021": (99.91, 97.38, 0.09, 2.53), "2022": (86.10, 78.44, 12.60, 8.96)}
    for s, t in targets.items():
        d = value_decomposition(MARKETS[s](), bench_spec(s), mortality=SSA, threads=threads)
        rows.append([s, d.cb, d.time_value_pct, d.gmwb_pct, d.stepup_pct, *t])
    write(out, "decomposition", ["scenario", "cb", "time_value_pct", "gmwb_pct", "stepup_pct",
                                 "target_cb", "target_time", "target_gmwb", "target_stepup"], rows)


def bonus(out, threads):
    rows = []
    targets = {"2021": (0.1351, (100.00, 102.60, 112.55)), "2022": (0.006720, (100.00, 107.54, 114.98))}
    g = AccountGrid.from_bounds(200, 80, 200, 80)
    for s, (fee, triple) in targets.items():
        for (su, b), t in zip((("none", 0.0), ("SU_W", 0.0), ("SU_W", 2.5)), triple):
            spec = bench_spec(s, fee=fee, step_up=su, bonus=b, scheme="D")
            rows.append([s, su, b, value_contract(MARKETS[s](), spec, g, 2, SSA, threads=threads).value, t])
    write(out, "bonus", ["scenario", "step_up", "bonus", "value", "target"], rows)


def sensitivity(out, threads):
    rows = []
    for s, su in itertools.product(("2021", "2022"), ("none", "SU_W")):
        for sig_s, sig_r in itertools.product((0.10, 0.15, 0.20, 0.25, 0.30), (0.01, 0.015, 0.02, 0.025, 0.03)):
            mk = MARKETS[s]().with_params(sigma_s=sig_s, sigma_r=sig_r)
            vals = []
            for scheme in ("S", "D"):
                spec = bench_spec(s, step_up=su, scheme=scheme)
                vals.append(value_contract(mk, spec, default_grid(spec), 2, SSA, threads=threads).value)
            mc = price_static(mk, bench_spec(s, step_up=su, scheme="S"), SSA, SimulationConfig(10_000, seed=2021))
            rows.append([s, su, sig_s, sig_r, mk.rho, *vals, mc.mean, mc.half_width_95])
        for rho, sig_r in itertools.product((-0.9, -0.5, 0.0, 0.5, 0.9), (0.01, 0.015, 0.02, 0.025, 0.03)):
            mk = MARKETS[s]().with_params(rho=rho, sigma_r=sig_r)
            vals = [value_contract(mk, bench_spec(s, step_up=su, scheme=k), m=2, mortality=SSA,
                                   threads=threads).value for k in ("S", "D")]
            rows.append([s, su, 0.20, sig_r, rho, *vals, "", ""])
    write(out, "sensitivity", ["scenario", "step_up", "sigma_s", "sigma_r", "rho", "value_s", "value_d",
                               "mc_s_mean", "mc_s_half_width"], rows)


TABLES = {"validation": validation, "lsm": lsm, "stability": stability, "calibration": calibration,
          "decomposition": decomposition, "bonus": bonus, "sensitivity": sensitivity}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--only", nargs="*", choices=sorted(TABLES), default=None)
    p.add_argument("--threads", type=int, default=4)
    args = p.parse_args()
    logging.basicConfig(level=logging.ERROR)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.only or TABLES:
        t0 = time.perf_counter()
        TABLES[name](args.out, args.threads)
        print(f"  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
