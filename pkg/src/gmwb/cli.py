"""Command-line front end.

    gmwb price     --config configs/scenario_2021.yaml --out out/
    gmwb sweep     --config ... --set sweep.axes.alpha=[0,5,10]
    gmwb policy    --config ... --set policy.date=5
    gmwb fair-fee  --config ...
    gmwb decompose --config ...
    gmwb validate  --config ...

Every command writes CSV files whose first lines are ``#`` comments carrying
the engine version and a hash of the effective configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, apply_axis
from .dp_engine import default_grid, value_contract, value_decomposition
from .fair_fee import solve_fair_fee
from .lattice import build_lattice
from .monte_carlo import SimulationConfig, price_lsm, price_static

log = logging.getLogger("gmwb")


# -- output helpers -------------------------------------------------------------
def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_csv(path: Path, header, rows, cfg: RunConfig, command: str) -> Path:
    buf = io.StringIO()
    buf.write(f"# engine=gmwb {__version__}\n")
    buf.write(f"# config_hash={cfg.config_hash}\n")
    buf.write(f"# command={command} name={cfg.name}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())
    return path


def read_csv(path) -> tuple[list, list]:
    """Inverse of :func:`write_csv`: ``(header, rows)`` with comment lines skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6f}"
    return v


def _scenario_label(cfg: RunConfig) -> str:
    return cfg.scenario.preset or "custom"


def _grid_for(cfg: RunConfig, spec):
    return cfg.account_grid(spec)


# -- commands -------------------------------------------------------------------
def cmd_price(cfg: RunConfig, out: Path, threads: int = 1):
    market, mort = cfg.market(), cfg.mortality.build()
    rows = []
    for scheme in cfg.contract.schemes:
        spec = cfg.spec(scheme)
        t0 = time.perf_counter()
        res = value_contract(market, spec, _grid_for(cfg, spec), cfg.grid.m, mort,
                             cfg.mortality.start_age, threads)
        log.info("%s %s: %.4f (%.2fs)", _scenario_label(cfg), scheme, res.value, time.perf_counter() - t0)
        rows.append([_scenario_label(cfg), scheme, spec.step_up, spec.bonus, 100 * spec.fee,
                     100 * spec.beta(1), res.value])
    write_csv(out / "price.csv", ["scenario", "scheme", "step_up", "bonus", "alpha_pct", "beta_pct", "value"],
              rows, cfg, "price")
    return rows


def _point_key(point: dict, scheme: str) -> str:
    return json.dumps({"point": point, "scheme": scheme}, sort_keys=True)


def cmd_sweep(cfg: RunConfig, out: Path, threads: int = 1):
    """Cartesian sweep; finished points are kept in ``sweep_progress.json`` so a rerun resumes."""
    axes = cfg.sweep.axes
    if not axes:
        raise ConfigError("sweep.axes is empty")
    names = list(axes)
    progress_path = out / "sweep_progress.json"
    done = {}
    if progress_path.exists():
        saved = json.loads(progress_path.read_text())
        if saved.get("config_hash") == cfg.config_hash:
            done = saved.get("done", {})
        else:
            log.warning("progress file belongs to another configuration; starting over")
    market0, mort = cfg.market(), cfg.mortality.build()
    rows = []
    for values in itertools.product(*(axes[n] for n in names)):
        point = dict(zip(names, values))
        for scheme in cfg.contract.schemes:
            key = _point_key(point, scheme)
            if key not in done:
                market, spec = market0, cfg.spec(scheme)
                for n, v in point.items():
                    market, spec = apply_axis(market, spec, n, float(v))
                done[key] = value_contract(market, spec, _grid_for(cfg, spec), cfg.grid.m, mort,
                                           cfg.mortality.start_age, threads).value
                atomic_write_text(progress_path, json.dumps({"config_hash": cfg.config_hash, "done": done}))
            rows.append(list(values) + [scheme, done[key]])
    write_csv(out / "sweep.csv", names + ["scheme", "value"], rows, cfg, "sweep")
    return rows


def central_levels(n_levels: int, k: int) -> list[int]:
    """Indices of the ``k`` central entries of an ascending array of length ``n_levels``."""
    k = min(k, n_levels)
    start = (n_levels - k + 1) // 2
    return list(range(start, start + k))


def _surface_rows(grid, mat):
    return [[b] + list(mat[:, j]) for j, b in enumerate(grid.b)]


def cmd_policy(cfg: RunConfig, out: Path, threads: int = 1):
    market, mort = cfg.market(), cfg.mortality.build()
    scheme = "D" if "D" in cfg.contract.schemes else cfg.contract.schemes[-1]
    spec = cfg.spec(scheme)
    t = int(cfg.policy.date)
    if not 1 <= t < spec.maturity:
        raise ConfigError(f"policy.date must be in 1..{spec.maturity - 1}, got {t}")
    grid = _grid_for(cfg, spec)
    res = value_contract(market, spec, grid, cfg.grid.m, mort, cfg.mortality.start_age, threads)
    rates = res.rates[t]
    index_rows = []
    for lev in central_levels(rates.size, cfg.policy.levels):
        r = float(rates[lev])
        tag = f"t{t}_r{100 * r:+.2f}".replace("+", "p").replace("-", "m").replace(".", "_")
        # rows b_j, columns a_i
        header = ["b"] + [f"a={a:g}" for a in grid.a]
        write_csv(out / f"policy_{tag}.csv", header, _surface_rows(grid, res.policy[t][lev]), cfg, "policy")
        write_csv(out / f"value_{tag}.csv", header, _surface_rows(grid, res.values[t][lev]), cfg, "policy")
        if spec.can_surrender(t):
            flags = res.surrender[t][lev].astype(int)
            write_csv(out / f"surrender_{tag}.csv", header, _surface_rows(grid, flags), cfg, "policy")
        index_rows.append([t, lev, 100 * r, f"policy_{tag}.csv"])
    write_csv(out / "policy_index.csv", ["date", "level", "rate_pct", "file"], index_rows, cfg, "policy")
    return index_rows


def cmd_fair_fee(cfg: RunConfig, out: Path, threads: int = 1):
    ff = cfg.fair_fee
    spec = cfg.spec(ff.scheme)
    res = solve_fair_fee(cfg.market(), spec, _grid_for(cfg, spec), tolerance=ff.tolerance,
                         bracket=(ff.lo_pct / 100, ff.hi_pct / 100), m=cfg.grid.m,
                         mortality=cfg.mortality.build(), start_age=cfg.mortality.start_age, threads=threads)
    alpha = "" if res.alpha_fair is None else 100 * res.alpha_fair
    rows = [[_scenario_label(cfg), ff.scheme, spec.step_up, 100 * spec.beta(1), alpha, res.achieved_value,
             res.iterations, int(res.sellable), res.message]]
    write_csv(out / "fair_fee.csv", ["scenario", "scheme", "step_up", "beta_pct", "alpha_pct", "value",
                                     "iterations", "sellable", "message"], rows, cfg, "fair-fee")
    if not res.sellable:
        log.warning(res.message)
    return rows


def cmd_decompose(cfg: RunConfig, out: Path, threads: int = 1):
    spec = cfg.spec("D")
    plain = spec.with_terms(step_up="none", bonus=0.0)
    su = spec.with_terms(step_up=cfg.decompose.step_up, bonus=0.0)
    d = value_decomposition(cfg.market(), spec, _grid_for(cfg, plain) if spec.step_up == "none" else None,
                            default_grid(su, n_a=cfg.decompose.n_a_stepup), cfg.grid.m,
                            cfg.mortality.build(), cfg.mortality.start_age, cfg.decompose.step_up, threads)
    rows = [[_scenario_label(cfg), d.cb, d.value_plain, d.value_stepup, d.time_value_pct, d.gmwb_pct,
             d.stepup_pct]]
    write_csv(out / "decompose.csv", ["scenario", "cb", "value_plain", "value_stepup", "time_value_pct",
                                      "gmwb_pct", "stepup_pct"], rows, cfg, "decompose")
    return rows


def cmd_validate(cfg: RunConfig, out: Path, threads: int = 1):
    market, mort = cfg.market(), cfg.mortality.build()
    mc = cfg.monte_carlo
    sim = SimulationConfig(mc.n_paths, mc.seed, mc.antithetic)
    rows = []
    for scheme, oracle in (("S", price_static), ("S+S", price_lsm)):
        spec = cfg.spec(scheme)
        dp = value_contract(market, spec, _grid_for(cfg, spec), cfg.grid.m, mort,
                            cfg.mortality.start_age, threads).value
        est = oracle(market, spec, mort, sim, cfg.mortality.start_age)
        rows.append([_scenario_label(cfg), scheme, oracle.__name__, dp, est.mean, est.half_width_95,
                     est.n_paths, mc.seed, int(est.contains(dp)), dp - est.mean])
    write_csv(out / "validate.csv", ["scenario", "scheme", "oracle", "dp_value", "mc_mean", "half_width_95",
                                     "n_paths", "seed", "inside_ci", "difference"], rows, cfg, "validate")
    return rows


def dump_lattice(cfg: RunConfig, out: Path) -> Path:
    market, spec = cfg.market(), cfg.spec("D")
    lat = build_lattice(market.curve, market.hw, spec.maturity, cfg.grid.m)
    rows = []
    for k, r in enumerate(lat.nodes):
        p = lat.up_prob[k] if k < len(lat.up_prob) else np.full(r.size, np.nan)
        rows.extend([k, k * lat.dt_step, j, r[j], p[j]] for j in range(r.size))
    return write_csv(out / "lattice.csv", ["step", "time", "level", "rate", "up_prob"], rows, cfg, "lattice")


COMMANDS = {
    "price": cmd_price,
    "sweep": cmd_sweep,
    "policy": cmd_policy,
    "fair-fee": cmd_fair_fee,
    "decompose": cmd_decompose,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (overrides monte_carlo.seed)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for the backward sweep")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, e.g. contract.fee_pct=13.51 (repeatable)")
    common.add_argument("--dump-lattice", action="store_true", help="also write lattice.csv")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="gmwb", description="GMWB valuation on a Hull-White lattice")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"monte_carlo.seed={args.seed}")
    cfg = cfg.with_overrides(overrides)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if args.dump_lattice:
            dump_lattice(cfg, args.out)
        rows = COMMANDS[args.command](cfg, args.out, max(1, args.threads))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for row in rows:
        print(",".join(str(_fmt(v)) for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
