"""Run configuration: YAML file -> dataclasses -> model objects.

Rates, volatilities, fees and penalties are written in percent with a
``_pct`` suffix.  A ``scenario.preset`` names one of the bundled markets;
any explicit scenario field overrides the preset value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from . import contract as ct
from .dp_engine import AccountGrid, GridError, default_grid
from .market import SCENARIOS, MarketModel
from .mortality import MortalityTable, load_table, no_mortality, ssa_male
from .yield_curve import HullWhiteParams, SvenssonCurve


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    preset: str | None = "scenario_2021"
    beta0_pct: float | None = None
    beta1_pct: float | None = None
    beta2_pct: float | None = None
    beta3_pct: float | None = None
    tau1: float | None = None
    tau2: float | None = None
    a: float | None = None
    sigma_r_pct: float | None = None
    r0_pct: float | None = None
    sigma_s_pct: float | None = None
    q_pct: float | None = None
    rho_pct: float | None = None
    s0: float | None = None

    def build(self) -> MarketModel:
        if self.preset is not None:
            if self.preset not in SCENARIOS:
                raise ConfigError(f"scenario.preset: unknown preset {self.preset!r}; "
                                  f"choose from {sorted(SCENARIOS)}")
            base = SCENARIOS[self.preset]()
        else:
            missing = [f.name for f in fields(self) if f.name not in ("preset", "s0")
                       and getattr(self, f.name) is None]
            if missing:
                raise ConfigError("scenario: without a preset these fields are required: " + ", ".join(missing))
            base = None
        c = base.curve if base else None
        pct = {k: getattr(self, k) for k in ("beta0_pct", "beta1_pct", "beta2_pct", "beta3_pct")}
        if any(v is not None for v in pct.values()) or self.tau1 is not None or self.tau2 is not None:
            # curve fields not given fall back on the preset curve
            def pick(name, cur):
                v = pct[name]
                return cur if v is None else v / 100
            curve = SvenssonCurve(pick("beta0_pct", c.beta0 if c else None),
                                  pick("beta1_pct", c.beta1 if c else None),
                                  pick("beta2_pct", c.beta2 if c else None),
                                  pick("beta3_pct", c.beta3 if c else None),
                                  self.tau1 if self.tau1 is not None else c.tau1,
                                  self.tau2 if self.tau2 is not None else c.tau2)
        else:
            curve = c
        hw0 = base.hw if base else None
        try:
            hw = HullWhiteParams(
                a=self.a if self.a is not None else hw0.a,
                sigma_r=self.sigma_r_pct / 100 if self.sigma_r_pct is not None else hw0.sigma_r,
                r0=self.r0_pct / 100 if self.r0_pct is not None else hw0.r0)
            return MarketModel(
                curve, hw,
                sigma_s=self.sigma_s_pct / 100 if self.sigma_s_pct is not None else base.sigma_s,
                q=self.q_pct / 100 if self.q_pct is not None else base.q,
                rho=self.rho_pct / 100 if self.rho_pct is not None else base.rho,
                s0=self.s0 if self.s0 is not None else (base.s0 if base else 100.0))
        except ValueError as exc:
            raise ConfigError(f"scenario: {exc}") from exc


@dataclass
class ContractConfig:
    premium: float = 100.0
    maturity: int = 10
    fee_pct: float = 0.0
    penalty_pct: float | list = 0.0
    guarantee: float | None = None
    bonus: float = 0.0
    step_up: str = "none"
    schemes: list = field(default_factory=lambda: ["S", "S+S", "D"])
    surrender_allowed: bool = True

    def build(self, scheme: str = "D") -> ct.ContractSpec:
        pen = self.penalty_pct if isinstance(self.penalty_pct, list) else [self.penalty_pct]
        try:
            return ct.ContractSpec(premium=self.premium, maturity=int(self.maturity),
                                   fee=self.fee_pct / 100, penalties=tuple(p / 100 for p in pen),
                                   guarantee=self.guarantee, bonus=self.bonus, step_up=self.step_up,
                                   scheme=scheme, surrender_allowed=self.surrender_allowed)
        except ValueError as exc:
            raise ConfigError(f"contract: {exc}") from exc


@dataclass
class GridConfig:
    m: int = 2
    n_a: int = 30
    n_b: int | None = None
    a_max: float | None = None
    b_max: float | None = None

    def build(self, spec: ct.ContractSpec) -> AccountGrid:
        if self.b_max is None:
            grid = default_grid(spec, self.n_a, self.n_b, self.a_max)
        else:
            a_max = self.a_max if self.a_max is not None else 3 * spec.premium
            grid = AccountGrid.from_bounds(a_max, self.n_a, self.b_max, self.n_b or self.n_a)
        try:
            grid.validate(spec)
        except GridError as exc:
            raise ConfigError(f"grid (n_a={grid.n_a}, n_b={grid.n_b}, a_max={grid.a_max:g}, "
                              f"b_max={grid.b_max:g}): {exc}") from exc
        return grid


@dataclass
class MortalityConfig:
    table: str = "ssa_male"      # "ssa_male", "none" or a CSV path
    start_age: int = 65

    def build(self) -> MortalityTable:
        if self.table == "none":
            return no_mortality()
        if self.table == "ssa_male":
            return ssa_male()
        path = Path(self.table)
        if not path.exists():
            raise ConfigError(f"mortality.table: file not found: {path}")
        return load_table(path)


@dataclass
class MonteCarloConfig:
    n_paths: int = 100_000
    seed: int = 12345
    antithetic: bool = True


@dataclass
class FairFeeConfig:
    tolerance: float = 0.01
    lo_pct: float = 0.0
    hi_pct: float = 60.0
    scheme: str = "D"


@dataclass
class SweepConfig:
    axes: dict = field(default_factory=dict)   # axis -> values; percent for all but "a"


@dataclass
class PolicyConfig:
    date: int = 5
    levels: int = 3


@dataclass
class DecomposeConfig:
    step_up: str = "SU_W"
    n_a_stepup: int = 30


SWEEP_AXES = ("alpha", "beta", "sigma_S", "sigma_r", "rho", "a")

_SECTIONS = {
    "scenario": ScenarioConfig, "contract": ContractConfig, "grid": GridConfig,
    "mortality": MortalityConfig, "monte_carlo": MonteCarloConfig, "fair_fee": FairFeeConfig,
    "sweep": SweepConfig, "policy": PolicyConfig, "decompose": DecomposeConfig,
}


@dataclass
class RunConfig:
    name: str = "run"
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    contract: ContractConfig = field(default_factory=ContractConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    mortality: MortalityConfig = field(default_factory=MortalityConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    fair_fee: FairFeeConfig = field(default_factory=FairFeeConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    decompose: DecomposeConfig = field(default_factory=DecomposeConfig)

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict | None) -> "RunConfig":
        data = dict(data or {})
        kw = {}
        if "name" in data:
            kw["name"] = str(data.pop("name"))
        for key, typ in _SECTIONS.items():
            block = data.pop(key, None) or {}
            if not isinstance(block, dict):
                raise ConfigError(f"{key}: expected a mapping")
            known = {f.name for f in fields(typ)}
            unknown = set(block) - known
            if unknown:
                raise ConfigError(f"{key}: unknown field(s) {sorted(unknown)}")
            kw[key] = typ(**block)
        if data:
            raise ConfigError(f"unknown top-level block(s) {sorted(data)}")
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def with_overrides(self, pairs) -> "RunConfig":
        """Apply ``section.field=value`` strings; values are parsed as YAML scalars."""
        data = self.to_dict()
        for pair in pairs or ():
            if "=" not in pair:
                raise ConfigError(f"--set expects key=value, got {pair!r}")
            key, raw = pair.split("=", 1)
            parts = key.strip().split(".")
            node = data
            for p in parts[:-1]:
                if not isinstance(node.get(p), dict):
                    raise ConfigError(f"--set {key}: no block {p!r}")
                node = node[p]
            if parts[-1] not in node and len(parts) > 1 and parts[0] != "sweep":
                raise ConfigError(f"--set {key}: unknown field")
            node[parts[-1]] = yaml.safe_load(raw)
        return RunConfig.from_dict(data)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    # -- validated model objects ---------------------------------------------
    def validate(self) -> None:
        """Build every model object once so errors surface before any computation."""
        self.market()
        for s in self.contract.schemes:
            if s not in ct.SCHEMES:
                raise ConfigError(f"contract.schemes: unknown scheme {s!r}")
            self.grid.build(self.spec(s))
        if self.grid.m < 1:
            raise ConfigError("grid.m must be >= 1")
        self.mortality.build()
        bad = set(self.sweep.axes) - set(SWEEP_AXES)
        if bad:
            raise ConfigError(f"sweep.axes: unsupported axis {sorted(bad)}; allowed {SWEEP_AXES}")

    def market(self) -> MarketModel:
        return self.scenario.build()

    def spec(self, scheme: str = "D") -> ct.ContractSpec:
        return self.contract.build(scheme)

    def account_grid(self, spec: ct.ContractSpec) -> AccountGrid:
        return self.grid.build(spec)


def apply_axis(market: MarketModel, spec: ct.ContractSpec, axis: str, value: float):
    """One sweep coordinate; values are in percent except the mean reversion ``a``."""
    if axis == "alpha":
        return market, spec.with_terms(fee=value / 100)
    if axis == "beta":
        return market, spec.with_terms(beta=value / 100)
    if axis == "sigma_S":
        return market.with_params(sigma_s=value / 100), spec
    if axis == "sigma_r":
        return market.with_params(sigma_r=value / 100), spec
    if axis == "rho":
        return market.with_params(rho=value / 100), spec
    if axis == "a":
        return market.with_params(a=value), spec
    raise ConfigError(f"unsupported sweep axis {axis!r}")

