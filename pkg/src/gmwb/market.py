"""Market model container and the bundled parameter sets."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .yield_curve import HullWhiteParams, SvenssonCurve


@dataclass(frozen=True)
class MarketModel:
    """Equity fund (GBM with dividend yield) correlated with a Hull-White short rate."""

    curve: object
    hw: HullWhiteParams
    sigma_s: float
    q: float
    rho: float
    s0: float = 100.0

    def __post_init__(self):
        if self.sigma_s < 0:
            raise ValueError("sigma_s must be >= 0")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")

    def with_params(self, **kw) -> "MarketModel":
        """Copy with some of sigma_s, q, rho, a, sigma_r, r0 replaced."""
        hw_kw = {k: kw.pop(k) for k in ("a", "sigma_r", "r0") if k in kw}
        hw = replace(self.hw, **hw_kw) if hw_kw else self.hw
        return replace(self, hw=hw, **kw)


CURVE_2021 = SvenssonCurve.from_pct(0.3202, -1.0501, 13.2616, -14.7208, 1.8168, 1.8656)
CURVE_2022 = SvenssonCurve.from_pct(1.2109, -0.1090, 4.3116, 3.9468, 10.0911, 0.7052)


def scenario_2021() -> MarketModel:
    """Euro area, 31 Dec 2021 (negative short end)."""
    return MarketModel(CURVE_2021, HullWhiteParams(a=0.10, sigma_r=0.02, r0=-0.0067),
                       sigma_s=0.20, q=0.02, rho=0.5)


def scenario_2022() -> MarketModel:
    """Euro area, 30 Dec 2022 (positive rates)."""
    return MarketModel(CURVE_2022, HullWhiteParams(a=0.10, sigma_r=0.02, r0=0.0219),
                       sigma_s=0.20, q=0.02, rho=0.5)


def scenario_gmz() -> MarketModel:
    """Validation set: flat 5% curve, a = 1, sigma_r = 20%, sigma_S = 20%, rho = -50%, q = 0."""
    return MarketModel(SvenssonCurve.flat(0.05), HullWhiteParams(a=1.0, sigma_r=0.20, r0=0.05),
                       sigma_s=0.20, q=0.0, rho=-0.5)


SCENARIOS = {
    "scenario_2021": scenario_2021,
    "scenario_2022": scenario_2022,
    "scenario_gmz": scenario_gmz,
}
