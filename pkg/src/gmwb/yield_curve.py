"""Initial term structure and Hull-White analytics.

Curves are described by their instantaneous forward rate ``f(0, T)``.  Every
curve class exposes three closed forms, ``forward``, ``forward_slope`` (the
derivative in ``T``) and ``integral`` (``int_0^T f(0, t) dt``), from which the
yield, the market discount factor, the Hull-White drift ``theta`` and the
model zero-coupon bond are derived.

All rates are decimals (0.02 means 2%).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvenssonCurve:
    """Svensson instantaneous forward curve.

    ``f(0,T) = b0 + b1 e^{-T/t1} + b2 (T/t1) e^{-T/t1} + b3 (T/t2) e^{-T/t2}``
    """

    beta0: float
    beta1: float
    beta2: float
    beta3: float
    tau1: float
    tau2: float

    def __post_init__(self):
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise ValueError(f"Svensson time constants must be positive, got {self.tau1}, {self.tau2}")

    @classmethod
    def from_pct(cls, beta0_pct, beta1_pct, beta2_pct, beta3_pct, tau1, tau2) -> "SvenssonCurve":
        """Build from coefficients quoted in percent (the ECB convention)."""
        return cls(beta0_pct / 100, beta1_pct / 100, beta2_pct / 100, beta3_pct / 100, tau1, tau2)

    @classmethod
    def flat(cls, rate: float) -> "SvenssonCurve":
        return cls(rate, 0.0, 0.0, 0.0, 1.0, 1.0)

    def forward(self, T):
        T = np.asarray(T, dtype=float)
        e1 = np.exp(-T / self.tau1)
        e2 = np.exp(-T / self.tau2)
        return (self.beta0 + self.beta1 * e1 + self.beta2 * (T / self.tau1) * e1
                + self.beta3 * (T / self.tau2) * e2)

    def forward_slope(self, T):
        # d/dT: -b1/t1 e1 + b2/t1 (1 - T/t1) e1 + b3/t2 (1 - T/t2) e2
        T = np.asarray(T, dtype=float)
        e1 = np.exp(-T / self.tau1)
        e2 = np.exp(-T / self.tau2)
        return (-self.beta1 / self.tau1 * e1
                + self.beta2 / self.tau1 * (1.0 - T / self.tau1) * e1
                + self.beta3 / self.tau2 * (1.0 - T / self.tau2) * e2)

    def integral(self, T):
        # b0 T + (b1 + b2) t1 (1 - e1) - b2 T e1 + b3 (t2 (1 - e2) - T e2)
        T = np.asarray(T, dtype=float)
        e1 = np.exp(-T / self.tau1)
        e2 = np.exp(-T / self.tau2)
        one_m_e1 = -np.expm1(-T / self.tau1)
        one_m_e2 = -np.expm1(-T / self.tau2)
        return (self.beta0 * T + (self.beta1 + self.beta2) * self.tau1 * one_m_e1
                - self.beta2 * T * e1 + self.beta3 * (self.tau2 * one_m_e2 - T * e2))


@dataclass(frozen=True)
class HullWhiteParams:
    a: float
    sigma_r: float
    r0: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"mean reversion a must be > 0, got {self.a}")
        if self.sigma_r < 0:
            raise ValueError(f"sigma_r must be >= 0, got {self.sigma_r}")


def forward_rate(curve, T):
    """Instantaneous forward ``f(0, T)``; at ``T = 0`` this is the short end limit."""
    return curve.forward(T)


def yield_rate(curve, T):
    """Continuously compounded zero yield ``y(0, T) = (1/T) int_0^T f``."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("yield is undefined at T <= 0; use forward_rate(curve, 0) for the limit")
    return curve.integral(T) / T


def market_discount(curve, T):
    """Market zero-coupon price ``p^M(0, T) = exp(-int_0^T f)``."""
    return np.exp(-curve.integral(T))


def bond_B(hw: HullWhiteParams, t, T):
    return -np.expm1(-hw.a * (np.asarray(T, dtype=float) - t)) / hw.a


def theta(curve, hw: HullWhiteParams, t):
    """Hull-White drift fitted to the initial curve."""
    t = np.asarray(t, dtype=float)
    return (curve.forward_slope(t) + hw.a * curve.forward(t)
            + hw.sigma_r**2 / (2 * hw.a) * (-np.expm1(-2 * hw.a * t)))


def bond_price(curve, hw: HullWhiteParams, t, T, r_t):
    """Hull-White zero-coupon bond ``p(t, T) = A(t, T) exp(-B(t, T) r_t)``."""
    t = np.asarray(t, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(t > T):
        raise ValueError("bond_price requires t <= T")
    B = bond_B(hw, t, T)
    log_A = (curve.integral(t) - curve.integral(T) + B * curve.forward(t)
             - hw.sigma_r**2 / (4 * hw.a) * (-np.expm1(-2 * hw.a * t)) * B**2)
    return np.exp(log_A - B * np.asarray(r_t, dtype=float))
