"""Conditional Gaussian law of one anniversary year under Hull-White.

Given ``r_{n-1}``, the triple ``(int_{n-1}^n r ds, r_n, W^S_n - W^S_{n-1})`` is
jointly normal.  Conditioning further on the first two components leaves the
fund increment normal with mean ``mu_tilde`` (linear in the rate summary) and a
variance ``sigma_tilde^2`` that does not depend on the state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr  # Cephes erf-based normal CDF, relative error ~1e-15

from .yield_curve import market_discount


@dataclass(frozen=True)
class JointLawParams:
    n: int
    dt: float
    mu1_const: float   # mu1 = mu1_slope * r_prev + mu1_const
    mu1_slope: float
    mu2_const: float
    mu2_slope: float
    sigma11: float
    sigma22: float
    sigma33: float
    sigma12: float
    sigma13: float
    sigma23: float

    def means(self, r_prev):
        r_prev = np.asarray(r_prev, dtype=float)
        return self.mu1_slope * r_prev + self.mu1_const, self.mu2_slope * r_prev + self.mu2_const

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.sigma11, self.sigma12, self.sigma13],
                         [self.sigma12, self.sigma22, self.sigma23],
                         [self.sigma13, self.sigma23, self.sigma33]])

    @property
    def det22(self) -> float:
        return self.sigma11 * self.sigma22 - self.sigma12**2

    @property
    def projection(self) -> np.ndarray:
        """Row vector ``Sigma_12 Sigma_22^{-1}`` mapping the rate summary to ``mu_tilde``."""
        det = self.det22
        if not det > 0:
            raise ArithmeticError(f"rate-summary covariance is singular (det={det})")
        s11, s12, s22 = self.sigma11, self.sigma12, self.sigma22
        return np.array([self.sigma13 * s22 - self.sigma23 * s12,
                         self.sigma23 * s11 - self.sigma13 * s12]) / det

    @property
    def sigma_tilde2(self) -> float:
        c = self.projection
        return max(self.sigma33 - (c[0] * self.sigma13 + c[1] * self.sigma23), 0.0)


def alpha_hw(curve, hw, t):
    return curve.forward(t) + hw.sigma_r**2 / (2 * hw.a**2) * (-np.expm1(-hw.a * t)) ** 2


def var_integral(hw, t):
    """Variance of ``int_0^t x ds`` for the zero-mean OU part."""
    a = hw.a
    return hw.sigma_r**2 / a**2 * (t + 2 / a * np.exp(-a * t) - np.exp(-2 * a * t) / (2 * a) - 1.5 / a)


def conditional_moments(curve, hw, rho: float, n: int, dt: float = 1.0) -> JointLawParams:
    """Moments of the year ``[n-1, n]`` (affine in ``r_{n-1}``)."""
    if not hw.a > 0:
        raise ValueError("a must be > 0")
    a, s = hw.a, hw.sigma_r
    t0, t1 = (n - 1) * dt, n * dt
    e = np.exp(-a * dt)
    b = -np.expm1(-a * dt) / a
    mu1_const = (-b * alpha_hw(curve, hw, t0)
                 + np.log(market_discount(curve, t0) / market_discount(curve, t1))
                 + 0.5 * (var_integral(hw, t1) - var_integral(hw, t0)))
    mu2_const = alpha_hw(curve, hw, t1) - alpha_hw(curve, hw, t0) * e
    return JointLawParams(
        n=n, dt=dt,
        mu1_const=float(mu1_const), mu1_slope=float(b),
        mu2_const=float(mu2_const), mu2_slope=float(e),
        sigma11=float(var_integral(hw, dt)),
        sigma22=float(s**2 / (2 * a) * (-np.expm1(-2 * a * dt))),
        sigma33=float(dt),
        sigma12=float(s**2 / (2 * a**2) * np.expm1(-a * dt) ** 2),
        sigma13=float(rho * s / a * (dt - b)),
        sigma23=float(rho * s / a * (-np.expm1(-a * dt))),
    )


def fund_increment_conditional(params: JointLawParams, r_prev, int_r, r_n):
    """``(mu_tilde, sigma_tilde^2)`` of ``W^S_n - W^S_{n-1}`` given the rate summary."""
    mu1, mu2 = params.means(r_prev)
    c = params.projection
    mu = c[0] * (np.asarray(int_r) - mu1) + c[1] * (np.asarray(r_n) - mu2)
    return mu, params.sigma_tilde2


def log_growth_mean(int_r, mu_tilde, fee, q, sigma_s, dt=1.0):
    """Conditional mean of ``log(A_{n-} / A_{(n-1)+})``."""
    return int_r - (q + fee + 0.5 * sigma_s**2) * dt + sigma_s * mu_tilde


def account_growth_factor(int_r, mu_tilde, sigma_tilde, z, fee, q, sigma_s, dt=1.0):
    """Gross growth of the investment account over one year for a normal draw ``z``."""
    return np.exp(log_growth_mean(int_r, mu_tilde, fee, q, sigma_s, dt) + sigma_s * sigma_tilde * z)


def bucket_probabilities(log_mean, log_sd, x, delta_a: float, n_a: int):
    """Probability of ``A_{n-}`` falling in each grid bucket ``[a_h - d/2, a_h + d/2)``.

    ``A_{n-} = x exp(log_mean + log_sd Z)``.  Bucket 0 collects ``[0, d/2)`` and
    bucket ``n_a`` everything above ``a_{n_a} - d/2``.  ``x`` and ``log_mean``
    broadcast; the bucket axis is appended last.  ``x <= 0`` puts unit mass on
    bucket 0.
    """
    x = np.asarray(x, dtype=float)
    log_mean = np.asarray(log_mean, dtype=float)
    edges = (np.arange(n_a) + 0.5) * delta_a          # upper edges of buckets 0..n_a-1
    pos = x > 0
    safe_x = np.where(pos, x, 1.0)
    # log(edge / x) - mean, in units of the log standard deviation
    dist = np.log(edges) - (np.log(safe_x) + log_mean)[..., None]
    if log_sd > 0:
        with np.errstate(over="ignore", divide="ignore"):  # tiny sd: ratio -> +-inf, ndtr saturates
            cdf = ndtr(dist / log_sd)
    else:
        cdf = (dist > 0).astype(float)
    cdf = np.where(pos[..., None], cdf, 1.0)
    shape = cdf.shape[:-1] + (1,)
    cdf = np.concatenate([np.zeros(shape), cdf, np.ones(shape)], axis=-1)
    return np.diff(cdf, axis=-1)
