"""GMWB contract terms and cashflow algebra.

All cashflow functions are vectorized over the account values.  Anniversaries
are indexed ``n = 1..N``; ``spec.beta(n)`` is the penalty in force at ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

STEP_UP_MODES = ("none", "W_SU", "SU_W")
SCHEMES = ("S", "S+S", "D")


class ContractViolation(ValueError):
    pass


class AccountState(NamedTuple):
    A: float
    B: float


@dataclass(frozen=True)
class ContractSpec:
    premium: float = 100.0
    maturity: int = 10
    fee: float = 0.0
    penalties: tuple = ()
    guarantee: float | None = None
    bonus: float = 0.0
    step_up: str = "none"
    scheme: str = "D"
    surrender_allowed: bool = True
    _G: float = field(init=False, repr=False)

    def __post_init__(self):
        G = self.premium / self.maturity if self.guarantee is None else self.guarantee
        object.__setattr__(self, "_G", float(G))
        pen = tuple(float(b) for b in self.penalties) or (0.0,) * self.maturity
        if len(pen) == 1:
            pen = pen * self.maturity
        object.__setattr__(self, "penalties", pen)
        if len(pen) != self.maturity:
            raise ValueError(f"need {self.maturity} penalties, got {len(pen)}")
        if any(not 0 <= b <= 1 for b in pen):
            raise ValueError("penalties must lie in [0, 1]")
        if self._G > self.premium:
            raise ValueError("guaranteed amount cannot exceed the premium")
        if self.bonus < 0:
            raise ValueError("bonus must be >= 0")
        if self.step_up not in STEP_UP_MODES:
            raise ValueError(f"step_up must be one of {STEP_UP_MODES}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.scheme == "S+S" and not self.surrender_allowed:
            raise ValueError("scheme S+S requires surrender_allowed")

    @classmethod
    def constant_penalty(cls, beta: float, maturity: int = 10, **kw) -> "ContractSpec":
        return cls(maturity=maturity, penalties=(beta,) * maturity, **kw)

    @property
    def G(self) -> float:
        return self._G

    def beta(self, n: int) -> float:
        return self.penalties[n - 1]

    def can_surrender(self, n: int) -> bool:
        """Whether a surrender comparison is made at ``n`` (never at maturity, never under S).

        Under SU_W a full withdrawal also empties both accounts, but it pays
        ``max(A, B) - beta (max(A, B) - G)^+``, which is below the surrender value
        when ``A`` is large; so D keeps the explicit comparison for every ordering.
        """
        return self.scheme != "S" and self.surrender_allowed and 1 <= n <= self.maturity - 1

    def with_terms(self, **kw) -> "ContractSpec":
        if "beta" in kw:
            kw["penalties"] = (kw.pop("beta"),) * kw.get("maturity", self.maturity)
        return replace(self, **kw)


def withdrawal_cashflow(spec: ContractSpec, n: int, w):
    """Net amount paid for a withdrawal ``w``: penalty only on the excess over G."""
    w = np.asarray(w, dtype=float)
    return w - spec.beta(n) * np.maximum(w - spec.G, 0.0)


def surrender_cashflow(spec: ContractSpec, n: int, A, B):
    B = np.asarray(B, dtype=float)
    return np.maximum(A, B - spec.beta(n) * np.maximum(B - spec.G, 0.0))


def death_benefit(spec: ContractSpec, n: int, A, B):
    return np.maximum(A, (1.0 - spec.beta(n)) * np.asarray(B, dtype=float))


def terminal_cashflow(spec: ContractSpec, A, B):
    """Last withdrawal plus maturity payoff, already optimized over ``w_N``."""
    beta = spec.beta(spec.maturity)
    B = np.asarray(B, dtype=float)
    return np.maximum(A, (1.0 - beta) * B + beta * np.minimum(spec.G, B))


def max_withdrawal(spec: ContractSpec, A, B):
    return np.maximum(A, B) if spec.step_up == "SU_W" else np.asarray(B, dtype=float)


def static_withdrawal(spec: ContractSpec, A, B):
    """Withdrawal under the static schemes: G, or whatever is left below G."""
    return np.minimum(spec.G, max_withdrawal(spec, A, B))


def apply_event(spec: ContractSpec, n: int, A, B, w, check: bool = True):
    """Post-event accounts ``(A_{n+}, B_{n+})`` for withdrawal ``w`` at ``n``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w = np.asarray(w, dtype=float)
    if check and (np.any(w < 0) or np.any(w > max_withdrawal(spec, A, B) + 1e-12)):
        raise ContractViolation(f"withdrawal outside the admissible set at n={n}")
    bonus = np.where(w == 0, spec.bonus, 0.0)
    A_post = np.maximum(A - w, 0.0)
    if spec.step_up == "none":
        B_post = B + bonus - w
    elif spec.step_up == "W_SU":
        B_post = np.maximum(A_post, B + bonus - w)
    else:
        B_post = np.maximum(A, B) + bonus - w
    return A_post, B_post
