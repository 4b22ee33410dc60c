"""Period mortality tables and one-year survival probabilities."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class MortalityTable:
    ages: np.ndarray
    qx: np.ndarray
    label: str = ""

    def __post_init__(self):
        ages = np.asarray(self.ages)
        if ages.size and np.any(np.diff(ages) != 1):
            raise ValueError("mortality table ages must be contiguous")
        if np.any((np.asarray(self.qx) < 0) | (np.asarray(self.qx) > 1)):
            raise ValueError("qx must lie in [0, 1]")

    def q(self, age: int) -> float:
        if self.label == "none":
            return 0.0
        idx = int(age) - int(self.ages[0])
        if not 0 <= idx < len(self.ages):
            raise LookupError(f"age {age} outside table range {self.ages[0]}..{self.ages[-1]}")
        return float(self.qx[idx])


def survival(table: MortalityTable, start_age: int, n: int) -> float:
    """Probability of reaching anniversary ``n`` given survival to ``n - 1``.

    Direct lookup of the period table at attained age ``start_age + n - 1``.
    """
    return 1.0 - table.q(start_age + n - 1)


def survival_vector(table: MortalityTable, start_age: int, N: int) -> np.ndarray:
    """``pi_1 .. pi_N`` as an array indexed ``0 .. N-1``."""
    return np.array([survival(table, start_age, n) for n in range(1, N + 1)])


def no_mortality() -> MortalityTable:
    """Immortal cohort (qx = 0 at every age)."""
    return MortalityTable(np.arange(0, 1), np.zeros(1), label="none")


def load_table(path, label: str | None = None) -> MortalityTable:
    """Read a CSV with header ``age,qx``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    ages = np.array([int(r["age"]) for r in rows])
    qx = np.array([float(r["qx"]) for r in rows])
    order = np.argsort(ages)
    return MortalityTable(ages[order], qx[order], label or path.stem)


def ssa_male() -> MortalityTable:
    """Bundled US SSA male period table (ages 50-100)."""
    ref = resources.files("gmwb") / "data" / "ssa_male_period.csv"
    with resources.as_file(ref) as p:
        return load_table(p, "ssa_male")
