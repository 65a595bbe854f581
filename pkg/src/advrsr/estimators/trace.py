from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class TraceRecord:
    iteration: int
    energy: float = math.nan
    theta1: float = math.nan
    step: float = math.nan
    gradnorm: float = math.nan
    consensus: Optional[int] = None


@dataclass
class FitTrace:
    """Per-iteration log of a fit plus the reason it stopped."""

    records: list = field(default_factory=list)
    terminal_reason: str = ""
    best_iteration: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def append(self, rec: TraceRecord) -> None:
        self.records.append(rec)

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "energy", "theta1", "step", "gradnorm"])
            for r in self.records:
                w.writerow([r.iteration] + [f"{v:.17g}" for v in
                                            (r.energy, r.theta1, r.step, r.gradnorm)])
