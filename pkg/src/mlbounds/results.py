from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class BoundResult:
    """One bound evaluated at one channel point.

    ``raw`` is the unclipped value kept for ordering checks; ``value`` is what
    gets reported (clipped to [0, 1]).
    """

    name: str
    raw: float
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        if math.isnan(self.raw):
            return self.raw
        return min(1.0, max(0.0, self.raw))

    def __float__(self):
        return self.value


@dataclass
class BoundCurve:
    name: str
    grid: list
    values: list
    params: list
    metadata: dict = field(default_factory=dict)
    raw: list = field(default_factory=list)

    @classmethod
    def from_results(cls, name: str, grid, results, metadata=None) -> "BoundCurve":
        meta = dict(metadata or {})
        return cls(
            name,
            [float(g) for g in grid],
            [r.value for r in results],
            [{**r.params, **({"meta": r.metadata} if r.metadata else {})} for r in results],
            meta,
            [r.raw for r in results],
        )
