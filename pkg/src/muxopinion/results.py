from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


def fractional_ranks(values) -> np.ndarray:
    """Rank 1 = largest value; tied values share the mean of their positions."""
    v = np.asarray(values, dtype=float)
    if v.size and not np.all(np.isfinite(v)):
        raise ValueError("fractional_ranks needs finite values")
    return rankdata(-v, method="average").astype(float)


def tie_groups(values) -> list[list[int]]:
    """Index groups (size >= 2) of exactly equal values, in first-seen order."""
    v = np.asarray(values, dtype=float)
    groups: dict[float, list[int]] = {}
    for i, x in enumerate(v.tolist()):
        groups.setdefault(x, []).append(i)
    return [g for g in groups.values() if len(g) > 1]


@dataclass(frozen=True, eq=False)
class CentralityResult:
    """Per-node centrality values with their fractional ranks.

    ``budget`` is set when ``values`` is an allocation of an external-influence
    budget; ``budget_shares`` is then ``values / budget``.
    """

    measure: str
    node_ids: tuple
    values: np.ndarray
    budget: float | None = None
    diagnostics: dict = field(default_factory=dict)
    ranks: np.ndarray = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if len(self.node_ids) != values.size:
            raise ValueError(f"{len(self.node_ids)} node ids for {values.size} values")
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        ranks = fractional_ranks(values)
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def budget_shares(self) -> np.ndarray | None:
        if self.budget is None:
            return None
        return self.values / self.budget

    def __len__(self):
        return self.values.size

    def as_dict(self) -> dict:
        return dict(zip(self.node_ids, self.values.tolist()))
