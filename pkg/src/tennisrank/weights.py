"""Edge weights for the results graph.

Each match contributes one loser -> winner edge whose weight is the product of
an aging factor, a surface factor and a round/instance factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date

from .dataset import Category, MatchRecord, Round, Surface, Tournament

# Replaces a zero off-surface factor so no edge weight is exactly zero.
MIN_SURFACE_WEIGHT = 1e-12

# Rounds back from the title inside a Grand Slam: the final itself is 1.
_ROUND_STEPS = {
    Round.F: 1, Round.SF: 2, Round.QF: 3, Round.R16: 4,
    Round.R32: 5, Round.R64: 6, Round.R128: 7,
}
# Lower categories start further down the ladder, so that base 2 reproduces
# the 2000/1000/500/250 points ratio between tournament winners.
_CATEGORY_OFFSET = {
    Category.GRAND_SLAM: 0,
    Category.MASTERS1000: 1,
    Category.ATP500: 2,
    Category.ATP250: 3,
}
_MASTERS_CUP_LADDER = {Round.F: 2, Round.SF: 3, Round.RR: 4}


@dataclass(frozen=True)
class WeightParams:
    """The four searched parameters.

    ``decay_lambda`` is the positive decay rate; 0 disables aging entirely and
    is what the uniform (unweighted) ranking uses.
    """

    age_years: int = 4
    decay_lambda: float = 5.0
    surface_factor: float = 0.3
    round_base: float = 1.7
    decay_amplitude: float = 1.0

    def __post_init__(self):
        if int(self.age_years) != self.age_years or self.age_years < 1:
            raise ValueError(f"age_years must be an integer >= 1, got {self.age_years}")
        if not self.decay_lambda >= 0:
            raise ValueError(f"decay_lambda must be >= 0, got {self.decay_lambda}")
        if not 0.0 <= self.surface_factor <= 1.0:
            raise ValueError(f"surface_factor must be in [0, 1], got {self.surface_factor}")
        if not self.round_base >= 1.0:
            raise ValueError(f"round_base must be >= 1, got {self.round_base}")
        if self.decay_amplitude != 1.0:
            raise ValueError("decay_amplitude is fixed at 1")
        object.__setattr__(self, "age_years", int(self.age_years))

    @classmethod
    def identity(cls, age_years: int = 1) -> "WeightParams":
        """Params under which every edge weight is exactly 1."""
        return cls(age_years=age_years, decay_lambda=0.0, surface_factor=1.0, round_base=1.0)

    def with_value(self, coordinate: str, value) -> "WeightParams":
        return replace(self, **{coordinate: value})

    def as_tuple(self) -> tuple[int, float, float, float]:
        return (self.age_years, self.decay_lambda, self.surface_factor, self.round_base)

    def __str__(self):
        return (f"age={self.age_years},decay={self.decay_lambda:g},"
                f"surface={self.surface_factor:g},round={self.round_base:g}")


def parse_params(text: str, base: WeightParams | None = None) -> WeightParams:
    """Parse ``age=4,decay=5,surface=0.3,round=1.7``; omitted keys keep ``base``."""
    keys = {"age": "age_years", "decay": "decay_lambda", "surface": "surface_factor", "round": "round_base"}
    values = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in keys:
            raise ValueError(f"bad parameter {part!r}; expected one of {sorted(keys)}")
        values[keys[key]] = int(value) if key == "age" else float(value)
    return replace(base or WeightParams(), **values)


@dataclass(frozen=True)
class WeightedEdge:
    source: int  # loser
    target: int  # winner
    weight: float
    match_id: int


def years_between(earlier: date, later: date) -> float:
    """Fractional years as week difference / 52."""
    return (later - earlier).days / 7.0 / 52.0


def aging_weight(t: float, params: WeightParams) -> float:
    return params.decay_amplitude * math.exp(-params.decay_lambda * t)


def surface_weight(match_surface: Surface, target_surface: Surface, params: WeightParams) -> float:
    if match_surface == target_surface:
        return 1.0
    return max(params.surface_factor, MIN_SURFACE_WEIGHT)


def round_value(rnd: Round, category: Category) -> int:
    if category is Category.MASTERS_CUP:
        return _MASTERS_CUP_LADDER.get(rnd, _MASTERS_CUP_LADDER[Round.RR])
    if rnd is Round.RR:
        # Round robins outside the season finale are treated as first rounds.
        rnd = Round.R32
    return _ROUND_STEPS[rnd] + _CATEGORY_OFFSET[category]


def instance_weight(v: int, params: WeightParams) -> float:
    if v < 1:
        raise ValueError(f"round value must be >= 1, got {v}")
    return params.round_base ** (-(v - 1))


def edge_weight(match: MatchRecord, match_tournament: Tournament, target: Tournament,
                target_start: date, params: WeightParams) -> WeightedEdge:
    t = years_between(match.date, target_start)
    weight = (
        aging_weight(t, params)
        * surface_weight(match_tournament.surface, target.surface, params)
        * instance_weight(round_value(match.round, match_tournament.category), params)
    )
    return WeightedEdge(match.loser_id, match.winner_id, weight, match.match_id)
