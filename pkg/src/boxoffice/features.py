"""Pre-release feature vectors: entity power blocks, actor familiarity,
genre power, month and content-rating features, and min-max scaling.

The 180-value layout (index map):

    [0]        budget (dollars)
    [1]        runtime (minutes)
    [2..3]     month order, mean revenue of that month on the training split
    [4..7]     content-rating cluster one-hot (PG, R, TV, G)
    [8..37]    genre block: 5 slots x 6 values over a trailing 5-year window
    [38..97]   actor block: 10 top-billed slots x 6 values
    [98..115]  director block: 3 slots x 6 values
    [116..145] creator block: 5 slots x 6 values
    [146..175] production-company block: 5 slots x 6 values
    [176..179] familiarity: mean pairwise cosine of the prior co-appearance
               matrix, then max pair-average revenue / raters / rating

Every slot contributes six values: number of prior movies, total revenue,
average revenue, total raters, average raters, average rating; entities with
no strictly-prior credits are zero padded.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .ingest import MovieRecord, cents_to_dollars
from .stats import CLUSTER_ORDER, MonthStat, cluster_content_rating

ENTITY_KINDS = ("actor", "director", "creator", "production", "genre")

_KIND_FIELD = {
    "actor": "cast",
    "director": "directors",
    "creator": "creators",
    "production": "production_companies",
    "genre": "genres",
}

SLOTS = {"actor": 10, "director": 3, "creator": 5, "production": 5, "genre": 5}
VALUES_PER_ENTITY = 6
GENRE_WINDOW_YEARS = 5

_POWER_VALUE_NAMES = ("n_movies", "total_revenue", "avg_revenue",
                      "total_raters", "avg_raters", "avg_rating")


def _build_feature_names():
    names = ["budget", "runtime", "month_index", "month_mean_revenue"]
    names += [f"rating_{c}" for c in CLUSTER_ORDER]
    for kind in ("genre", "actor", "director", "creator", "production"):
        for slot in range(SLOTS[kind]):
            names += [f"{kind}{slot + 1}_{v}" for v in _POWER_VALUE_NAMES]
    names += ["familiarity_avg_cosine", "familiarity_max_pair_avg_revenue",
              "familiarity_max_pair_avg_raters", "familiarity_max_pair_avg_rating"]
    return names


FEATURE_NAMES = _build_feature_names()
N_FEATURES = 180
assert len(FEATURE_NAMES) == N_FEATURES
assert 1 + 1 + 2 + 4 + sum(SLOTS[k] * 6 for k in SLOTS) + 4 == N_FEATURES


class Credit(NamedTuple):
    year: int
    revenue: int  # adjusted cents
    raters: int
    rating: float
    movie_id: str


class PowerBlock(NamedTuple):
    """Six aggregates of an entity's strictly-prior filmography (dollars)."""

    n_movies: float
    total_revenue: float
    avg_revenue: float
    total_raters: float
    avg_raters: float
    avg_rating: float


_ZERO_BLOCK = PowerBlock(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class HistoryIndex:
    """Chronological credit index per entity, for strictly-before-year queries.

    Credits are stored sorted by (year, movie id), so every aggregate is
    bit-identical no matter the order of the source records.  The index is
    immutable after construction and safe for concurrent read access.
    """

    def __init__(self):
        self._credits: dict[str, dict[str, list[Credit]]] = {k: {} for k in ENTITY_KINDS}
        self._years: dict[str, dict[str, list[int]]] = {k: {} for k in ENTITY_KINDS}

    def _finalize(self):
        for kind in ENTITY_KINDS:
            for name, credits in self._credits[kind].items():
                credits.sort(key=lambda c: (c.year, c.movie_id))
                self._years[kind][name] = [c.year for c in credits]

    def credits(self, kind: str, name: str) -> list[Credit]:
        return self._credits[kind].get(name, [])

    def credits_before(self, kind: str, name: str, year: int) -> list[Credit]:
        """Credits strictly earlier than `year`."""
        credits = self._credits[kind].get(name)
        if not credits:
            return []
        return credits[: bisect_left(self._years[kind][name], year)]

    def credits_in_window(self, kind: str, name: str, first_year: int,
                          last_year: int) -> list[Credit]:
        """Credits with first_year <= year <= last_year."""
        credits = self._credits[kind].get(name)
        if not credits:
            return []
        years = self._years[kind][name]
        return credits[bisect_left(years, first_year): bisect_left(years, last_year + 1)]


def build_history_index(records) -> HistoryIndex:
    index = HistoryIndex()
    for r in records:
        if r.release_year is None:
            continue
        for kind in ENTITY_KINDS:
            names = getattr(r, _KIND_FIELD[kind])
            for name in dict.fromkeys(names):  # a name listed twice counts once
                credit = Credit(r.release_year, r.revenue or 0, r.rater_count or 0,
                                r.imdb_rating or 0.0, r.id)
                index._credits[kind].setdefault(name, []).append(credit)
    index._finalize()
    return index


def _aggregate(credits) -> PowerBlock:
    n = len(credits)
    if n == 0:
        return _ZERO_BLOCK
    total_revenue = cents_to_dollars(sum(c.revenue for c in credits))
    total_raters = float(sum(c.raters for c in credits))
    total_rating = sum(c.rating for c in credits)
    return PowerBlock(
        n_movies=float(n),
        total_revenue=total_revenue,
        avg_revenue=total_revenue / n,
        total_raters=total_raters,
        avg_raters=total_raters / n,
        avg_rating=total_rating / n,
    )


def entity_power(name: str, kind: str, cutoff_year: int, index: HistoryIndex) -> PowerBlock:
    """Power block over credits strictly before `cutoff_year` (zeros if none)."""
    return _aggregate(index.credits_before(kind, name, cutoff_year))


def entity_block(movie: MovieRecord, kind: str, index: HistoryIndex) -> np.ndarray:
    """Flat slots x 6 block for the first `SLOTS[kind]` listed entities."""
    slots = SLOTS[kind]
    out = np.zeros(slots * VALUES_PER_ENTITY)
    names = getattr(movie, _KIND_FIELD[kind])[:slots]
    for i, name in enumerate(names):
        out[i * 6:(i + 1) * 6] = entity_power(name, kind, movie.release_year, index)
    return out


def genre_power(movie: MovieRecord, index: HistoryIndex) -> np.ndarray:
    """Like the entity blocks but over a trailing window of recent releases:
    years movie_year - 5 .. movie_year - 1 inclusive."""
    out = np.zeros(SLOTS["genre"] * VALUES_PER_ENTITY)
    y = movie.release_year
    for i, name in enumerate(movie.genres[: SLOTS["genre"]]):
        credits = index.credits_in_window("genre", name, y - GENRE_WINDOW_YEARS, y - 1)
        out[i * 6:(i + 1) * 6] = _aggregate(credits)
    return out


def familiarity(movie: MovieRecord, index: HistoryIndex):
    """(avg_cosine, max_pair_avg_revenue, max_pair_avg_raters, max_pair_avg_rating).

    Nodes are the same <= 10 billed actors used in the actor block.  The
    co-appearance matrix counts joint movies strictly before the release
    year; the cosine of a zero row is defined as 0.  With fewer than two
    actors all four values are 0.
    """
    cast = movie.cast[: SLOTS["actor"]]
    n = len(cast)
    if n < 2:
        return (0.0, 0.0, 0.0, 0.0)

    prior = [
        {c.movie_id: c for c in index.credits_before("actor", name, movie.release_year)}
        for name in cast
    ]
    weights = np.zeros((n, n))
    max_avg_revenue = 0.0
    max_avg_raters = 0.0
    max_avg_rating = 0.0
    for i, j in combinations(range(n), 2):
        joint_ids = prior[i].keys() & prior[j].keys()
        weights[i, j] = weights[j, i] = len(joint_ids)
        if joint_ids:
            joint = [prior[i][mid] for mid in joint_ids]
            k = len(joint)
            max_avg_revenue = max(max_avg_revenue,
                                  cents_to_dollars(sum(c.revenue for c in joint)) / k)
            max_avg_raters = max(max_avg_raters, sum(c.raters for c in joint) / k)
            max_avg_rating = max(max_avg_rating, sum(c.rating for c in joint) / k)

    norms = np.sqrt((weights * weights).sum(axis=1))
    cos_total = 0.0
    for i, j in combinations(range(n), 2):
        if norms[i] > 0.0 and norms[j] > 0.0:
            cos_total += float(weights[i] @ weights[j]) / (norms[i] * norms[j])
    avg_cosine = cos_total / (n * (n - 1) / 2)
    return (avg_cosine, max_avg_revenue, max_avg_raters, max_avg_rating)


def month_features(movie: MovieRecord, train_month_stats: dict[int, MonthStat]):
    """(month order, mean training revenue of that month; 0 when empty)."""
    stat = train_month_stats[movie.release_month]
    mean = 0.0 if stat.mean_revenue is None else stat.mean_revenue
    return (float(movie.release_month), mean)


def content_rating_onehot(movie_or_label) -> np.ndarray:
    label = movie_or_label if isinstance(movie_or_label, str) else movie_or_label.content_rating
    cluster = cluster_content_rating(label)
    out = np.zeros(len(CLUSTER_ORDER))
    out[CLUSTER_ORDER.index(cluster)] = 1.0
    return out


def assemble(movie: MovieRecord, index: HistoryIndex,
             train_month_stats: dict[int, MonthStat]) -> np.ndarray:
    """The full 180-value feature vector for one cleaned, adjusted movie."""
    vec = np.empty(N_FEATURES)
    vec[0] = cents_to_dollars(movie.budget)
    vec[1] = float(movie.runtime)
    vec[2], vec[3] = month_features(movie, train_month_stats)
    vec[4:8] = content_rating_onehot(movie)
    vec[8:38] = genre_power(movie, index)
    vec[38:98] = entity_block(movie, "actor", index)
    vec[98:116] = entity_block(movie, "director", index)
    vec[116:146] = entity_block(movie, "creator", index)
    vec[146:176] = entity_block(movie, "production", index)
    vec[176:180] = familiarity(movie, index)
    return vec


def assemble_matrix(movies, index: HistoryIndex,
                    train_month_stats: dict[int, MonthStat]) -> np.ndarray:
    if not movies:
        return np.zeros((0, N_FEATURES))
    return np.stack([assemble(m, index, train_month_stats) for m in movies])


# ---------------------------------------------------------------------------
# Min-max scaling learned on the training matrix

@dataclass
class ScalingParams:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=float)
        self.maxs = np.asarray(self.maxs, dtype=float)
        if self.mins.shape != self.maxs.shape:
            raise ValueError("mins and maxs must have the same shape")
        if np.any(self.maxs < self.mins):
            raise ValueError("per-dimension max must be >= min")

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, doc) -> "ScalingParams":
        return cls(mins=np.asarray(doc["mins"]), maxs=np.asarray(doc["maxs"]))


def fit_scaler(train_matrix) -> ScalingParams:
    train_matrix = np.asarray(train_matrix, dtype=float)
    if train_matrix.size == 0:
        raise ValueError("cannot fit a scaler on an empty matrix")
    return ScalingParams(mins=train_matrix.min(axis=0), maxs=train_matrix.max(axis=0))


def apply_scaler(x, params: ScalingParams) -> np.ndarray:
    """(x - min) / (max - min) per dimension with training min/max.

    Constant training columns map to 0; values outside the training range
    are not clamped, so test vectors may fall outside [0, 1].
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.mins.shape[0]:
        raise ValueError(
            f"dimension mismatch: vector has {x.shape[-1]}, scaler has {params.mins.shape[0]}")
    span = params.maxs - params.mins
    safe = np.where(span == 0.0, 1.0, span)
    out = (x - params.mins) / safe
    return np.where(span == 0.0, 0.0, out)
