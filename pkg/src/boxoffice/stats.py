"""Statistical association battery: correlations, two-sample tests,
regressions, aggregations, and content-rating clustering.

Everything operates on plain sequences / numpy arrays and is pure, so tests
can be evaluated concurrently over shared read-only data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from .errors import UndefinedCorrelationError, UnknownRatingError
from .ingest import CONTENT_RATINGS, cents_to_dollars

if TYPE_CHECKING:  # pragma: no cover
    from .features import HistoryIndex


@dataclass
class TestResult:
    statistic: float
    p_value: float


@dataclass
class RegressionFit:
    """Polynomial least-squares fit; coefficients ordered constant term first."""

    coefficients: np.ndarray
    degree: int
    residual_sum_squares: float

    def predict(self, xs):
        return npoly.polyval(np.asarray(xs, dtype=float), self.coefficients)

    @property
    def slope(self) -> float:
        return float(self.coefficients[1])

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])


@dataclass
class PValueMatrix:
    labels: list[str]
    p: np.ndarray

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "p": self.p.tolist()}


# ---------------------------------------------------------------------------
# Scaling and ranking

def min_max_scale(xs):
    """Map values to [0, 1] by (x - min) / (max - min).

    Returns ``(scaled, min, max)``.  A constant input maps to all zeros.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("min_max_scale requires a non-empty input")
    lo = float(xs.min())
    hi = float(xs.max())
    if hi == lo:
        return np.zeros_like(xs), lo, hi
    return (xs - lo) / (hi - lo), lo, hi


def _average_ranks(xs: np.ndarray) -> np.ndarray:
    """1-based ranks; ties receive the mean of the rank span they occupy."""
    n = xs.size
    order = np.argsort(xs, kind="stable")
    sorted_xs = xs[order]
    boundary = np.flatnonzero(sorted_xs[1:] != sorted_xs[:-1]) + 1
    starts = np.concatenate(([0], boundary))
    ends = np.concatenate((boundary, [n]))
    mean_rank = (starts + ends + 1) / 2.0  # mean of ranks starts+1 .. ends
    ranks = np.empty(n, dtype=float)
    ranks[order] = np.repeat(mean_rank, ends - starts)
    return ranks


def spearman(xs, ys) -> TestResult:
    """Spearman rank correlation with average ranks for ties.

    The p-value is the two-sided t-approximation with n - 2 degrees of
    freedom (the standard large-sample mode of library implementations).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("spearman requires two equal-length 1-D samples")
    n = xs.size
    if n < 3:
        raise ValueError(f"spearman requires at least 3 observations, got {n}")
    rx = _average_ranks(xs) - (n + 1) / 2.0
    ry = _average_ranks(ys) - (n + 1) / 2.0
    vx = float(rx @ rx)
    vy = float(ry @ ry)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("rank variance is zero; correlation undefined")
    r = float(rx @ ry) / math.sqrt(vx * vy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = 2.0 * float(special.stdtr(n - 2, -abs(t)))
    return TestResult(statistic=r, p_value=p)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov

def kolmogorov_sf(x: float) -> float:
    """Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^(k-1) e^(-2 k^2 x^2).

    The series is truncated once terms fall below 1e-12.  For tiny x the
    value is 1 to far beyond double precision, so short-circuit.
    """
    if x <= 0.05:
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a, b) -> TestResult:
    """Two-sample KS test: sup over x of |ECDF_a(x) - ECDF_b(x)|.

    The p-value uses the asymptotic Kolmogorov survival function evaluated
    at sqrt(n_a n_b / (n_a + n_b)) * statistic.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    na, nb = a.size, b.size
    if na == 0 or nb == 0:
        raise ValueError("ks_two_sample requires two non-empty samples")
    everything = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, everything, side="right") / na
    cdf_b = np.searchsorted(b, everything, side="right") / nb
    d = float(np.abs(cdf_a - cdf_b).max())
    effective = na * nb / (na + nb)
    return TestResult(statistic=d, p_value=kolmogorov_sf(math.sqrt(effective) * d))


def pairwise_ks_matrix(groups) -> PValueMatrix:
    """KS p-value for every pair of groups; symmetric with unit diagonal."""
    labels = list(groups)
    if len(labels) < 2:
        raise ValueError("pairwise_ks_matrix requires at least 2 groups")
    samples = [np.asarray(groups[label], dtype=float) for label in labels]
    for label, sample in zip(labels, samples):
        if sample.size == 0:
            raise ValueError(f"group {label!r} is empty")
    k = len(labels)
    p = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            pij = ks_two_sample(samples[i], samples[j]).p_value
            p[i, j] = pij
            p[j, i] = pij
    return PValueMatrix(labels=labels, p=p)


# ---------------------------------------------------------------------------
# Least squares

def poly_fit(xs, ys, degree: int) -> RegressionFit:
    """Least-squares polynomial fit of the given degree.

    Solved by orthogonal decomposition (lstsq) on x standardized to zero
    mean and unit variance, then mapped back to plain-x coefficients; this
    keeps degree-6 fits well conditioned.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("poly_fit requires two equal-length 1-D samples")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    n = xs.size
    if n <= degree:
        raise ValueError(f"need more than {degree} points for a degree-{degree} fit, got {n}")
    mu = float(xs.mean())
    sigma = float(xs.std())
    if sigma == 0.0:
        raise np.linalg.LinAlgError("x values are constant; fit is singular")
    z = (xs - mu) / sigma
    vand = np.vander(z, degree + 1, increasing=True)
    coef_z, _, rank, _ = np.linalg.lstsq(vand, ys, rcond=None)
    if rank < degree + 1:
        raise np.linalg.LinAlgError(
            f"underdetermined system: rank {rank} < {degree + 1} unknowns")
    residuals = ys - vand @ coef_z
    rss = float(residuals @ residuals)
    # Compose p(z) with z = (x - mu) / sigma to get plain-x coefficients.
    pz = npoly.Polynomial(coef_z)
    px = pz(npoly.Polynomial([-mu / sigma, 1.0 / sigma]))
    coefficients = np.zeros(degree + 1)
    coefficients[: px.coef.size] = px.coef
    return RegressionFit(coefficients=coefficients, degree=degree, residual_sum_squares=rss)


def ols_fit(xs, ys) -> RegressionFit:
    """Ordinary least squares line (degree-1 polynomial fit)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise ValueError(f"ols_fit requires at least 2 points, got {xs.size}")
    return poly_fit(xs, ys, 1)


# ---------------------------------------------------------------------------
# Aggregations

def rolling_average(series, window: int) -> dict[int, float]:
    """Trailing mean over the last `window` years.

    The value at year y is the mean of the series over years
    y - window + 1 .. y that are present; years whose window holds no datum
    are absent from the output.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not series:
        return {}
    years = sorted(series)
    out: dict[int, float] = {}
    for y in range(years[0], years[-1] + 1):
        values = [series[t] for t in range(y - window + 1, y + 1) if t in series]
        if values:
            out[y] = sum(values) / len(values)
    return out


@dataclass
class MonthStat:
    count: int
    mean_revenue: float | None  # dollars; None when the month is empty


def month_stats(records) -> dict[int, MonthStat]:
    """Per release month: movie count and mean (adjusted) revenue in dollars."""
    totals = {m: 0 for m in range(1, 13)}
    counts = {m: 0 for m in range(1, 13)}
    for r in records:
        totals[r.release_month] += r.revenue
        counts[r.release_month] += 1
    return {
        m: MonthStat(
            count=counts[m],
            mean_revenue=None if counts[m] == 0 else cents_to_dollars(totals[m]) / counts[m],
        )
        for m in range(1, 13)
    }


# ---------------------------------------------------------------------------
# Content-rating clusters

CLUSTER_ORDER = ("PG", "R", "TV", "G")

CONTENT_RATING_CLUSTERS = {
    "PG": ("PG-13", "PG"),
    "R": ("R", "NC-17", "Approved", "X", "M", "M/PG", "GP", "Passed"),
    "TV": ("TV-MA", "TV-PG", "TV-14", "TV-Y7", "TV-G", "Unrated", "Not Rated"),
    "G": ("G",),
}

_CLUSTER_OF = {
    label: cluster
    for cluster, members in CONTENT_RATING_CLUSTERS.items()
    for label in members
}
assert sorted(_CLUSTER_OF) == sorted(CONTENT_RATINGS)


def cluster_content_rating(label: str) -> str:
    """Map one of the 18 rating labels to its cluster (PG, R, TV or G)."""
    try:
        return _CLUSTER_OF[label]
    except KeyError:
        raise UnknownRatingError(f"unknown content rating {label!r}") from None


# ---------------------------------------------------------------------------
# Star power split

_ROLE_FIELDS = {
    "actor": "cast",
    "director": "directors",
    "creator": "creators",
    "production": "production_companies",
}

# (credit-count threshold, single-movie revenue threshold in dollars) that
# were tuned until both sides of every split held more than 2500 movies.
STAR_THRESHOLD_DEFAULTS = {
    "actor": (40, 1_000_000_000),
    "director": (5, 100_000_000),
    "creator": (10, 400_000_000),
    "production": (40, 1_000_000_000),
}


@dataclass
class StarSplit:
    star_revenues: np.ndarray    # dollars
    nostar_revenues: np.ndarray  # dollars
    test: TestResult | None      # None when either side is empty
    mean_difference: float | None  # star mean - no-star mean, dollars


def star_split(records, role: str, th_movies: int, th_revenue: int,
               index: "HistoryIndex") -> StarSplit:
    """Split movies by whether any credited entity of `role` was a star.

    An entity is a star for a movie if, strictly before the release year, it
    either has more than `th_movies` credits or appeared in at least one
    movie whose adjusted revenue exceeds `th_revenue` (cents).
    """
    if role not in _ROLE_FIELDS:
        raise ValueError(f"unknown role {role!r}")
    field = _ROLE_FIELDS[role]
    kind = role
    if not any(getattr(r, field) for r in records):
        raise ValueError(f"no record lists any {role} entity")

    star, nostar = [], []
    for r in records:
        is_star = False
        for name in getattr(r, field):
            credits = index.credits_before(kind, name, r.release_year)
            if len(credits) > th_movies or any(c.revenue > th_revenue for c in credits):
                is_star = True
                break
        (star if is_star else nostar).append(cents_to_dollars(r.revenue))

    star_arr = np.asarray(star, dtype=float)
    nostar_arr = np.asarray(nostar, dtype=float)
    if star_arr.size == 0 or nostar_arr.size == 0:
        return StarSplit(star_arr, nostar_arr, test=None, mean_difference=None)
    return StarSplit(
        star_arr, nostar_arr,
        test=ks_two_sample(star_arr, nostar_arr),
        mean_difference=float(star_arr.mean() - nostar_arr.mean()),
    )
