"""Dataset ingestion: loading, cleaning, inflation adjustment, synthetic data.

Datasets are record-per-line JSON (one movie object per line) or a single
JSON array of the same objects.  Two schemas are supported:

* ``detail`` — the full per-movie scrape.  Every key must be present;
  scalar values may be ``null`` when the source page lacked the datum::

      {"id": "m000001", "title": "...", "year": 2008, "month": 5,
       "budget": 140000000, "revenue": 585366247, "runtime": 126,
       "contentRating": "PG-13", "genre": ["Action", "Adventure"],
       "cast": ["..."], "director": ["..."], "creator": ["..."],
       "production": ["..."], "rating": 7.9, "raters": 1100000}

* ``summary`` — the lighter listing-page scrape (no budget, month, creators
  or production companies): keys ``id, title, year, certificate, runtime,
  genre, director, stars, rating, raters, gross``.

Money is held as exact integer US cents inside the package to keep repeated
inflation adjustment free of float drift; it is converted back to dollars
only at analysis time and on serialization.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import MissingYearError, StreamCorruptionError

# The 18 content-rating labels observed in the scraped data.
CONTENT_RATINGS = (
    "G", "PG", "PG-13", "R", "NC-17",
    "TV-MA", "TV-PG", "TV-14", "TV-Y7", "TV-G",
    "Unrated", "Not Rated",
    "Approved", "X", "M", "M/PG", "GP", "Passed",
)


def dollars_to_cents(amount) -> int:
    return round(amount * 100)


def cents_to_dollars(cents) -> float:
    return cents / 100.0


@dataclass
class MovieRecord:
    """One movie with its pre-release attributes plus revenue and rating data.

    ``budget`` and ``revenue`` are integer cents.  Scalar fields are ``None``
    until cleaning guarantees they are populated.
    """

    id: str
    title: str
    release_year: int | None = None
    release_month: int | None = None
    budget: int | None = None
    revenue: int | None = None
    runtime: int | None = None
    content_rating: str | None = None
    genres: list[str] = field(default_factory=list)
    cast: list[str] = field(default_factory=list)
    directors: list[str] = field(default_factory=list)
    creators: list[str] = field(default_factory=list)
    production_companies: list[str] = field(default_factory=list)
    imdb_rating: float | None = None
    rater_count: int | None = None


@dataclass
class ParseError:
    """A per-record schema violation collected (not raised) during loading."""

    line: int
    record_id: str | None
    field: str | None
    message: str


@dataclass
class CleanReport:
    kept: int
    dropped_by_missing_field: dict[str, int]

    @property
    def dropped(self) -> int:
        return sum(self.dropped_by_missing_field.values())

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "dropped": self.dropped,
            "dropped_by_missing_field": dict(self.dropped_by_missing_field),
        }


# ---------------------------------------------------------------------------
# Loading

_DETAIL_KEYS = (
    "id", "title", "year", "month", "budget", "revenue", "runtime",
    "contentRating", "genre", "cast", "director", "creator", "production",
    "rating", "raters",
)
_SUMMARY_KEYS = (
    "id", "title", "year", "certificate", "runtime", "genre", "director",
    "stars", "rating", "raters", "gross",
)


def _opt_int(obj, key, errors):
    v = obj.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        errors.append((key, f"expected integer or null, got {v!r}"))
        return None
    return v


def _opt_money(obj, key, errors):
    v = obj.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errors.append((key, f"expected number or null, got {v!r}"))
        return None
    if v < 0:
        errors.append((key, f"money must be non-negative, got {v!r}"))
        return None
    return dollars_to_cents(v)


def _opt_float(obj, key, errors):
    v = obj.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errors.append((key, f"expected number or null, got {v!r}"))
        return None
    return float(v)


def _opt_str(obj, key, errors):
    v = obj.get(key)
    if v is None:
        return None
    if not isinstance(v, str):
        errors.append((key, f"expected string or null, got {v!r}"))
        return None
    return v


def _name_list(obj, key, errors):
    v = obj.get(key)
    if v is None:
        return []
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        errors.append((key, f"expected list of strings, got {v!r}"))
        return []
    return list(v)


def _record_from_object(obj, schema, line, errors):
    required = _DETAIL_KEYS if schema == "detail" else _SUMMARY_KEYS
    record_id = obj.get("id") if isinstance(obj.get("id"), str) else None
    for key in required:
        if key not in obj:
            errors.append(ParseError(line, record_id, key, f"missing required key {key!r}"))
            return None

    field_errors: list[tuple[str, str]] = []
    rid = _opt_str(obj, "id", field_errors)
    title = _opt_str(obj, "title", field_errors)
    if schema == "detail":
        record = MovieRecord(
            id=rid or "",
            title=title or "",
            release_year=_opt_int(obj, "year", field_errors),
            release_month=_opt_int(obj, "month", field_errors),
            budget=_opt_money(obj, "budget", field_errors),
            revenue=_opt_money(obj, "revenue", field_errors),
            runtime=_opt_int(obj, "runtime", field_errors),
            content_rating=_opt_str(obj, "contentRating", field_errors),
            genres=_name_list(obj, "genre", field_errors),
            cast=_name_list(obj, "cast", field_errors),
            directors=_name_list(obj, "director", field_errors),
            creators=_name_list(obj, "creator", field_errors),
            production_companies=_name_list(obj, "production", field_errors),
            imdb_rating=_opt_float(obj, "rating", field_errors),
            rater_count=_opt_int(obj, "raters", field_errors),
        )
    else:
        record = MovieRecord(
            id=rid or "",
            title=title or "",
            release_year=_opt_int(obj, "year", field_errors),
            revenue=_opt_money(obj, "gross", field_errors),
            runtime=_opt_int(obj, "runtime", field_errors),
            content_rating=_opt_str(obj, "certificate", field_errors),
            genres=_name_list(obj, "genre", field_errors),
            cast=_name_list(obj, "stars", field_errors),
            directors=_name_list(obj, "director", field_errors),
            imdb_rating=_opt_float(obj, "rating", field_errors),
            rater_count=_opt_int(obj, "raters", field_errors),
        )
    if rid is None:
        field_errors.append(("id", "record id is required"))
    if field_errors:
        for key, message in field_errors:
            errors.append(ParseError(line, record_id, key, message))
        return None
    return record


def load_dataset(source, schema="detail"):
    """Load a dataset from a path or binary/text stream.

    Returns ``(records, parse_errors)``.  Bad records are collected in
    ``parse_errors`` and skipped; only document-level corruption (undecodable
    bytes, a malformed JSON array) raises :class:`StreamCorruptionError`.
    """
    if schema not in ("detail", "summary"):
        raise ValueError(f"unknown schema {schema!r}")
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_dataset(fh, schema)
    raw = source.read()
    if isinstance(raw, str):
        data = raw
    else:
        try:
            data = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise StreamCorruptionError("stream is not valid UTF-8", exc.start) from exc

    records: list[MovieRecord] = []
    errors: list[ParseError] = []
    stripped = data.lstrip()
    if stripped.startswith("["):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise StreamCorruptionError("malformed JSON document", exc.pos) from exc
        for i, obj in enumerate(doc, start=1):
            if not isinstance(obj, dict):
                errors.append(ParseError(i, None, None, "record is not a JSON object"))
                continue
            record = _record_from_object(obj, schema, i, errors)
            if record is not None:
                records.append(record)
        return records, errors

    for i, raw_line in enumerate(data.splitlines(), start=1):
        if not raw_line.strip():
            continue
        try:
            obj = json.loads(raw_line)
        except json.JSONDecodeError as exc:
            errors.append(ParseError(i, None, None, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            errors.append(ParseError(i, None, None, "record is not a JSON object"))
            continue
        record = _record_from_object(obj, schema, i, errors)
        if record is not None:
            records.append(record)
    return records, errors


def _money_out(cents):
    if cents is None:
        return None
    if cents % 100 == 0:
        return cents // 100
    return cents / 100.0


def record_to_object(record: MovieRecord) -> dict:
    """Detail-schema JSON object for one record (money back in dollars)."""
    return {
        "id": record.id,
        "title": record.title,
        "year": record.release_year,
        "month": record.release_month,
        "budget": _money_out(record.budget),
        "revenue": _money_out(record.revenue),
        "runtime": record.runtime,
        "contentRating": record.content_rating,
        "genre": list(record.genres),
        "cast": list(record.cast),
        "director": list(record.directors),
        "creator": list(record.creators),
        "production": list(record.production_companies),
        "rating": record.imdb_rating,
        "raters": record.rater_count,
    }


def serialize_dataset(records, destination) -> None:
    """Write records as detail-schema record-per-line JSON."""
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8") as fh:
            serialize_dataset(records, fh)
            return
    for record in records:
        destination.write(json.dumps(record_to_object(record), sort_keys=True))
        destination.write("\n")


# ---------------------------------------------------------------------------
# Cleaning

_CLEAN_CHECKS = (
    ("release_year", lambda r: r.release_year is not None),
    ("release_month", lambda r: r.release_month is not None and 1 <= r.release_month <= 12),
    ("budget", lambda r: r.budget is not None and r.budget > 0),
    ("revenue", lambda r: r.revenue is not None and r.revenue >= 0),
    ("runtime", lambda r: r.runtime is not None and r.runtime > 0),
    ("content_rating", lambda r: r.content_rating in CONTENT_RATINGS),
    ("genres", lambda r: len(r.genres) > 0),
    ("cast", lambda r: len(r.cast) > 0),
    ("directors", lambda r: len(r.directors) > 0),
    ("creators", lambda r: len(r.creators) > 0),
    ("imdb_rating", lambda r: r.imdb_rating is not None and 1.0 <= r.imdb_rating <= 10.0),
    ("rater_count", lambda r: r.rater_count is not None and r.rater_count >= 0),
)


def clean(records) -> tuple[list[MovieRecord], CleanReport]:
    """Drop every record with a missing or invalid required attribute.

    No imputation: a record either has all attributes populated and valid or
    it is dropped.  Each dropped record is attributed to the first failing
    field in a fixed check order.  Zero-budget records are dropped (budget is
    a regression denominator downstream).
    """
    kept = []
    dropped: dict[str, int] = {}
    for record in records:
        for name, ok in _CLEAN_CHECKS:
            if not ok(record):
                dropped[name] = dropped.get(name, 0) + 1
                break
        else:
            kept.append(record)
    return kept, CleanReport(kept=len(kept), dropped_by_missing_field=dropped)


def filter_years(records, year_from=None, year_to=None):
    """Keep records whose release year lies in [year_from, year_to]."""
    out = []
    for r in records:
        if r.release_year is None:
            continue
        if year_from is not None and r.release_year < year_from:
            continue
        if year_to is not None and r.release_year > year_to:
            continue
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# Inflation adjustment

@dataclass(frozen=True)
class CpiTable:
    """Year -> consumer-price-index mapping with a chosen reference year.

    Amounts are rescaled to reference-year dollars by the factor
    ``CPI(reference_year) / CPI(from_year)``.
    """

    entries: dict[int, float]
    reference_year: int

    def __post_init__(self):
        if not self.entries:
            raise ValueError("CPI table is empty")
        for year, index in self.entries.items():
            if index <= 0:
                raise ValueError(f"CPI index for {year} must be positive, got {index}")
        if self.reference_year not in self.entries:
            raise MissingYearError(f"reference year {self.reference_year} not in CPI table")

    @classmethod
    def from_pairs(cls, pairs, reference_year=None) -> "CpiTable":
        entries = {int(y): float(v) for y, v in pairs}
        if reference_year is None:
            reference_year = max(entries)
        return cls(entries=entries, reference_year=reference_year)

    @classmethod
    def from_text(cls, source, reference_year=None) -> "CpiTable":
        """Parse a two-column (year, index) text table; '#' starts a comment."""
        if isinstance(source, (str, os.PathLike)):
            with open(source, "r", encoding="utf-8") as fh:
                return cls.from_text(fh, reference_year)
        pairs = []
        for raw in source:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"bad CPI table line: {raw.rstrip()}")
            pairs.append((int(parts[0]), float(parts[1])))
        return cls.from_pairs(pairs, reference_year)

    def index(self, year: int) -> float:
        try:
            return self.entries[year]
        except KeyError:
            raise MissingYearError(f"year {year} not covered by CPI table") from None

    def factor(self, from_year: int) -> float:
        return self.index(self.reference_year) / self.index(from_year)


def default_cpi_table(reference_year=None) -> CpiTable:
    """The U.S. CPI-U annual table shipped with the package."""
    text = resources.files("boxoffice.data").joinpath("cpi_us_annual.txt").read_text()
    return CpiTable.from_text(io.StringIO(text), reference_year)


def inflation_rate(cpi1: float, cpi2: float) -> float:
    """Percent inflation between two CPI readings: ((cpi2 - cpi1) / cpi1) * 100."""
    if cpi1 <= 0:
        raise ValueError(f"cpi1 must be positive, got {cpi1}")
    return (cpi2 - cpi1) / cpi1 * 100.0


def adjust_for_inflation(amount: int, from_year: int, table: CpiTable) -> int:
    """Rescale integer cents from `from_year` dollars to reference-year dollars."""
    return round(amount * table.factor(from_year))


def adjust_dataset(records, table: CpiTable):
    """Adjust budget and revenue of every record to reference-year dollars."""
    out = []
    for r in records:
        if r.release_year is None:
            raise MissingYearError(f"record {r.id!r} has no release year")
        out.append(dataclasses.replace(
            r,
            budget=None if r.budget is None else adjust_for_inflation(r.budget, r.release_year, table),
            revenue=None if r.revenue is None else adjust_for_inflation(r.revenue, r.release_year, table),
        ))
    return out


def unadjust_revenue(record: MovieRecord, table: CpiTable) -> int:
    """Invert the adjustment of a record's revenue (back to nominal dollars)."""
    return round(record.revenue / table.factor(record.release_year))


# ---------------------------------------------------------------------------
# Synthetic datasets

SYNTHETIC_GENRES = (
    "Action", "Adventure", "Animation", "Biography", "Comedy", "Crime",
    "Documentary", "Drama", "Family", "Fantasy", "History", "Horror",
    "Music", "Musical", "Mystery", "Romance", "Sci-Fi", "Sport",
    "Thriller", "War", "Western",
)

# Preferred content ratings per budget tier: micro-budget titles skew to the
# TV/unrated labels, mid budgets to R, blockbusters to PG-13/PG/G.
_TIER_RATINGS = (
    ("Not Rated", "Unrated", "TV-MA", "TV-14"),
    ("Not Rated", "TV-MA", "R"),
    ("Not Rated", "R"),
    ("R",),
    ("R",),
    ("R", "PG-13"),
    ("PG-13", "R"),
    ("PG-13", "PG"),
    ("PG-13", "PG"),
    ("PG", "G", "PG-13"),
)

# Months ordered from least to most lucrative; big releases target the
# summer and holiday windows.
_MONTHS_BY_APPEAL = (1, 2, 9, 8, 10, 3, 4, 11, 6, 12, 5, 7)

_BUDGET_LO = 1e6       # dollars
_BUDGET_BAND = 10e6    # dollars per decile band
_BUDGET_MARGIN = 0.2   # fraction of each band left empty at both edges

# Revenue band per class, strictly inside the default bucket edges so that
# the class of a generated movie is a deterministic function of its decile.
_REVENUE_BANDS = (
    (0.10e6, 0.95e6),
    (1.05e6, 9.5e6),
    (10.5e6, 19.0e6),
    (21.0e6, 38.0e6),
    (42.0e6, 62.0e6),
    (68.0e6, 95.0e6),
    (105.0e6, 142.0e6),
    (157.0e6, 214.0e6),
    (236.0e6, 332.0e6),
    (368.0e6, 600.0e6),
)


@dataclass
class SyntheticConfig:
    n_movies: int
    n_actors: int = 200
    year_range: tuple[int, int] = (2000, 2019)
    revenue_law: str = "budget-monotone"
    noise: float = 0.05
    tier_fidelity: float = 0.9  # chance a credit comes from the budget tier's pool


def _tiered_names(rng, pool, k, tier, fidelity):
    """Draw k distinct names, mostly from the budget tier's slice of the pool.

    Pools are split into 10 tiers; big-budget movies hire from the top
    slices, so entity filmographies correlate with budget the way star
    casts do in real data.
    """
    n = len(pool)
    k = min(k, n)
    slice_size = max(1, n // 10)
    chosen: list[int] = []
    seen = set()
    while len(chosen) < k:
        t = tier if rng.random() < fidelity else int(rng.integers(0, 10))
        lo = min(t * slice_size, n - 1)
        hi = min(lo + slice_size, n)
        i = int(rng.integers(lo, hi))
        if i not in seen:
            seen.add(i)
            chosen.append(i)
        elif len(seen) >= n:
            break
    return [pool[i] for i in chosen]


def generate_synthetic(config: SyntheticConfig, seed: int) -> list[MovieRecord]:
    """Deterministically generate a dataset that survives cleaning unchanged.

    Under the ``budget-monotone`` law the budget decile picks the revenue
    class and revenue is a strictly increasing function of budget; with
    ``noise = 0`` the revenue rank order equals the budget rank order, and
    with ``noise > 0`` the jitter stays inside the class band so the class
    remains a deterministic function of the decile.  Casts, directors,
    creators and studios are drawn mostly from per-tier pools, so star-power
    features carry real signal.
    """
    if config.n_movies < 0:
        raise ValueError("n_movies must be non-negative")
    if config.revenue_law != "budget-monotone":
        raise ValueError(f"unknown revenue law {config.revenue_law!r}")

    rng = np.random.default_rng(seed)
    actors = [f"Actor {i:04d}" for i in range(config.n_actors)]
    directors = [f"Director {i:04d}" for i in range(max(20, config.n_actors // 4))]
    creators = [f"Creator {i:04d}" for i in range(max(20, config.n_actors // 3))]
    companies = [f"Studio {i:03d}" for i in range(max(20, config.n_actors // 10))]
    y0, y1 = config.year_range
    fidelity = config.tier_fidelity

    records = []
    for i in range(config.n_movies):
        decile = int(rng.integers(0, 10))
        within = _BUDGET_MARGIN + (1.0 - 2.0 * _BUDGET_MARGIN) * rng.random()
        budget = _BUDGET_LO + (decile + within) * _BUDGET_BAND

        lo, hi = _REVENUE_BANDS[decile]
        revenue = lo + within * (hi - lo)
        if config.noise > 0:
            revenue *= 1.0 + config.noise * (2.0 * rng.random() - 1.0)
            revenue = min(max(revenue, lo), hi)

        if rng.random() < fidelity:
            rating_pool = _TIER_RATINGS[decile]
            content_rating = rating_pool[int(rng.integers(0, len(rating_pool)))]
            month = _MONTHS_BY_APPEAL[min(11, round((decile + within) * 1.2))]
        else:
            content_rating = CONTENT_RATINGS[int(rng.integers(0, len(CONTENT_RATINGS)))]
            month = int(rng.integers(1, 13))

        n_cast = int(rng.integers(8, 11))
        n_genres = int(rng.integers(1, 4))
        records.append(MovieRecord(
            id=f"s{i:06d}",
            title=f"Synthetic Movie {i}",
            release_year=int(rng.integers(y0, y1 + 1)),
            release_month=month,
            budget=dollars_to_cents(budget),
            revenue=dollars_to_cents(revenue),
            runtime=int(78 + 9.5 * (decile + within) + rng.uniform(-5.0, 5.0)),
            content_rating=content_rating,
            genres=sorted(SYNTHETIC_GENRES[j] for j in rng.choice(
                len(SYNTHETIC_GENRES), size=n_genres, replace=False)),
            cast=_tiered_names(rng, actors, n_cast, decile, fidelity),
            directors=_tiered_names(rng, directors, int(rng.integers(2, 4)), decile, fidelity),
            creators=_tiered_names(rng, creators, int(rng.integers(3, 6)), decile, fidelity),
            production_companies=_tiered_names(rng, companies, int(rng.integers(2, 4)),
                                               decile, fidelity),
            # ratings and rater counts track the budget tier (rater volume
            # follows revenue much more tightly than the rating itself)
            imdb_rating=round(3.0 + 0.55 * (decile + within)
                              + float(rng.uniform(-0.4, 0.4)), 1),
            rater_count=int((0.2 + decile + within) * 1e5
                            * math.exp(rng.normal(0.0, 0.1))),
        ))
    return records
