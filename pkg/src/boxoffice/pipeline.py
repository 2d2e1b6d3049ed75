"""End-to-end stages shared by the CLI, the demos, and the test suite:
the analysis battery over a cleaned dataset, dataset featurization
(bucketize -> balance -> split -> history index -> assemble -> scale),
model training/serialization, and single-movie prediction.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import features, stats
from .classify import (
    DEFAULT_BUCKETS,
    AllThresholdModel,
    ClassBuckets,
    EnsembleModel,
    FrankHallModel,
    frank_hall_fit,
    labels_for,
    make_classifier_factory,
    balance,
    split,
)
from .ingest import CpiTable, MovieRecord, cents_to_dollars, unadjust_revenue

MODEL_KINDS = ("frank-hall-logistic", "frank-hall-forest", "all-threshold", "ensemble")
ENSEMBLE_MEMBERS = ("frank-hall-logistic", "frank-hall-forest", "all-threshold")


# ---------------------------------------------------------------------------
# Featurization

@dataclass
class FeaturizeResult:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    scaler: features.ScalingParams
    month_stats: dict[int, stats.MonthStat]
    class_counts: list[int]          # pre-balance counts per class
    train_ids: list[str]
    test_ids: list[str]


def featurize_dataset(records, seed: int, test_fraction: float = 0.3,
                      buckets: ClassBuckets = DEFAULT_BUCKETS,
                      power_revenue: str = "adjusted",
                      cpi: CpiTable | None = None) -> FeaturizeResult:
    """Build scaled train/test matrices from cleaned, adjusted records.

    Labels always come from the adjusted revenue in the records.  The
    history index that feeds the power and familiarity features is built
    from the training split only, so no test-set revenue enters any
    feature.  With ``power_revenue="nominal"`` the index sees revenues
    mapped back to nominal dollars through the CPI table.
    """
    records = list(records)
    labels = labels_for(records, buckets)
    class_counts = np.bincount(labels, minlength=buckets.n_classes)

    balanced_idx = balance(labels, seed=seed, n_classes=buckets.n_classes)
    balanced = [records[i] for i in balanced_idx]
    balanced_labels = labels[balanced_idx]

    train_idx, test_idx = split(len(balanced), test_fraction=test_fraction, seed=seed)
    train_records = [balanced[i] for i in train_idx]
    test_records = [balanced[i] for i in test_idx]

    history_records = train_records
    if power_revenue == "nominal":
        if cpi is None:
            raise ValueError("nominal power revenue requires a CPI table")
        history_records = [
            dataclasses.replace(r, revenue=unadjust_revenue(r, cpi))
            for r in train_records
        ]
    elif power_revenue != "adjusted":
        raise ValueError(f"unknown power_revenue mode {power_revenue!r}")

    index = features.build_history_index(history_records)
    train_month_stats = stats.month_stats(train_records)

    train_x = features.assemble_matrix(train_records, index, train_month_stats)
    test_x = features.assemble_matrix(test_records, index, train_month_stats)
    scaler = features.fit_scaler(train_x)
    return FeaturizeResult(
        train_x=features.apply_scaler(train_x, scaler),
        train_y=balanced_labels[train_idx],
        test_x=features.apply_scaler(test_x, scaler),
        test_y=balanced_labels[test_idx],
        scaler=scaler,
        month_stats=train_month_stats,
        class_counts=[int(c) for c in class_counts],
        train_ids=[r.id for r in train_records],
        test_ids=[r.id for r in test_records],
    )


# ---------------------------------------------------------------------------
# Training and model documents

def train_model(kind: str, train_x, train_y, seed: int, n_classes: int = 10):
    if kind == "frank-hall-logistic":
        return frank_hall_fit(train_x, train_y,
                              make_classifier_factory("logistic", seed), n_classes)
    if kind == "frank-hall-forest":
        return frank_hall_fit(train_x, train_y,
                              make_classifier_factory("forest", seed), n_classes)
    if kind == "all-threshold":
        model = AllThresholdModel(n_classes=n_classes, seed=seed)
        return model.fit(train_x, train_y)
    if kind == "ensemble":
        members = [train_model(m, train_x, train_y, seed, n_classes)
                   for m in ENSEMBLE_MEMBERS]
        return EnsembleModel(members, member_kinds=list(ENSEMBLE_MEMBERS),
                             n_classes=n_classes)
    raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")


def model_to_document(model, kind: str, seed: int) -> dict:
    if isinstance(model, EnsembleModel):
        return {
            "kind": "ensemble",
            "seed": seed,
            "members": model.member_kinds,
            "models": [model_to_document(m, k, seed)
                       for m, k in zip(model.members, model.member_kinds)],
        }
    return {"kind": kind, "seed": seed, "model": model.to_dict()}


def model_from_document(doc):
    kind = doc["kind"]
    if kind == "ensemble":
        members = [model_from_document(m) for m in doc["models"]]
        return EnsembleModel(members, member_kinds=doc["members"])
    if kind.startswith("frank-hall"):
        return FrankHallModel.from_dict(doc["model"])
    if kind == "all-threshold":
        return AllThresholdModel.from_dict(doc["model"])
    raise ValueError(f"unknown model kind {kind!r}")


def predict_movie(model, movie: MovieRecord, index: features.HistoryIndex,
                  month_statistics: dict[int, stats.MonthStat],
                  scaler: features.ScalingParams):
    """Predicted class plus a 10-value class-score breakdown for one movie."""
    vector = features.apply_scaler(features.assemble(movie, index, month_statistics), scaler)
    label = int(np.asarray(model.predict(vector)).ravel()[0])
    if hasattr(model, "predict_scores"):
        scores = np.asarray(model.predict_scores(vector)).ravel()
    else:
        scores = model.vote_scores(np.atleast_2d(vector)).ravel()
    return label, scores


# ---------------------------------------------------------------------------
# The analysis battery

def _scaled_pair(xs, ys):
    sx, _, _ = stats.min_max_scale(xs)
    sy, _, _ = stats.min_max_scale(ys)
    return sx, sy


def _correlation_section(xs, ys):
    sx, sy = _scaled_pair(xs, ys)
    rho = stats.spearman(sx, sy)
    fit = stats.ols_fit(sx, sy)
    return {
        "spearman": {"statistic": rho.statistic, "p_value": rho.p_value},
        "ols": {"slope": fit.slope, "intercept": fit.intercept,
                "residual_sum_squares": fit.residual_sum_squares},
    }


def _skip(reason) -> dict:
    return {"skipped": str(reason)}


def analyze_dataset(records, include_dual_genre: bool = True,
                    star_thresholds=None) -> dict:
    """Every association result over a cleaned, adjusted dataset.

    Sections that cannot run on the given data (too few rows, missing
    groups) are marked ``{"skipped": reason}`` instead of aborting.
    """
    records = list(records)
    revenue = np.array([cents_to_dollars(r.revenue) for r in records])
    budget = np.array([cents_to_dollars(r.budget) for r in records])
    report: dict = {"n_records": len(records)}
    if not records:
        return {"n_records": 0, "skipped": "empty dataset"}

    years = sorted({r.release_year for r in records})
    report["year_totals"] = {
        str(y): {
            "budget": float(budget[[r.release_year == y for r in records]].sum()),
            "revenue": float(revenue[[r.release_year == y for r in records]].sum()),
        }
        for y in years
    }

    # 50-million-dollar histogram buckets up to 500 million
    edges = np.arange(0, 550e6, 50e6)
    report["money_histogram"] = {
        "bucket_low": edges[:-1].tolist(),
        "budget": np.histogram(budget, bins=edges)[0].tolist(),
        "revenue": np.histogram(revenue, bins=edges)[0].tolist(),
    }

    try:
        report["budget_vs_revenue"] = _correlation_section(budget, revenue)
    except Exception as exc:
        report["budget_vs_revenue"] = _skip(exc)

    runtime = np.array([r.runtime for r in records], dtype=float)
    try:
        section = _correlation_section(runtime, revenue)
        sx, sy = _scaled_pair(runtime, revenue)
        fit = stats.poly_fit(sx, sy, 6)
        section["poly6"] = {"coefficients": fit.coefficients.tolist(),
                            "residual_sum_squares": fit.residual_sum_squares}
        report["runtime_vs_revenue"] = section
    except Exception as exc:
        report["runtime_vs_revenue"] = _skip(exc)

    months = stats.month_stats(records)
    report["month_stats"] = {
        str(m): {"count": s.count, "mean_revenue": s.mean_revenue}
        for m, s in months.items()
    }

    rating_groups: dict[str, list[float]] = {}
    for r, rev in zip(records, revenue):
        rating_groups.setdefault(r.content_rating, []).append(float(rev))
    report["content_rating_counts"] = {k: len(v) for k, v in rating_groups.items()}
    if "PG-13" in rating_groups and "R" in rating_groups:
        result = stats.ks_two_sample(rating_groups["PG-13"], rating_groups["R"])
        report["ks_pg13_vs_r"] = {"statistic": result.statistic, "p_value": result.p_value}
    else:
        report["ks_pg13_vs_r"] = _skip("PG-13 or R group missing")
    try:
        report["rating_ks_matrix"] = stats.pairwise_ks_matrix(rating_groups).to_dict()
    except Exception as exc:
        report["rating_ks_matrix"] = _skip(exc)

    cluster_groups: dict[str, list[float]] = {}
    for r, rev in zip(records, revenue):
        cluster_groups.setdefault(stats.cluster_content_rating(r.content_rating), []).append(float(rev))
    ordered = {c: cluster_groups[c] for c in stats.CLUSTER_ORDER if c in cluster_groups}
    try:
        report["rating_cluster_ks_matrix"] = stats.pairwise_ks_matrix(ordered).to_dict()
    except Exception as exc:
        report["rating_cluster_ks_matrix"] = _skip(exc)

    genre_groups: dict[str, list[float]] = {}
    genre_year_revenue: dict[str, dict[int, list[float]]] = {}
    genre_year_budget: dict[str, dict[int, list[float]]] = {}
    for r, rev, bud in zip(records, revenue, budget):
        for g in r.genres:
            genre_groups.setdefault(g, []).append(float(rev))
            genre_year_revenue.setdefault(g, {}).setdefault(r.release_year, []).append(float(rev))
            genre_year_budget.setdefault(g, {}).setdefault(r.release_year, []).append(float(bud))
    report["genre_counts"] = {g: len(v) for g, v in genre_groups.items()}
    report["genre_rolling_5y"] = {
        g: {
            "revenue": {str(y): v for y, v in stats.rolling_average(
                {y: float(np.mean(vals)) for y, vals in genre_year_revenue[g].items()}, 5).items()},
            "budget": {str(y): v for y, v in stats.rolling_average(
                {y: float(np.mean(vals)) for y, vals in genre_year_budget[g].items()}, 5).items()},
        }
        for g in sorted(genre_groups)
    }

    if "Sci-Fi" in genre_groups and "Family" in genre_groups:
        if include_dual_genre:
            scifi, family = genre_groups["Sci-Fi"], genre_groups["Family"]
        else:
            scifi = [float(rev) for r, rev in zip(records, revenue)
                     if "Sci-Fi" in r.genres and "Family" not in r.genres]
            family = [float(rev) for r, rev in zip(records, revenue)
                      if "Family" in r.genres and "Sci-Fi" not in r.genres]
        dual = sum(1 for r in records if "Sci-Fi" in r.genres and "Family" in r.genres)
        if scifi and family:
            result = stats.ks_two_sample(scifi, family)
            report["ks_scifi_vs_family"] = {
                "statistic": result.statistic, "p_value": result.p_value,
                "dual_genre_movies": dual, "dual_genre_included": include_dual_genre,
            }
        else:
            report["ks_scifi_vs_family"] = _skip("a genre group became empty")
    else:
        report["ks_scifi_vs_family"] = _skip("Sci-Fi or Family group missing")
    try:
        report["genre_ks_matrix"] = stats.pairwise_ks_matrix(
            {g: genre_groups[g] for g in sorted(genre_groups)}).to_dict()
    except Exception as exc:
        report["genre_ks_matrix"] = _skip(exc)

    thresholds = dict(stats.STAR_THRESHOLD_DEFAULTS)
    if star_thresholds:
        thresholds.update(star_thresholds)
    index = features.build_history_index(records)
    report["star_power"] = {}
    for role, (th_movies, th_revenue_dollars) in thresholds.items():
        try:
            result = stats.star_split(records, role, th_movies,
                                      round(th_revenue_dollars * 100), index)
        except Exception as exc:
            report["star_power"][role] = _skip(exc)
            continue
        entry = {
            "th_movies": th_movies,
            "th_revenue": th_revenue_dollars,
            "star_movies": int(result.star_revenues.size),
            "nostar_movies": int(result.nostar_revenues.size),
        }
        if result.test is None:
            entry["test"] = _skip("one side of the split is empty")
        else:
            entry["test"] = {"statistic": result.test.statistic,
                             "p_value": result.test.p_value}
            entry["mean_difference"] = result.mean_difference
        report["star_power"][role] = entry

    ratings = np.array([r.imdb_rating for r in records], dtype=float)
    raters = np.array([r.rater_count for r in records], dtype=float)
    try:
        report["rating_vs_revenue"] = _correlation_section(ratings, revenue)
    except Exception as exc:
        report["rating_vs_revenue"] = _skip(exc)
    try:
        report["raters_vs_revenue"] = _correlation_section(raters, revenue)
    except Exception as exc:
        report["raters_vs_revenue"] = _skip(exc)
    return report
