import numpy as np
import pytest

from boxoffice import features
from boxoffice.errors import UnknownRatingError
from boxoffice.ingest import SyntheticConfig, generate_synthetic
from boxoffice.stats import MonthStat, month_stats
from conftest import make_movie


def empty_month_stats():
    return {m: MonthStat(count=0, mean_revenue=None) for m in range(1, 13)}


class TestHistoryIndex:
    def test_empty_dataset(self):
        index = features.build_history_index([])
        assert index.credits_before("actor", "Anyone", 2020) == []

    def test_strict_year_cutoff(self):
        records = [make_movie(id="a", year=2001, cast=("X",)),
                   make_movie(id="b", year=2003, cast=("X",))]
        index = features.build_history_index(records)
        before = index.credits_before("actor", "X", 2003)
        assert [c.year for c in before] == [2001]
        assert [c.year for c in index.credits_before("actor", "X", 2004)] == [2001, 2003]
        assert index.credits_before("actor", "X", 2001) == []

    def test_shuffled_rebuild_gives_identical_answers(self):
        records = generate_synthetic(SyntheticConfig(n_movies=120, n_actors=40), seed=11)
        index = features.build_history_index(records)
        rng = np.random.default_rng(0)
        for _ in range(5):
            shuffled = [records[i] for i in rng.permutation(len(records))]
            other = features.build_history_index(shuffled)
            for movie in records[:30]:
                for name in movie.cast:
                    a = index.credits_before("actor", name, movie.release_year)
                    b = other.credits_before("actor", name, movie.release_year)
                    assert a == b

    def test_duplicate_name_in_one_movie_counts_once(self):
        records = [make_movie(id="a", year=2000, cast=("X", "X")),
                   make_movie(id="b", year=2005, cast=("X",))]
        index = features.build_history_index(records)
        assert len(index.credits_before("actor", "X", 2005)) == 1

    def test_window_query(self):
        records = [make_movie(id=str(y), year=y, genres=("Drama",))
                   for y in (2000, 2004, 2005, 2009, 2010)]
        index = features.build_history_index(records)
        window = index.credits_in_window("genre", "Drama", 2005, 2009)
        assert [c.year for c in window] == [2005, 2009]


class TestEntityPower:
    def test_debut_entity_is_all_zeros(self):
        index = features.build_history_index([make_movie(year=2010, cast=("A",))])
        block = features.entity_power("A", "actor", 2010, index)
        assert block == features.PowerBlock(0, 0, 0, 0, 0, 0)

    def test_hand_aggregation(self):
        records = [
            make_movie(id="p1", year=2000, revenue=100, cast=("A",), raters=10, rating=6.0),
            make_movie(id="p2", year=2001, revenue=300, cast=("A",), raters=30, rating=8.0),
        ]
        index = features.build_history_index(records)
        block = features.entity_power("A", "actor", 2005, index)
        assert block == features.PowerBlock(2.0, 400.0, 200.0, 40.0, 20.0, 7.0)

    def test_cutoff_before_first_credit(self):
        records = [make_movie(id="p1", year=2000, cast=("A",))]
        index = features.build_history_index(records)
        assert features.entity_power("A", "actor", 1999, index) == features.PowerBlock(
            0, 0, 0, 0, 0, 0)

    def test_block_consistency_totals(self):
        records = generate_synthetic(SyntheticConfig(n_movies=200, n_actors=30), seed=2)
        index = features.build_history_index(records)
        for movie in records[:50]:
            for name in movie.cast:
                b = features.entity_power(name, "actor", movie.release_year, index)
                assert b.avg_revenue * b.n_movies == pytest.approx(b.total_revenue, rel=1e-9)
                assert b.avg_raters * b.n_movies == pytest.approx(b.total_raters, rel=1e-9)


class TestEntityBlock:
    def test_cast_truncated_to_ten_slots(self):
        cast = tuple(f"A{i}" for i in range(12))
        history = [make_movie(id="h", year=2000, cast=("A10", "A11"))]
        movie = make_movie(id="m", year=2010, cast=cast)
        index = features.build_history_index(history + [movie])
        block = features.entity_block(movie, "actor", index)
        assert block.shape == (60,)
        # A10/A11 have prior credits but sit past slot 10, so everything is zero
        assert np.all(block == 0.0)

    def test_single_director_zero_padded(self):
        history = [make_movie(id="h", year=2005, directors=("D",), revenue=100)]
        movie = make_movie(id="m", year=2010, directors=("D",))
        index = features.build_history_index(history + [movie])
        block = features.entity_block(movie, "director", index)
        assert block.shape == (18,)
        assert np.any(block[:6] != 0.0)
        assert np.all(block[6:] == 0.0)

    def test_empty_creator_list_is_all_zeros(self):
        movie = make_movie(creators=())
        index = features.build_history_index([movie])
        block = features.entity_block(movie, "creator", index)
        assert block.shape == (30,)
        assert np.all(block == 0.0)


class TestFamiliarity:
    def test_no_prior_coappearance(self):
        movie = make_movie(cast=("A", "B", "C"))
        index = features.build_history_index([movie])
        assert features.familiarity(movie, index) == (0.0, 0.0, 0.0, 0.0)

    def test_single_actor_cast(self):
        movie = make_movie(cast=("A",))
        index = features.build_history_index([movie])
        assert features.familiarity(movie, index) == (0.0, 0.0, 0.0, 0.0)

    def test_hand_computed_cosine_third(self):
        # A-B co-appeared once, A-C once, B-C never:
        # rows A=[0,1,1], B=[1,0,0], C=[1,0,0]; cosines 0, 0, 1 -> mean 1/3
        history = [
            make_movie(id="m1", year=2000, cast=("A", "B")),
            make_movie(id="m2", year=2001, cast=("A", "C")),
        ]
        movie = make_movie(id="t", year=2005, cast=("A", "B", "C"))
        index = features.build_history_index(history + [movie])
        avg_cos, *_ = features.familiarity(movie, index)
        assert avg_cos == pytest.approx(1 / 3)

    def test_max_pair_average_revenue(self):
        history = [
            make_movie(id="m1", year=2000, revenue=100e6, cast=("A", "B"), raters=100, rating=6.0),
            make_movie(id="m2", year=2001, revenue=300e6, cast=("A", "B"), raters=300, rating=8.0),
        ]
        movie = make_movie(id="t", year=2005, cast=("A", "B", "C"))
        index = features.build_history_index(history + [movie])
        _, max_rev, max_raters, max_rating = features.familiarity(movie, index)
        assert max_rev == pytest.approx(200e6)
        assert max_raters == pytest.approx(200.0)
        assert max_rating == pytest.approx(7.0)

    def test_cosine_within_bounds_and_permutation_invariant(self):
        records = generate_synthetic(SyntheticConfig(n_movies=150, n_actors=25), seed=4)
        index = features.build_history_index(records)
        rng = np.random.default_rng(1)
        for movie in records[-20:]:
            base = features.familiarity(movie, index)
            assert 0.0 <= base[0] <= 1.0 + 1e-12
            cast10 = movie.cast[:10]
            shuffled = make_movie(id=movie.id, year=movie.release_year,
                                  cast=[cast10[i] for i in rng.permutation(len(cast10))])
            # permuting the (<=10) graph nodes leaves all four values unchanged
            assert features.familiarity(shuffled, index) == pytest.approx(base, abs=1e-12)


class TestGenrePower:
    def test_window_boundaries(self):
        # movie in 2010: a 2004 credit (6 years prior) is out, 2005 is in
        history = [make_movie(id="old", year=2004, genres=("Drama",), revenue=100),
                   make_movie(id="edge", year=2005, genres=("Drama",), revenue=200)]
        movie = make_movie(id="t", year=2010, genres=("Drama",))
        index = features.build_history_index(history + [movie])
        block = features.genre_power(movie, index)
        assert block[0] == 1.0  # only the 2005 credit
        assert block[1] == pytest.approx(200.0)

    def test_same_year_excluded(self):
        history = [make_movie(id="same", year=2010, genres=("Drama",))]
        movie = make_movie(id="t", year=2010, genres=("Drama",))
        index = features.build_history_index(history + [movie])
        assert np.all(features.genre_power(movie, index) == 0.0)

    def test_two_genres_pad_remaining_slots(self):
        history = [make_movie(id="h", year=2008, genres=("Drama", "Action"))]
        movie = make_movie(id="t", year=2010, genres=("Drama", "Action"))
        index = features.build_history_index(history + [movie])
        block = features.genre_power(movie, index)
        assert block.shape == (30,)
        assert np.any(block[:12] != 0.0)
        assert np.all(block[12:] == 0.0)

    def test_no_releases_in_window(self):
        history = [make_movie(id="h", year=1990, genres=("Drama",))]
        movie = make_movie(id="t", year=2010, genres=("Drama",))
        index = features.build_history_index(history + [movie])
        assert np.all(features.genre_power(movie, index)[:6] == 0.0)


class TestMonthAndRating:
    def test_month_index(self):
        movie = make_movie(month=7)
        idx, mean = features.month_features(movie, empty_month_stats())
        assert idx == 7.0
        assert mean == 0.0

    def test_month_mean_from_training_stats(self):
        stats = empty_month_stats()
        stats[7] = MonthStat(count=10, mean_revenue=50e6)
        _, mean = features.month_features(make_movie(month=7), stats)
        assert mean == pytest.approx(50e6)

    def test_same_month_same_features(self):
        stats = month_stats([make_movie(id="a", month=4, revenue=10e6)])
        f1 = features.month_features(make_movie(id="x", month=4), stats)
        f2 = features.month_features(make_movie(id="y", month=4), stats)
        assert f1 == f2

    @pytest.mark.parametrize("label,expected", [
        ("PG-13", [1, 0, 0, 0]),
        ("NC-17", [0, 1, 0, 0]),
        ("TV-MA", [0, 0, 1, 0]),
        ("G", [0, 0, 0, 1]),
    ])
    def test_onehot(self, label, expected):
        assert features.content_rating_onehot(label).tolist() == expected

    def test_onehot_unknown_rating(self):
        with pytest.raises(UnknownRatingError):
            features.content_rating_onehot(make_movie(content_rating="WAT"))


class TestAssemble:
    def test_vector_length_is_180(self):
        movie = make_movie()
        index = features.build_history_index([movie])
        vec = features.assemble(movie, index, empty_month_stats())
        assert vec.shape == (features.N_FEATURES,)
        assert features.N_FEATURES == 180

    def test_debut_everything_zeroes_power_segments(self):
        movie = make_movie(budget=20e6, runtime=110, month=6)
        index = features.build_history_index([movie])
        vec = features.assemble(movie, index, empty_month_stats())
        assert vec[0] == pytest.approx(20e6)
        assert vec[1] == 110.0
        assert vec[2] == 6.0
        assert vec[4:8].sum() == 1.0
        # every power, genre and familiarity segment is zero padding
        assert np.all(vec[8:] == 0.0)

    def test_deterministic(self):
        records = generate_synthetic(SyntheticConfig(n_movies=60, n_actors=20), seed=9)
        index = features.build_history_index(records)
        stats = month_stats(records)
        a = features.assemble(records[-1], index, stats)
        b = features.assemble(records[-1], index, stats)
        assert np.array_equal(a, b)

    def test_segment_name_count(self):
        assert len(features.FEATURE_NAMES) == 180
        assert features.FEATURE_NAMES[0] == "budget"
        assert features.FEATURE_NAMES[176] == "familiarity_avg_cosine"

    def test_temporal_hygiene(self):
        # deleting every record from the movie's year onward must not change
        # any feature: history is the only year-sensitive input
        records = generate_synthetic(SyntheticConfig(n_movies=250, n_actors=40), seed=21)
        index = features.build_history_index(records)
        stats = month_stats(records)
        rng = np.random.default_rng(3)
        for i in rng.choice(len(records), size=40, replace=False):
            movie = records[i]
            past_only = [r for r in records if r.release_year < movie.release_year]
            filtered_index = features.build_history_index(past_only)
            full = features.assemble(movie, index, stats)
            filtered = features.assemble(movie, filtered_index, stats)
            assert np.array_equal(full, filtered)


class TestScaler:
    def test_training_column_maps_to_unit_interval(self):
        params = features.fit_scaler(np.array([[0.0], [10.0]]))
        scaled = features.apply_scaler(np.array([[0.0], [10.0]]), params)
        assert scaled.ravel().tolist() == [0.0, 1.0]

    def test_test_value_not_clamped(self):
        params = features.fit_scaler(np.array([[0.0], [10.0]]))
        assert features.apply_scaler(np.array([20.0]), params).item() == pytest.approx(2.0)

    def test_constant_column_maps_to_zero(self):
        params = features.fit_scaler(np.array([[5.0, 1.0], [5.0, 3.0]]))
        scaled = features.apply_scaler(np.array([[5.0, 2.0], [7.0, 3.0]]), params)
        assert scaled[:, 0].tolist() == [0.0, 0.0]
        assert scaled[:, 1].tolist() == [0.5, 1.0]

    def test_dimension_mismatch_rejected(self):
        params = features.fit_scaler(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            features.apply_scaler(np.zeros(4), params)

    def test_roundtrip_through_dict(self):
        params = features.fit_scaler(np.array([[0.0, 2.0], [1.0, 8.0]]))
        again = features.ScalingParams.from_dict(params.to_dict())
        assert np.array_equal(again.mins, params.mins)
        assert np.array_equal(again.maxs, params.maxs)
