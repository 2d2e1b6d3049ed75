import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from boxoffice.ingest import CpiTable, MovieRecord, dollars_to_cents


def make_movie(id="m1", year=2010, month=6, budget=20e6, revenue=50e6,
               runtime=110, content_rating="PG-13", genres=("Drama",),
               cast=("Actor A",), directors=("Director A",),
               creators=("Creator A",), production=("Studio A",),
               rating=7.0, raters=1000):
    return MovieRecord(
        id=id, title=f"Movie {id}", release_year=year, release_month=month,
        budget=dollars_to_cents(budget), revenue=dollars_to_cents(revenue),
        runtime=runtime, content_rating=content_rating, genres=list(genres),
        cast=list(cast), directors=list(directors), creators=list(creators),
        production_companies=list(production), imdb_rating=rating,
        rater_count=raters,
    )


@pytest.fixture
def flat_cpi():
    """All years share one index, so adjustment is the identity."""
    return CpiTable.from_pairs([(y, 100.0) for y in range(1960, 2031)],
                               reference_year=2020)
