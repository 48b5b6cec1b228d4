"""SUS scoring, Tukey-hinge box summaries, and per-component attitudes."""
import pytest
from hypothesis import given, strategies as st
from oracles import oracle_box

from evalcards.fixtures import fixture_model
from evalcards.survey import (
    ComponentRating,
    EmptyRatings,
    SurveyFormatError,
    SusResponse,
    UnknownComponent,
    component_attitudes,
    likert_box,
    load_ratings_csv,
    load_sus_csv,
    sus_score,
    sus_scores_by_user,
)
from evalcards.synth import SplitMix64


def sus(items):
    return SusResponse(user_id="u", items=tuple(items))


# --------------------------------------------------------------------------
# SUS
# --------------------------------------------------------------------------


def test_sus_midpoint_is_fifty():
    assert sus_score(sus([3] * 10)) == 50.0


def test_sus_extremes():
    best = [5 if i % 2 == 1 else 1 for i in range(1, 11)]
    worst = [1 if i % 2 == 1 else 5 for i in range(1, 11)]
    assert sus_score(sus(best)) == 100.0
    assert sus_score(sus(worst)) == 0.0


def test_sus_monotone_step_is_plus_minus_2_5():
    base = [3] * 10
    for idx in range(10):
        for value in range(1, 5):
            lo = list(base)
            hi = list(base)
            lo[idx] = value
            hi[idx] = value + 1
            delta = sus_score(sus(hi)) - sus_score(sus(lo))
            assert delta == (2.5 if (idx + 1) % 2 == 1 else -2.5)


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=10, max_size=10))
def test_sus_bounds_attained_only_at_extreme_patterns(items):
    score = sus_score(sus(items))
    assert 0.0 <= score <= 100.0
    if score == 100.0:
        assert items == [5 if i % 2 == 1 else 1 for i in range(1, 11)]
    if score == 0.0:
        assert items == [1 if i % 2 == 1 else 5 for i in range(1, 11)]


def test_sus_response_validation():
    with pytest.raises(SurveyFormatError):
        SusResponse(user_id="u", items=(3,) * 9)
    with pytest.raises(SurveyFormatError):
        SusResponse(user_id="u", items=(3,) * 9 + (6,))


def test_sus_scores_by_user_rejects_duplicates():
    with pytest.raises(SurveyFormatError):
        sus_scores_by_user([sus([3] * 10), sus([4] * 10)])


# --------------------------------------------------------------------------
# Tukey hinges vs the independent sort-and-index oracle (tests/oracles.py)
# --------------------------------------------------------------------------


def test_likert_box_five_values():
    box = likert_box([1, 2, 3, 4, 5])
    assert (box.minimum, box.lower_hinge, box.median, box.upper_hinge, box.maximum) == (
        1.0,
        2.0,
        3.0,
        4.0,
        5.0,
    )
    assert box.outliers == ()
    assert (box.whisker_low, box.whisker_high) == (1.0, 5.0)


def test_likert_box_constant_data():
    box = likert_box([3, 3, 3, 3])
    assert (box.minimum, box.lower_hinge, box.median, box.upper_hinge, box.maximum) == (
        3.0,
    ) * 5
    assert box.outliers == ()


def test_likert_box_flags_outliers_beyond_fences():
    box = likert_box([3, 3, 3, 3, 5])
    assert box.median == 3.0
    assert box.outliers == (5.0,)
    assert (box.whisker_low, box.whisker_high) == (3.0, 3.0)
    assert box.maximum == 5.0


def test_likert_box_empty_rejected():
    with pytest.raises(EmptyRatings):
        likert_box([])


def test_likert_box_matches_oracle_on_200_seeded_ratings():
    rng = SplitMix64(271828)
    values = [rng.randint(1, 5) for _ in range(200)]
    assert likert_box(values) == oracle_box(values)


def test_likert_box_matches_oracle_across_sizes():
    rng = SplitMix64(42)
    for _ in range(500):
        n = rng.randint(1, 50)
        values = [rng.randint(1, 5) for _ in range(n)]
        assert likert_box(values) == oracle_box(values)


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=60))
def test_likert_box_is_permutation_invariant(values):
    box = likert_box(values)
    assert box == likert_box(list(reversed(values)))
    assert box == likert_box(sorted(values))
    assert box.minimum <= box.lower_hinge <= box.median <= box.upper_hinge <= box.maximum


# --------------------------------------------------------------------------
# Per-component attitudes
# --------------------------------------------------------------------------


def ratings_for(model, users, rng):
    out = []
    for user in users:
        for comp_id in model.comp_ids:
            out.append(
                ComponentRating(
                    user_id=user,
                    comp_id=comp_id,
                    efficiency=rng.randint(1, 5),
                    effectiveness=rng.randint(1, 5),
                )
            )
    return out


def test_component_attitudes_one_pair_per_component():
    model = fixture_model("visus")
    users = [f"u{i:02d}" for i in range(1, 14)]
    attitudes = component_attitudes(ratings_for(model, users, SplitMix64(3)), model)
    assert tuple(attitudes) == model.comp_ids  # canonical order, full coverage
    assert len(attitudes) == 11
    for att in attitudes.values():
        assert not att.no_data
        assert att.efficiency.n == 13
        assert att.effectiveness.n == 13


def test_component_attitudes_single_rating():
    model = fixture_model("distil")
    rating = ComponentRating(user_id="u1", comp_id="open_dataset", efficiency=4, effectiveness=2)
    attitudes = component_attitudes([rating], model)
    box = attitudes["open_dataset"].efficiency
    assert (box.minimum, box.median, box.maximum) == (4.0, 4.0, 4.0)
    assert attitudes["open_dataset"].effectiveness.median == 2.0


def test_unrated_components_flagged_not_omitted():
    model = fixture_model("distil")
    rating = ComponentRating(user_id="u1", comp_id="open_dataset", efficiency=3, effectiveness=3)
    attitudes = component_attitudes([rating], model)
    assert set(attitudes) == set(model.comp_ids)
    assert attitudes["export_model"].no_data
    assert attitudes["export_model"].efficiency is None


def test_rating_for_unknown_component_rejected():
    model = fixture_model("distil")
    rating = ComponentRating(user_id="u1", comp_id="see_pdp", efficiency=3, effectiveness=3)
    with pytest.raises(UnknownComponent):
        component_attitudes([rating], model)


def test_rating_range_enforced():
    with pytest.raises(SurveyFormatError):
        ComponentRating(user_id="u", comp_id="c", efficiency=0, effectiveness=3)
    with pytest.raises(SurveyFormatError):
        ComponentRating(user_id="u", comp_id="c", efficiency=3, effectiveness=6)


# --------------------------------------------------------------------------
# CSV interchange
# --------------------------------------------------------------------------


def test_ratings_csv_round_trip(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text(
        "user_id,comp_id,efficiency,effectiveness\n"
        "u1,open_dataset,4,5\n"
        "u2,open_dataset,2,1\n"
    )
    ratings = load_ratings_csv(path)
    assert ratings == [
        ComponentRating("u1", "open_dataset", 4, 5),
        ComponentRating("u2", "open_dataset", 2, 1),
    ]


def test_ratings_csv_malformed_row_reports_number(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("user_id,comp_id,efficiency,effectiveness\nu1,open_dataset,four,5\n")
    with pytest.raises(SurveyFormatError, match="row 2"):
        load_ratings_csv(path)


def test_ratings_csv_header_enforced(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("user,component,eff,eff2\nu1,c,3,3\n")
    with pytest.raises(SurveyFormatError, match="header"):
        load_ratings_csv(path)


def test_sus_csv_round_trip(tmp_path):
    path = tmp_path / "sus.csv"
    header = "user_id," + ",".join(f"q{i}" for i in range(1, 11))
    path.write_text(header + "\nu1,3,3,3,3,3,3,3,3,3,3\n")
    responses = load_sus_csv(path)
    assert responses == [SusResponse("u1", (3,) * 10)]
    assert sus_scores_by_user(responses) == {"u1": 50.0}


def test_sus_csv_out_of_range_reports_number(tmp_path):
    path = tmp_path / "sus.csv"
    header = "user_id," + ",".join(f"q{i}" for i in range(1, 11))
    path.write_text(header + "\nu1,3,3,3,3,9,3,3,3,3,3\n")
    with pytest.raises(SurveyFormatError, match="row 2"):
        load_sus_csv(path)
