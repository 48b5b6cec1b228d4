"""
Scoring attitudinal data
========================

SUS aggregation, Tukey-hinge box summaries of 5-point ratings, and
per-component attitude tables with explicit no-data flags.
"""
from evalcards.fixtures import fixture_model
from evalcards.survey import (
    ComponentRating,
    SusResponse,
    component_attitudes,
    likert_box,
    sus_score,
)

###############################################################################
# SUS: ten 5-point items fold into one 0..100 score. Odd items are
# positively framed, even items negatively.

patterns = {
    "all midpoints": (3,) * 10,
    "best possible": tuple(5 if i % 2 == 1 else 1 for i in range(1, 11)),
    "worst possible": tuple(1 if i % 2 == 1 else 5 for i in range(1, 11)),
    "mixed": (4, 2, 4, 1, 5, 2, 4, 2, 3, 3),
}
for name, items in patterns.items():
    score = sus_score(SusResponse(user_id="demo", items=items))
    print(f"  {name:15s} {items} -> {score:5.1f}")

###############################################################################
# Box summaries use Tukey hinges: medians of the sorted halves, median
# included in both halves when the count is odd. Points beyond
# 1.5 x (hinge spread) are outliers.

ratings = [1, 2, 2, 3, 3, 3, 4, 4, 5, 5, 5, 5]
box = likert_box(ratings)
print(f"\nratings {ratings}")
print(
    f"  n={box.n} min={box.minimum} lower={box.lower_hinge} median={box.median} "
    f"upper={box.upper_hinge} max={box.maximum} outliers={list(box.outliers)}"
)

skewed = [3, 3, 3, 3, 5]
box = likert_box(skewed)
print(f"ratings {skewed}: median {box.median}, outliers {list(box.outliers)}")

###############################################################################
# Per-component attitudes over a model: every terminal component appears in
# the output, rated or not.

model = fixture_model("distil")
survey_rows = [
    ComponentRating("u1", "open_dataset", efficiency=5, effectiveness=4),
    ComponentRating("u2", "open_dataset", efficiency=4, effectiveness=4),
    ComponentRating("u1", "explain_model", efficiency=2, effectiveness=1),
    ComponentRating("u2", "explain_model", efficiency=1, effectiveness=2),
]
attitudes = component_attitudes(survey_rows, model)
print(f"\nper-component attitudes for {model.system_name}:")
for comp_id, att in attitudes.items():
    if att.no_data:
        print(f"  {comp_id:20s} no data")
    else:
        print(
            f"  {comp_id:20s} efficiency median {att.efficiency.median:.1f}, "
            f"effectiveness median {att.effectiveness.median:.1f} (n={att.efficiency.n})"
        )
