"""Log parsing, timestamp normalization, and bundle loading."""
import json

import pytest

from evalcards.fixtures import fixture_model
from evalcards.synth import Archetype, SynthProfile, generate_bundle, write_fixture_tree
from evalcards.taxonomy import ResolutionAction, resolve_model
from evalcards.telemetry import (
    BundleLoadError,
    DuplicateUserTask,
    EmptyLog,
    HierarchyMismatch,
    MalformedRecord,
    MalformedTimestamp,
    NoLogsFound,
    NonMonotonicTimestamps,
    Session,
    SessionBundle,
    UnexpectedOtherPayload,
    UnknownComponent,
    bundle_manifest,
    format_timestamp,
    load_bundle,
    parse_log,
    parse_timestamp,
    session_to_jsonl,
)

REFERENCE_KEYS = [
    "open_dataset",
    "explore_dataset",
    "augment_dataset",
    "transform_dataset",
    "specify_problem",
    "summarize_models",
    "explain_model",
    "compare_models",
    "export_model",
]


@pytest.fixture(scope="module")
def identity_model():
    return resolve_model("identity", [ResolutionAction.apply(k) for k in REFERENCE_KEYS])


@pytest.fixture(scope="module")
def visus_model():
    return fixture_model("visus")


def line(ts, lv1, lv2, comp, other=None):
    record = {"timestamp": ts, "lv1_id": lv1, "lv2_id": lv2, "comp_id": comp}
    if other is not None:
        record["other"] = other
    return json.dumps(record)


# --------------------------------------------------------------------------
# Timestamps
# --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text,expected_ms",
    [
        ("1970-01-01T00:00:00Z", 0),
        ("1970-01-01T00:00:00.123Z", 123),
        ("1970-01-01T00:00:01", 1000),  # naive treated as UTC
        ("1970-01-01T01:00:00+01:00", 0),  # offset honored then discarded
        ("1969-12-31T19:00:00-05:00", 0),
        ("19700101T000130Z", 90_000),  # basic form
        ("1970-01-01 00:00:00,250Z", 250),  # space separator, comma fraction
        ("1970-01-01T00:00", 0),  # seconds optional
        ("1970-01-01T00:00:00.1239Z", 123),  # sub-millisecond truncates
        ("2024-01-01T00:00:00Z", 1_704_067_200_000),
    ],
)
def test_parse_timestamp(text, expected_ms):
    assert parse_timestamp(text) == expected_ms


@pytest.mark.parametrize(
    "text",
    ["", "not a time", "2024-13-01T00:00:00Z", "2024-01-32T00:00:00Z", "2024-01-01", "2024-01-01T25:00:00Z", "2024-01-01T00:00:00+25:00"],
)
def test_parse_timestamp_rejects_garbage(text):
    with pytest.raises(MalformedTimestamp):
        parse_timestamp(text)


def test_format_timestamp_canonical_and_round_trips():
    ms = parse_timestamp("2024-06-15T09:30:00.042+02:00")
    text = format_timestamp(ms)
    assert text == "2024-06-15T07:30:00.042Z"
    assert parse_timestamp(text) == ms


# --------------------------------------------------------------------------
# Record and session validation
# --------------------------------------------------------------------------


def test_happy_path_three_records(identity_model):
    text = "\n".join(
        [
            line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset"),
            line("2024-01-01T00:01:00Z", "data", "explore_dataset", "explore_dataset"),
            line("2024-01-01T00:02:00Z", "model", "export_model", "export_model"),
        ]
    )
    session = parse_log(text, identity_model, user_id="u1", task_id="classification")
    assert len(session.records) == 3
    assert session.comp_sequence() == ("open_dataset", "explore_dataset", "export_model")
    assert session.span_ms == 120_000


def test_hierarchy_mismatch_on_wrong_lv2(visus_model):
    text = line("2024-01-01T00:00:00Z", "model", "compare_models", "see_pdp")
    with pytest.raises(HierarchyMismatch):
        parse_log(text, visus_model, user_id="u1", task_id="t")


def test_unknown_component_rejected(visus_model):
    text = line("2024-01-01T00:00:00Z", "model", "summarize_models", "summarize_models")
    with pytest.raises(UnknownComponent):
        parse_log(text, visus_model, user_id="u1", task_id="t")


def test_unknown_component_quarantined_when_allowed(visus_model):
    text = "\n".join(
        [
            line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset"),
            line("2024-01-01T00:01:00Z", "model", "summarize_models", "summarize_models"),
        ]
    )
    session = parse_log(
        text, visus_model, user_id="u1", task_id="t", allow_unknown_components=True
    )
    assert len(session.records) == 1
    assert len(session.quarantined) == 1
    assert session.quarantined[0]["line"] == 2


def test_other_payload_only_for_problem_and_explanation(visus_model):
    ok = "\n".join(
        [
            line(
                "2024-01-01T00:00:00Z",
                "problem",
                "specify_problem",
                "select_target_metric",
                other={"parameters": {"target_metric": "f1_score"}},
            ),
            line("2024-01-01T00:01:00Z", "model", "explain_model", "see_pdp", other={"model_viewed": "m1"}),
        ]
    )
    session = parse_log(ok, visus_model, user_id="u1", task_id="t")
    assert session.records[0].other == {"parameters": {"target_metric": "f1_score"}}

    bad = line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset", other={"x": 1})
    with pytest.raises(UnexpectedOtherPayload):
        parse_log(bad, visus_model, user_id="u1", task_id="t")


def test_empty_log_rejected(identity_model):
    with pytest.raises(EmptyLog):
        parse_log("", identity_model, user_id="u1", task_id="t")
    with pytest.raises(EmptyLog):
        parse_log("\n\n", identity_model, user_id="u1", task_id="t")


def test_out_of_order_rejected_unless_sorting(identity_model):
    text = "\n".join(
        [
            line("2024-01-01T00:05:00Z", "data", "open_dataset", "open_dataset"),
            line("2024-01-01T00:00:00Z", "data", "explore_dataset", "explore_dataset"),
        ]
    )
    with pytest.raises(NonMonotonicTimestamps):
        parse_log(text, identity_model, user_id="u1", task_id="t")
    session = parse_log(text, identity_model, user_id="u1", task_id="t", sort_timestamps=True)
    assert session.comp_sequence() == ("explore_dataset", "open_dataset")


def test_sorting_is_stable_on_equal_timestamps(identity_model):
    text = "\n".join(
        [
            line("2024-01-01T00:01:00Z", "data", "open_dataset", "open_dataset"),
            line("2024-01-01T00:00:00Z", "data", "explore_dataset", "explore_dataset"),
            line("2024-01-01T00:00:00Z", "problem", "specify_problem", "specify_problem"),
        ]
    )
    session = parse_log(text, identity_model, user_id="u", task_id="t", sort_timestamps=True)
    # the two equal-timestamp records keep their input order
    assert session.comp_sequence() == ("explore_dataset", "specify_problem", "open_dataset")


def test_sorting_makes_result_independent_of_arrival_order(identity_model):
    lines = [
        line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset"),
        line("2024-01-01T00:01:00Z", "data", "explore_dataset", "explore_dataset"),
        line("2024-01-01T00:02:00Z", "problem", "specify_problem", "specify_problem"),
        line("2024-01-01T00:03:00Z", "model", "export_model", "export_model"),
    ]
    reordered = [lines[2], lines[0], lines[3], lines[1]]
    a = parse_log("\n".join(lines), identity_model, user_id="u", task_id="t", sort_timestamps=True)
    b = parse_log("\n".join(reordered), identity_model, user_id="u", task_id="t", sort_timestamps=True)
    assert a == b


@pytest.mark.parametrize(
    "bad,err",
    [
        ("not json", MalformedRecord),
        ('{"timestamp": "2024-01-01T00:00:00Z", "lv1_id": "data"}', MalformedRecord),
        ('{"timestamp": "nope", "lv1_id": "data", "lv2_id": "open_dataset", "comp_id": "open_dataset"}', MalformedTimestamp),
        ('{"timestamp": "2024-01-01T00:00:00Z", "lv1_id": "data", "lv2_id": "open_dataset", "comp_id": "open_dataset", "extra": 1}', MalformedRecord),
        ('{"timestamp": "2024-01-01T00:00:00Z", "lv1_id": "galaxy", "lv2_id": "open_dataset", "comp_id": "open_dataset"}', MalformedRecord),
    ],
)
def test_malformed_lines_report_line_numbers(identity_model, bad, err):
    text = line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset") + "\n" + bad
    with pytest.raises(err, match="line 2"):
        parse_log(text, identity_model, user_id="u1", task_id="t")


# --------------------------------------------------------------------------
# Lossless round trip
# --------------------------------------------------------------------------


def test_round_trip_preserves_records(visus_model):
    profile = SynthProfile(
        archetype=Archetype.NONLINEAR,
        n_users=4,
        tasks=("classification",),
        dwell_min_ms=500,
        dwell_max_ms=90_000,
        seed=11,
    )
    bundle = generate_bundle(visus_model, profile).bundle
    for session in bundle.sessions:
        text = session_to_jsonl(session)
        back = parse_log(text, visus_model, user_id=session.user_id, task_id=session.task_id)
        assert back == session
        assert session_to_jsonl(back) == text


# --------------------------------------------------------------------------
# Bundles
# --------------------------------------------------------------------------


def synth_tree(tmp_path, model, n_users=3, tasks=("classification", "regression"), seed=5):
    profile = SynthProfile(
        archetype=Archetype.NONLINEAR,
        n_users=n_users,
        tasks=tuple(tasks),
        dwell_min_ms=500,
        dwell_max_ms=30_000,
        seed=seed,
    )
    result = generate_bundle(model, profile)
    write_fixture_tree(result, tmp_path)
    return result


def test_load_bundle_round_trips_synth_tree(tmp_path, visus_model):
    result = synth_tree(tmp_path, visus_model)
    bundle = load_bundle(tmp_path / "logs", visus_model)
    assert len(bundle) == 6
    assert bundle == SessionBundle(model=visus_model, sessions=bundle.sessions)
    assert {(s.user_id, s.task_id) for s in bundle.sessions} == {
        (s.user_id, s.task_id) for s in result.bundle.sessions
    }


def test_load_bundle_of_one_file(tmp_path, identity_model):
    (tmp_path / "u1_t.jsonl").write_text(
        line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset") + "\n"
    )
    bundle = load_bundle(tmp_path, identity_model)
    assert len(bundle) == 1


def test_no_logs_found(tmp_path, identity_model):
    with pytest.raises(NoLogsFound):
        load_bundle(tmp_path, identity_model)


def test_duplicate_user_task_rejected(tmp_path, identity_model):
    content = line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset") + "\n"
    # same (user, task) key from two files: u1_a_t.jsonl splits to ("u1_a", "t")
    (tmp_path / "u1_t.jsonl").write_text(content)
    (tmp_path / "u1_t.jsonl.bak").write_text(content)  # ignored: wrong suffix
    bundle = load_bundle(tmp_path, identity_model)
    assert len(bundle) == 1

    dup = Session(
        user_id="u1",
        system_name="identity",
        task_id="t",
        records=bundle.sessions[0].records,
    )
    with pytest.raises(DuplicateUserTask):
        SessionBundle(model=identity_model, sessions=(bundle.sessions[0], dup))


def test_bundle_construction_revalidates_sessions(identity_model, visus_model):
    session = parse_log(
        line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset"),
        identity_model,
        user_id="u1",
        task_id="t",
    )
    # validation is a checked property of the bundle, not an assumption:
    # the same session fails against a model lacking its component ancestry
    with pytest.raises(HierarchyMismatch):
        SessionBundle(model=visus_model, sessions=(session,))


def test_per_file_failures_collected(tmp_path, identity_model):
    good = line("2024-01-01T00:00:00Z", "data", "open_dataset", "open_dataset") + "\n"
    (tmp_path / "u1_t.jsonl").write_text(good)
    (tmp_path / "u2_t.jsonl").write_text("garbage\n")
    (tmp_path / "u3_t.jsonl").write_text("")
    with pytest.raises(BundleLoadError) as info:
        load_bundle(tmp_path, identity_model)
    names = [name for name, _ in info.value.failures]
    assert names == ["u2_t.jsonl", "u3_t.jsonl"]


def test_bundle_manifest_counts(tmp_path, visus_model):
    synth_tree(tmp_path, visus_model)
    bundle = load_bundle(tmp_path / "logs", visus_model)
    manifest = bundle_manifest(bundle)
    assert manifest["session_count"] == len(bundle)
    assert manifest["user_count"] == 3
    for row, session in zip(manifest["sessions"], bundle.sessions):
        assert row["record_count"] == len(session.records)
        assert row["span_ms"] == session.span_ms
