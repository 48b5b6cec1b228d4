"""Behavioral metrics derived from session bundles.

Time attribution treats each log record as the moment the user *entered* a
component: the interval between a record and the next belongs to the
earlier record's component, and the final record contributes nothing. That
is the only reading that conserves the session span exactly without a
session-end marker. Unattended gaps can be truncated with an idle cap
(default 10 minutes); the cap is recorded in the metric options so its
effect is always visible.

Task completion time runs from a session's first record to its last. An
alternative (ending the clock at the first model-export record) is a
documented option builders may prefer, but it is not what this module
computes.

Linearity quantifies staged versus back-and-forth usage: over all non-self
transitions, the fraction that move *forward* in the canonical component
order. 1.0 means strictly staged, 0.0 fully backward; a session with no
non-self transitions is vacuously linear (1.0).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EvalCardsError
from .taxonomy import ComponentModel
from .telemetry import Session, SessionBundle

__all__ = [
    "DEFAULT_IDLE_CAP_MS",
    "MatrixLevel",
    "EffortProfile",
    "SessionEffort",
    "TransitionMatrix",
    "LinearityIndex",
    "SessionLinearity",
    "SessionStats",
    "DescriptiveStats",
    "MetricSet",
    "attribute_time",
    "compute_effort",
    "transition_matrix",
    "linearity",
    "descriptive",
    "compute_metric_set",
]

DEFAULT_IDLE_CAP_MS = 10 * 60 * 1000


class MetricsError(EvalCardsError):
    pass


class UnknownLevel(MetricsError):
    pass


class ComponentNotInOrder(MetricsError):
    pass


class MatrixLevel(str, Enum):
    L3 = "L3"
    L2 = "L2"

    @classmethod
    def parse(cls, value: "MatrixLevel | str") -> "MatrixLevel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise UnknownLevel(f"unknown matrix level {value!r} (expected L3 or L2)") from None


# --------------------------------------------------------------------------
# Effort
# --------------------------------------------------------------------------


def attribute_time(session: Session, idle_cap_ms: int | None = None) -> dict[str, int]:
    """Attribute the session span to components, in milliseconds.

    With no cap the per-component sums add up to the session span exactly.
    With a cap, any inter-record gap longer than ``idle_cap_ms`` is
    truncated to the cap before attribution.
    """
    out: dict[str, int] = {}
    records = session.records
    for current, nxt in zip(records, records[1:]):
        gap = nxt.ts_ms - current.ts_ms
        if idle_cap_ms is not None and gap > idle_cap_ms:
            gap = idle_cap_ms
        out[current.comp_id] = out.get(current.comp_id, 0) + gap
    out.setdefault(records[-1].comp_id, 0)
    return out


@dataclass(frozen=True)
class SessionEffort:
    user_id: str
    task_id: str
    per_comp_ms: Mapping[str, int]

    @property
    def attributed_ms(self) -> int:
        return sum(self.per_comp_ms.values())


@dataclass(frozen=True)
class EffortProfile:
    """Bundle-level time-and-visits profile, keyed in canonical order."""

    totals_ms: Mapping[str, int]
    visit_counts: Mapping[str, int]
    per_session: tuple[SessionEffort, ...]
    idle_cap_ms: int | None


def compute_effort(bundle: SessionBundle, idle_cap_ms: int | None = None) -> EffortProfile:
    comp_ids = bundle.model.comp_ids
    totals = {c: 0 for c in comp_ids}
    visits = {c: 0 for c in comp_ids}
    rows = []
    for session in bundle.sessions:
        attributed = attribute_time(session, idle_cap_ms)
        per_comp = {c: attributed.get(c, 0) for c in comp_ids}
        rows.append(
            SessionEffort(user_id=session.user_id, task_id=session.task_id, per_comp_ms=per_comp)
        )
        for comp, ms in per_comp.items():
            totals[comp] += ms
        for record in session.records:
            visits[record.comp_id] += 1
    return EffortProfile(
        totals_ms=totals,
        visit_counts=visits,
        per_session=tuple(rows),
        idle_cap_ms=idle_cap_ms,
    )


# --------------------------------------------------------------------------
# Transition matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """From-to counts: rows are source units, columns destinations."""

    order: tuple[str, ...]
    counts: np.ndarray
    level: MatrixLevel

    def __post_init__(self):
        n = len(self.order)
        if self.counts.shape != (n, n):
            raise MetricsError(f"counts shape {self.counts.shape} does not match order size {n}")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "order": list(self.order),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TransitionMatrix":
        return cls(
            order=tuple(data["order"]),
            counts=np.asarray(data["counts"], dtype=np.int64),
            level=MatrixLevel.parse(data["level"]),
        )


def _collapse_runs(ids: Sequence[str]) -> list[str]:
    out: list[str] = []
    for item in ids:
        if not out or out[-1] != item:
            out.append(item)
    return out


def transition_matrix(
    sessions: Iterable[Session],
    model: ComponentModel,
    level: MatrixLevel | str = MatrixLevel.L3,
    collapse_repeats: bool = False,
) -> TransitionMatrix:
    """Count consecutive record pairs, never across session boundaries.

    At L2 each record maps to its level-2 ancestor before counting. With
    ``collapse_repeats``, runs of identical ids (at the chosen level)
    collapse to a single step first, which zeroes the diagonal. Roll-up
    equivalence (the L2 matrix equals the block-sum of the L3 matrix)
    holds for uncollapsed counts.
    """
    level = MatrixLevel.parse(level)
    if level is MatrixLevel.L3:
        order = model.comp_ids
        mapping = {c: c for c in order}
    else:
        order = model.l2_order
        mapping = {c.comp_id: c.l2_id for c in model.components}
    index = {key: i for i, key in enumerate(order)}

    counts = np.zeros((len(order), len(order)), dtype=np.int64)
    for session in sessions:
        ids = [mapping[r.comp_id] for r in session.records]
        if collapse_repeats:
            ids = _collapse_runs(ids)
        for src, dst in zip(ids, ids[1:]):
            counts[index[src], index[dst]] += 1
    return TransitionMatrix(order=tuple(order), counts=counts, level=level)


# --------------------------------------------------------------------------
# Linearity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearityIndex:
    """Forward-fraction of non-self transitions against a canonical order."""

    value: float
    forward_count: int
    backward_count: int
    self_count: int


def _index_from_counts(forward: int, backward: int, self_count: int) -> LinearityIndex:
    moving = forward + backward
    value = forward / moving if moving else 1.0
    return LinearityIndex(
        value=value, forward_count=forward, backward_count=backward, self_count=self_count
    )


def linearity(
    source: Session | Sequence[str] | TransitionMatrix, order: Sequence[str]
) -> LinearityIndex:
    """Classify every transition as forward, backward, or self.

    ``source`` may be a session, a bare component-id sequence, or an
    already-counted :class:`TransitionMatrix` whose order is a subset of
    ``order``. Self transitions never count toward the index.
    """
    pos = {comp: i for i, comp in enumerate(order)}

    if isinstance(source, TransitionMatrix):
        missing = [c for c in source.order if c not in pos]
        if missing:
            raise ComponentNotInOrder(f"matrix ids not in order: {missing}")
        forward = backward = self_count = 0
        n = len(source.order)
        for i in range(n):
            for j in range(n):
                count = int(source.counts[i, j])
                if not count:
                    continue
                if i == j:
                    self_count += count
                elif pos[source.order[j]] > pos[source.order[i]]:
                    forward += count
                else:
                    backward += count
        return _index_from_counts(forward, backward, self_count)

    ids = source.comp_sequence() if isinstance(source, Session) else list(source)
    missing = sorted({c for c in ids if c not in pos})
    if missing:
        raise ComponentNotInOrder(f"component ids not in order: {missing}")
    forward = backward = self_count = 0
    for src, dst in zip(ids, ids[1:]):
        if src == dst:
            self_count += 1
        elif pos[dst] > pos[src]:
            forward += 1
        else:
            backward += 1
    return _index_from_counts(forward, backward, self_count)


@dataclass(frozen=True)
class SessionLinearity:
    user_id: str
    task_id: str
    index: LinearityIndex


# --------------------------------------------------------------------------
# Descriptive stats
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SessionStats:
    user_id: str
    task_id: str
    completion_ms: int
    steps: int


@dataclass(frozen=True)
class DescriptiveStats:
    rows: tuple[SessionStats, ...]
    sus: Mapping[str, float]
    missing_sus: tuple[str, ...]


def descriptive(bundle: SessionBundle, sus_scores: Mapping[str, float]) -> DescriptiveStats:
    """Per-session completion time and step counts, with SUS carried per user."""
    rows = tuple(
        SessionStats(
            user_id=s.user_id,
            task_id=s.task_id,
            completion_ms=s.span_ms,
            steps=len(s.records),
        )
        for s in bundle.sessions
    )
    users = bundle.user_ids
    sus = {u: float(sus_scores[u]) for u in users if u in sus_scores}
    missing = tuple(u for u in users if u not in sus_scores)
    return DescriptiveStats(rows=rows, sus=sus, missing_sus=missing)


# --------------------------------------------------------------------------
# Assembly
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSet:
    """Every behavioral quantity for one bundle, plus the options used."""

    model: ComponentModel
    effort: EffortProfile
    l3_matrix: TransitionMatrix
    l2_matrix: TransitionMatrix
    session_linearity: tuple[SessionLinearity, ...]
    pooled_linearity: LinearityIndex
    collapse_repeats: bool

    @property
    def idle_cap_ms(self) -> int | None:
        return self.effort.idle_cap_ms


def compute_metric_set(
    bundle: SessionBundle,
    *,
    idle_cap_ms: int | None = DEFAULT_IDLE_CAP_MS,
    collapse_repeats: bool = False,
) -> MetricSet:
    """Compute effort, both matrices, and linearity for a bundle."""
    model = bundle.model
    order = model.comp_ids
    per_session = []
    forward = backward = self_count = 0
    for session in bundle.sessions:
        idx = linearity(session, order)
        per_session.append(
            SessionLinearity(user_id=session.user_id, task_id=session.task_id, index=idx)
        )
        forward += idx.forward_count
        backward += idx.backward_count
        self_count += idx.self_count
    return MetricSet(
        model=model,
        effort=compute_effort(bundle, idle_cap_ms),
        l3_matrix=transition_matrix(
            bundle.sessions, model, MatrixLevel.L3, collapse_repeats=collapse_repeats
        ),
        l2_matrix=transition_matrix(
            bundle.sessions, model, MatrixLevel.L2, collapse_repeats=collapse_repeats
        ),
        session_linearity=tuple(per_session),
        pooled_linearity=_index_from_counts(forward, backward, self_count),
        collapse_repeats=collapse_repeats,
    )
