"""Aggregates coded records into per-run IS-type profiles and computes the
three headline measures: IS-type proportion distributions, topicalisation
deltas between conditions, and preverbal-Focus indefiniteness rates.

Non-categorisable records count only towards the exclusion tally; they
never enter a metric denominator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .corpus import IS_TYPE_LABELS, CodedRecord, FocusCondition, SourceKind, TrialRecord
from .errors import EmptyProfile, MissingCondition, OrphanRecord

TOPIC_LABELS = ("Top-preVF", "Top-postVF")
PREVERBAL_FOCUS_LABELS = ("preVF", "Top-preVF")


@dataclass
class RunProfile:
    """IS-type counts for one (source, run, condition) cell."""

    source_id: str
    source_kind: SourceKind
    run_index: int
    condition: FocusCondition
    counts: dict[str, int] = field(default_factory=lambda: {k: 0 for k in IS_TYPE_LABELS})
    n_excluded: int = 0

    @property
    def n_categorised(self) -> int:
        return sum(self.counts.values())

    @property
    def key(self) -> tuple:
        return (self.source_id, self.run_index, self.condition)

    def proportions(self) -> dict[str, float]:
        n = self.n_categorised
        if n == 0:
            return {k: 0.0 for k in IS_TYPE_LABELS}
        return {k: self.counts[k] / n for k in IS_TYPE_LABELS}


@dataclass(frozen=True)
class DeltaRecord:
    """Per-run difference in topicalisation probability across conditions."""

    source_id: str
    run_index: int
    p_topic_obj: float
    p_topic_subj: float

    @property
    def delta(self) -> float:
        return self.p_topic_subj - self.p_topic_obj


def build_profiles(
    coded: Iterable[CodedRecord], trials: Iterable[TrialRecord]
) -> list[RunProfile]:
    """One profile per (source, run, condition) present among the coded records.

    Raises OrphanRecord when a coded record has no matching trial. Order of
    the input is irrelevant; output is sorted by profile key.
    """
    by_id = {t.trial_id: t for t in trials}
    profiles: dict[tuple, RunProfile] = {}
    for record in coded:
        trial = by_id.get(record.trial_id)
        if trial is None:
            raise OrphanRecord(f"coded record {record.trial_id!r} has no trial")
        key = (trial.source_id, trial.run_index, trial.condition)
        profile = profiles.get(key)
        if profile is None:
            profile = RunProfile(
                source_id=trial.source_id,
                source_kind=trial.source_kind,
                run_index=trial.run_index,
                condition=trial.condition,
            )
            profiles[key] = profile
        if record.categorised:
            profile.counts[record.is_type] += 1
        else:
            profile.n_excluded += 1
    return [profiles[k] for k in sorted(profiles, key=lambda k: (k[0], k[1], k[2].value))]


def topicalisation_probability(profile: RunProfile) -> float:
    """Share of categorised responses whose IS-type contains a Topic.

    Default and error responses stay in the denominator.
    """
    n = profile.n_categorised
    if n == 0:
        raise EmptyProfile(f"profile {profile.key} has no categorised responses")
    return sum(profile.counts[k] for k in TOPIC_LABELS) / n


def topicalisation_delta(profiles: Iterable[RunProfile]) -> DeltaRecord:
    """Delta = P_topic(subject focus) - P_topic(object focus) for one source/run."""
    by_condition: dict[FocusCondition, RunProfile] = {}
    keys = set()
    for profile in profiles:
        keys.add((profile.source_id, profile.run_index))
        by_condition[profile.condition] = profile
    if len(keys) != 1:
        raise ValueError(f"profiles must belong to a single source/run, got {sorted(keys)}")
    if set(by_condition) != {FocusCondition.OBJECT_FOCUS, FocusCondition.SUBJECT_FOCUS}:
        missing = {c for c in FocusCondition} - set(by_condition)
        raise MissingCondition(f"missing condition(s) {sorted(c.value for c in missing)} for {keys.pop()}")
    source_id, run_index = keys.pop()
    return DeltaRecord(
        source_id=source_id,
        run_index=run_index,
        p_topic_obj=topicalisation_probability(by_condition[FocusCondition.OBJECT_FOCUS]),
        p_topic_subj=topicalisation_probability(by_condition[FocusCondition.SUBJECT_FOCUS]),
    )


def build_deltas(profiles: Iterable[RunProfile]) -> tuple[list[DeltaRecord], list[tuple]]:
    """Deltas for every source/run having both conditions; skipped keys returned."""
    grouped: dict[tuple, list[RunProfile]] = {}
    for profile in profiles:
        grouped.setdefault((profile.source_id, profile.run_index), []).append(profile)
    deltas = []
    skipped = []
    for key in sorted(grouped):
        try:
            deltas.append(topicalisation_delta(grouped[key]))
        except (MissingCondition, EmptyProfile):
            skipped.append(key)
    return deltas, skipped


def indefiniteness_proportion(coded: Iterable[CodedRecord]) -> Optional[float]:
    """Share of indefinite NPs among classified preverbal-Focus NPs.

    Restricted to records with a preverbal Focus whose definiteness was
    classified; unknowns are dropped from the denominator. None when the
    denominator is zero.
    """
    n_definite = 0
    n_indefinite = 0
    for record in coded:
        if record.is_type not in PREVERBAL_FOCUS_LABELS:
            continue
        if record.focus_definiteness == "definite":
            n_definite += 1
        elif record.focus_definiteness == "indefinite":
            n_indefinite += 1
    total = n_definite + n_indefinite
    if total == 0:
        return None
    return n_indefinite / total


def merge_profiles(
    profiles: Iterable[RunProfile], source_id: str, run_index: int = 0
) -> dict[FocusCondition, RunProfile]:
    """Aggregate profiles per condition by summing counts.

    Summing counts then taking proportions equals count-weighted averaging
    of the per-run proportions, so aggregate rows stay consistent.
    """
    merged: dict[FocusCondition, RunProfile] = {}
    kind = None
    for profile in profiles:
        kind = profile.source_kind if kind is None else kind
        agg = merged.get(profile.condition)
        if agg is None:
            agg = RunProfile(
                source_id=source_id,
                source_kind=profile.source_kind,
                run_index=run_index,
                condition=profile.condition,
            )
            merged[profile.condition] = agg
        for label, count in profile.counts.items():
            agg.counts[label] += count
        agg.n_excluded += profile.n_excluded
    return merged
