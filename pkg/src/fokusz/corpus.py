"""Experiment data model and file ingestion/persistence.

Three file kinds are handled here: the human-edited stimulus manifest
(CSV), trial records (JSONL, append-friendly for the runner) and coded
records (JSONL). All text is stored UTF-8, NFC-normalized, and files are
written atomically (write-temp-then-rename), so a single writer is safe
against concurrent readers.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import DuplicateItem, MalformedManifest, MalformedRecord

MANIFEST_HEADER = [
    "item_id",
    "image_ref",
    "verb_lemma",
    "preverb_lemma",
    "subject_np",
    "object_np",
    "question_obj_focus",
    "question_subj_focus",
]

TRIAL_KEYS = [
    "trial_id",
    "source_id",
    "source_kind",
    "run_index",
    "condition",
    "item_id",
    "response_text",
    "seed",
]

CODED_KEYS = ["trial_id", "sentence_type", "is_type", "focus_definiteness", "exclusion_reason"]

# Label vocabularies of the coded-record schema. The coder emits exactly
# these strings; sentence_type/is_type are null for non-categorisable rows.
SENTENCE_TYPE_LABELS = ("SVIO", "OSVI", "OIVS", "SIVO", "SOVI", "OVIS", "SOIV", "other")
IS_TYPE_LABELS = ("default", "preVF", "Top-preVF", "Top-postVF", "error")
DEFINITENESS_LABELS = ("definite", "indefinite", "unknown")
EXCLUSION_REASON_LABELS = ("parse_failure", "missing_roles", "other")


class FocusCondition(str, Enum):
    """Which argument the question makes discourse-new."""

    OBJECT_FOCUS = "OBJ_FOC"
    SUBJECT_FOCUS = "SUBJ_FOC"

    @classmethod
    def parse(cls, label: str) -> "FocusCondition":
        try:
            return cls(label)
        except ValueError:
            raise ValueError(f"unknown condition label {label!r}") from None


class SourceKind(str, Enum):
    HUMAN = "human"
    VLM = "vlm"


def nfc(text: str) -> str:
    """NFC-normalize; Hungarian diacritics must survive round trips."""
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class StimulusItem:
    """One image stimulus with its lexemes and the two elicited questions."""

    item_id: str
    image_ref: str
    verb_lemma: str
    preverb_lemma: str
    subject_np: str
    object_np: str
    question_obj_focus: str
    question_subj_focus: str

    def __post_init__(self):
        if not self.preverb_lemma:
            raise ValueError(f"stimulus {self.item_id!r}: preverb_lemma must be non-empty")
        if not self.question_obj_focus or not self.question_subj_focus:
            raise ValueError(f"stimulus {self.item_id!r}: both question strings must be non-empty")

    def question(self, condition: FocusCondition) -> str:
        if condition is FocusCondition.OBJECT_FOCUS:
            return self.question_obj_focus
        return self.question_subj_focus


@dataclass(frozen=True)
class TrialRecord:
    """One response event: who answered, under which condition, to what."""

    trial_id: str
    source_id: str
    source_kind: SourceKind
    run_index: int
    condition: FocusCondition
    item_id: str
    response_text: str
    seed: Optional[int] = None

    def __post_init__(self):
        if self.run_index < 0:
            raise ValueError("run_index must be non-negative")

    @property
    def key(self) -> tuple:
        """Uniqueness key within a dataset."""
        return (self.source_id, self.run_index, self.condition, self.item_id)

    def to_json(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "source_id": self.source_id,
            "source_kind": self.source_kind.value,
            "run_index": self.run_index,
            "condition": self.condition.value,
            "item_id": self.item_id,
            "response_text": self.response_text,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrialRecord":
        missing = [k for k in TRIAL_KEYS if k != "seed" and k not in obj]
        if missing:
            raise KeyError(f"missing keys {missing}")
        return cls(
            trial_id=nfc(str(obj["trial_id"])),
            source_id=nfc(str(obj["source_id"])),
            source_kind=SourceKind(obj["source_kind"]),
            run_index=int(obj["run_index"]),
            condition=FocusCondition.parse(obj["condition"]),
            item_id=nfc(str(obj["item_id"])),
            response_text=nfc(str(obj["response_text"])),
            seed=None if obj.get("seed") is None else int(obj["seed"]),
        )


@dataclass(frozen=True)
class CodedRecord:
    """IS coding of one trial; exclusion_reason set iff non-categorisable."""

    trial_id: str
    sentence_type: Optional[str] = None
    is_type: Optional[str] = None
    focus_definiteness: Optional[str] = None
    exclusion_reason: Optional[str] = None

    def __post_init__(self):
        if (self.exclusion_reason is None) == (self.is_type is None):
            raise ValueError(
                f"coded {self.trial_id!r}: exclusion_reason must be present "
                "iff is_type is non-categorisable"
            )
        if self.is_type is not None and self.is_type not in IS_TYPE_LABELS:
            raise ValueError(f"unknown is_type {self.is_type!r}")
        if self.sentence_type is not None and self.sentence_type not in SENTENCE_TYPE_LABELS:
            raise ValueError(f"unknown sentence_type {self.sentence_type!r}")
        if self.focus_definiteness is not None:
            if self.focus_definiteness not in DEFINITENESS_LABELS:
                raise ValueError(f"unknown focus_definiteness {self.focus_definiteness!r}")
            if self.is_type not in ("preVF", "Top-preVF"):
                raise ValueError("focus_definiteness only valid with a preverbal Focus")
        if self.exclusion_reason is not None and self.exclusion_reason not in EXCLUSION_REASON_LABELS:
            raise ValueError(f"unknown exclusion_reason {self.exclusion_reason!r}")

    @property
    def categorised(self) -> bool:
        return self.is_type is not None

    def to_json(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "sentence_type": self.sentence_type,
            "is_type": self.is_type,
            "focus_definiteness": self.focus_definiteness,
            "exclusion_reason": self.exclusion_reason,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CodedRecord":
        if "trial_id" not in obj:
            raise KeyError("missing key trial_id")
        return cls(
            trial_id=nfc(str(obj["trial_id"])),
            sentence_type=obj.get("sentence_type"),
            is_type=obj.get("is_type"),
            focus_definiteness=obj.get("focus_definiteness"),
            exclusion_reason=obj.get("exclusion_reason"),
        )


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write text to path via a temp file + rename in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_manifest(path: Path | str) -> list[StimulusItem]:
    """Load the stimulus manifest CSV.

    Raises MalformedManifest on a bad header or row arity and DuplicateItem
    when two rows share an item_id.
    """
    items: list[StimulusItem] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedManifest(f"{path}: empty file, expected header") from None
        if [h.strip() for h in header] != MANIFEST_HEADER:
            raise MalformedManifest(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise MalformedManifest(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
            fields = dict(zip(MANIFEST_HEADER, (nfc(cell) for cell in row)))
            if fields["item_id"] in seen:
                raise DuplicateItem(f"{path}:{lineno}: duplicate item_id {fields['item_id']!r}")
            seen.add(fields["item_id"])
            try:
                items.append(StimulusItem(**fields))
            except ValueError as exc:
                raise MalformedManifest(f"{path}:{lineno}: {exc}") from None
    return items


def save_manifest(items: Iterable[StimulusItem], path: Path | str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for item in items:
        writer.writerow([nfc(getattr(item, k)) for k in MANIFEST_HEADER])
    atomic_write_text(path, buf.getvalue())


def _load_jsonl(path, decode, on_error):
    records = []
    errors = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise TypeError("line is not a JSON object")
                records.append(decode(obj))
            except (ValueError, KeyError, TypeError) as exc:
                err = MalformedRecord(str(exc), line=lineno)
                if on_error == "collect":
                    errors.append(err)
                else:
                    raise err from None
    return records, errors


def load_trials(path: Path | str) -> list[TrialRecord]:
    """Load trial records from JSONL; raises MalformedRecord with the line."""
    records, _ = _load_jsonl(path, TrialRecord.from_json, "raise")
    return records


def scan_trials(path: Path | str) -> tuple[list[TrialRecord], list[MalformedRecord]]:
    """Like load_trials but collects bad lines instead of raising.

    loaded + errors accounts for every non-blank line; nothing is
    silently dropped.
    """
    return _load_jsonl(path, TrialRecord.from_json, "collect")


def load_coded(path: Path | str) -> list[CodedRecord]:
    records, _ = _load_jsonl(path, CodedRecord.from_json, "raise")
    return records


def scan_coded(path: Path | str) -> tuple[list[CodedRecord], list[MalformedRecord]]:
    return _load_jsonl(path, CodedRecord.from_json, "collect")


def _dump_jsonl(records) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)


def save_trials(records: Iterable[TrialRecord], path: Path | str) -> None:
    """Persist trials as JSONL; save-then-load is the identity."""
    atomic_write_text(path, _dump_jsonl(records))


def save_coded(records: Iterable[CodedRecord], path: Path | str) -> None:
    atomic_write_text(path, _dump_jsonl(records))


def append_trial(record: TrialRecord, path: Path | str) -> None:
    """Append one trial record (used by the runner's single writer)."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def check_unique_trials(records: Iterable[TrialRecord]) -> None:
    """(source_id, run_index, condition, item_id) must be unique."""
    seen = set()
    for rec in records:
        if rec.key in seen:
            raise ValueError(f"duplicate trial key {rec.key}")
        seen.add(rec.key)


def resolve_items(records: Iterable[TrialRecord], manifest: Iterable[StimulusItem]) -> None:
    """Every trial's item_id must resolve against the loaded manifest."""
    known = {item.item_id for item in manifest}
    for rec in records:
        if rec.item_id not in known:
            raise ValueError(f"trial {rec.trial_id!r}: unknown item_id {rec.item_id!r}")
