"""Recovers the S/V/I/O role sequence from a dependency parse, canonicalizes
it to a sentence type, maps sentence type x focus condition to a discourse
IS-type, locates the preverbal Focus NP and classifies its definiteness.

All functions are pure; coding is deterministic and embarrassingly
parallel across responses.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .conllu import ParsedSentence, Token
from .corpus import CodedRecord, FocusCondition, StimulusItem


class Role(str, Enum):
    S = "S"   # subject
    O = "O"   # object
    V = "V"   # verb
    I = "I"   # verb modifier (igekoto)


class SentenceType(str, Enum):
    SVIO = "SVIO"
    OSVI = "OSVI"
    OIVS = "OIVS"
    SIVO = "SIVO"
    SOVI = "SOVI"
    OVIS = "OVIS"
    SOIV = "SOIV"
    OTHER = "other"   # complete but not among the seven listed orders


class ISType(str, Enum):
    DEFAULT = "default"
    PRE_VF = "preVF"
    TOP_PRE_VF = "Top-preVF"
    TOP_POST_VF = "Top-postVF"
    ERROR = "error"


class Definiteness(str, Enum):
    DEFINITE = "definite"
    INDEFINITE = "indefinite"
    UNKNOWN = "unknown"


class ExclusionReason(str, Enum):
    PARSE_FAILURE = "parse_failure"
    MISSING_ROLES = "missing_roles"
    OTHER = "other"


@dataclass(frozen=True)
class NonCategorisable:
    """Exclusion marker: the response could not be coded."""

    reason: ExclusionReason


@dataclass(frozen=True)
class RoleEntry:
    role: Role
    span: tuple[int, int]   # contiguous token index range, inclusive


@dataclass(frozen=True)
class RoleSequence:
    entries: tuple[RoleEntry, ...]
    preverb_attached: bool = False   # I morphologically fused to V

    def __post_init__(self):
        roles = [e.role for e in self.entries]
        if len(roles) != len(set(roles)):
            raise ValueError("each role may appear at most once after duplicate collapse")
        if self.preverb_attached:
            i_pos = roles.index(Role.I)
            if i_pos + 1 >= len(roles) or roles[i_pos + 1] is not Role.V:
                raise ValueError("fused I must immediately precede V")
            if self.entries[i_pos].span != self.entries[i_pos + 1].span:
                raise ValueError("fused I span must equal the V span")

    def span_of(self, role: Role) -> Optional[tuple[int, int]]:
        for entry in self.entries:
            if entry.role is role:
                return entry.span
        return None


# Preverbal-focus IS-types; only these carry a Focus NP consumed downstream.
PREVERBAL_FOCUS = (ISType.PRE_VF, ISType.TOP_PRE_VF)

# Sentence type x condition -> IS-type. Infelicitous cells map to ERROR; any
# complete-but-unlisted order (OTHER) is IS-incongruent, hence ERROR too.
IS_TYPE_TABLE: dict[FocusCondition, dict[SentenceType, ISType]] = {
    FocusCondition.OBJECT_FOCUS: {
        SentenceType.SVIO: ISType.ERROR,
        SentenceType.OSVI: ISType.ERROR,
        SentenceType.OIVS: ISType.ERROR,
        SentenceType.SIVO: ISType.TOP_POST_VF,
        SentenceType.SOVI: ISType.TOP_PRE_VF,
        SentenceType.OVIS: ISType.PRE_VF,
        SentenceType.SOIV: ISType.ERROR,
        SentenceType.OTHER: ISType.ERROR,
    },
    FocusCondition.SUBJECT_FOCUS: {
        SentenceType.SVIO: ISType.PRE_VF,
        SentenceType.OSVI: ISType.TOP_PRE_VF,
        SentenceType.OIVS: ISType.TOP_POST_VF,
        SentenceType.SIVO: ISType.DEFAULT,
        SentenceType.SOVI: ISType.ERROR,
        SentenceType.OVIS: ISType.ERROR,
        SentenceType.SOIV: ISType.ERROR,
        SentenceType.OTHER: ISType.ERROR,
    },
}

# Which role carries the preverbal Focus, per (condition, sentence type).
FOCUS_ROLE: dict[tuple[FocusCondition, SentenceType], Role] = {
    (FocusCondition.SUBJECT_FOCUS, SentenceType.SVIO): Role.S,
    (FocusCondition.SUBJECT_FOCUS, SentenceType.OSVI): Role.S,
    (FocusCondition.OBJECT_FOCUS, SentenceType.SOVI): Role.O,
    (FocusCondition.OBJECT_FOCUS, SentenceType.OVIS): Role.O,
}


def extract_roles(
    sentence: ParsedSentence, stimulus: StimulusItem
) -> Union[RoleSequence, NonCategorisable]:
    """Recover the ordered role sequence from one parsed sentence.

    Heuristics, in order:
      H1  only immediate dependents of the main verb are considered;
      --  V <- root, S <- nsubj child, O <- obj child, I <- compound:preverb child;
      H2  if no I was found and the root's form begins with the stimulus
          preverb (case-folded), I is fused onto V (preverb_attached);
      H3  adjacent identical role labels collapse into one span;
      H4  all of S, O, V, I must be present, else MissingRoles.
    """
    root = sentence.root()
    if root is None:
        return NonCategorisable(ExclusionReason.PARSE_FAILURE)

    entries: list[RoleEntry] = [RoleEntry(Role.V, (root.index, root.index))]
    for child in sentence.children_of(root.index):
        if child.rel_matches("nsubj"):
            role = Role.S
        elif child.rel_matches("obj"):
            role = Role.O
        elif child.rel_matches("compound:preverb"):
            role = Role.I
        else:
            continue
        if role is Role.I:
            span = (child.index, child.index)  # the preverb itself, no subtree
        else:
            span = sentence.subtree_span(child)
        entries.append(RoleEntry(role, span))
    entries.sort(key=lambda e: e.span)

    preverb_attached = False
    if not any(e.role is Role.I for e in entries):
        if root.form.casefold().startswith(stimulus.preverb_lemma.casefold()):
            v_pos = next(i for i, e in enumerate(entries) if e.role is Role.V)
            entries.insert(v_pos, RoleEntry(Role.I, entries[v_pos].span))
            preverb_attached = True

    entries = collapse_adjacent(entries)

    # Non-adjacent duplicates: keep the leftmost occurrence; never error.
    seen: set[Role] = set()
    deduped = []
    for entry in entries:
        if entry.role in seen:
            continue
        seen.add(entry.role)
        deduped.append(entry)

    if seen != {Role.S, Role.O, Role.V, Role.I}:
        return NonCategorisable(ExclusionReason.MISSING_ROLES)
    return RoleSequence(entries=tuple(deduped), preverb_attached=preverb_attached)


def collapse_adjacent(entries: list[RoleEntry]) -> list[RoleEntry]:
    """H3: merge adjacent identical role labels into one covering span."""
    collapsed: list[RoleEntry] = []
    for entry in entries:
        if collapsed and collapsed[-1].role is entry.role:
            prev = collapsed[-1]
            collapsed[-1] = RoleEntry(
                prev.role,
                (min(prev.span[0], entry.span[0]), max(prev.span[1], entry.span[1])),
            )
        else:
            collapsed.append(entry)
    return collapsed


def sentence_type(seq: RoleSequence) -> SentenceType:
    """Canonicalize a complete role sequence to one of the seven orders.

    A fused preverb is written as I immediately before V, which the
    RoleSequence invariant already guarantees.
    """
    letters = "".join(e.role.value for e in seq.entries)
    try:
        return SentenceType(letters)
    except ValueError:
        return SentenceType.OTHER


def map_is_type(st: SentenceType, cond: FocusCondition) -> ISType:
    """Exact lookup of the discourse function of an order under a condition."""
    return IS_TYPE_TABLE[cond][st]


def focus_np(
    seq: RoleSequence, st: SentenceType, cond: FocusCondition
) -> Optional[tuple[int, int]]:
    """Span of the NP in the preverbal Focus position, if the order has one."""
    role = FOCUS_ROLE.get((cond, st))
    if role is None:
        return None
    return seq.span_of(role)


def detect_definiteness(np_tokens: list[Token]) -> Definiteness:
    """Classify an NP span as definite/indefinite from its written exponents.

    Definite: a determiner with lemma "a"/"az" carrying Definite=Def, or a
    proper noun in the span. Indefinite: determiner lemma "egy", or a bare
    common noun with no determiner at all. Anything else is unknown.
    """
    has_det = any(t.upos.upper() == "DET" for t in np_tokens)
    for tok in np_tokens:
        if (
            tok.upos.upper() == "DET"
            and tok.lemma.lower() in ("a", "az")
            and tok.feats.get("Definite") == "Def"
        ):
            return Definiteness.DEFINITE
    if any(t.upos.upper() == "PROPN" for t in np_tokens):
        return Definiteness.DEFINITE
    if any(t.upos.upper() == "DET" and t.lemma.lower() == "egy" for t in np_tokens):
        return Definiteness.INDEFINITE
    if not has_det and any(t.upos.upper() == "NOUN" for t in np_tokens):
        return Definiteness.INDEFINITE
    return Definiteness.UNKNOWN


def code_response(
    sentences: list[ParsedSentence],
    stimulus: StimulusItem,
    condition: FocusCondition,
    trial_id: str,
) -> CodedRecord:
    """Code one response (possibly several parsed sentences) into a record.

    Only the first sentence with a root verb is coded; prompts demand one
    short complete sentence and one type is coded per response.
    """
    sentence = next((s for s in sentences if s.root() is not None), None)
    if sentence is None:
        return CodedRecord(trial_id=trial_id, exclusion_reason=ExclusionReason.PARSE_FAILURE.value)

    seq = extract_roles(sentence, stimulus)
    if isinstance(seq, NonCategorisable):
        return CodedRecord(trial_id=trial_id, exclusion_reason=seq.reason.value)

    st = sentence_type(seq)
    ist = map_is_type(st, condition)
    definiteness = None
    if ist in PREVERBAL_FOCUS:
        span = focus_np(seq, st, condition)
        if span is not None:
            definiteness = detect_definiteness(sentence.tokens_in_span(span)).value
    return CodedRecord(
        trial_id=trial_id,
        sentence_type=st.value,
        is_type=ist.value,
        focus_definiteness=definiteness,
    )
