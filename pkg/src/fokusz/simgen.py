"""Synthesizes trial datasets from explicit strategy profiles, with surface
templates and gold dependency parses, as an end-to-end oracle for the
coder, the metrics and the clustering.

Gold parses are constructed directly instead of running a parser, so
coder correctness can be tested in isolation from parser quality.
Morphology is fixed-template: verbs surface as their stem and noun
phrases as the manifest forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coder import FOCUS_ROLE, IS_TYPE_TABLE, ISType, Role, SentenceType
from .conllu import ParsedSentence, Token
from .corpus import (
    IS_TYPE_LABELS,
    CodedRecord,
    FocusCondition,
    SourceKind,
    StimulusItem,
    TrialRecord,
)
from .errors import UnrealizableProfile

VOWELS = "aáeéiíoóöőuúüű"


@dataclass(frozen=True)
class StrategyProfile:
    """Named per-condition IS-type distribution plus Focus indefiniteness rates."""

    name: str
    distributions: dict    # FocusCondition -> {is_type label: probability}
    indefinite_rate: dict  # FocusCondition -> probability the Focus NP is indefinite

    def __post_init__(self):
        for cond in FocusCondition:
            dist = self.distributions.get(cond)
            if dist is None:
                raise ValueError(f"profile {self.name!r}: missing condition {cond.value}")
            unknown = set(dist) - set(IS_TYPE_LABELS)
            if unknown:
                raise ValueError(f"profile {self.name!r}: unknown categories {unknown}")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"profile {self.name!r}/{cond.value}: sums to {total}")
            if any(p < 0 for p in dist.values()):
                raise ValueError(f"profile {self.name!r}: negative probability")
            rate = self.indefinite_rate.get(cond)
            if rate is None or not 0.0 <= rate <= 1.0:
                raise ValueError(f"profile {self.name!r}: indefinite rate must be in [0, 1]")

    def probability(self, cond: FocusCondition, label: str) -> float:
        return self.distributions[cond].get(label, 0.0)

    @classmethod
    def from_percentages(
        cls,
        name: str,
        obj_focus: Sequence[float],
        subj_focus: Sequence[float],
        indefinite_rate_obj: float,
        indefinite_rate_subj: float,
    ) -> "StrategyProfile":
        """Build from rows of published percentage tables.

        Rows are in IS_TYPE_LABELS order and may be off by rounding; they
        are renormalized, rejecting anything further than 2% from 100.
        """
        dists = {}
        for cond, row in (
            (FocusCondition.OBJECT_FOCUS, obj_focus),
            (FocusCondition.SUBJECT_FOCUS, subj_focus),
        ):
            if len(row) != len(IS_TYPE_LABELS):
                raise ValueError(f"profile {name!r}: expected {len(IS_TYPE_LABELS)} cells")
            total = sum(row)
            if abs(total - 100.0) > 2.0:
                raise ValueError(f"profile {name!r}/{cond.value}: row sums to {total}")
            dists[cond] = {k: v / total for k, v in zip(IS_TYPE_LABELS, row)}
        return cls(
            name=name,
            distributions=dists,
            indefinite_rate={
                FocusCondition.OBJECT_FOCUS: indefinite_rate_obj,
                FocusCondition.SUBJECT_FOCUS: indefinite_rate_subj,
            },
        )


# Inverse of the sentence-type -> IS-type mapping, per condition.
_REALIZATIONS: dict[FocusCondition, dict[ISType, list[SentenceType]]] = {}
for _cond, _row in IS_TYPE_TABLE.items():
    inv: dict[ISType, list[SentenceType]] = {}
    for _st, _ist in _row.items():
        inv.setdefault(_ist, []).append(_st)
    _REALIZATIONS[_cond] = inv

# Word-order templates: S/O are noun phrases, V a bare verb, I a split
# preverb, IV the fused preverb+verb. OTHER realizes as verb-initial IV S O,
# complete but outside the seven listed orders.
_TEMPLATES: dict[SentenceType, tuple[str, ...]] = {
    SentenceType.SVIO: ("S", "V", "I", "O"),
    SentenceType.OSVI: ("O", "S", "V", "I"),
    SentenceType.OIVS: ("O", "IV", "S"),
    SentenceType.SIVO: ("S", "IV", "O"),
    SentenceType.SOVI: ("S", "O", "V", "I"),
    SentenceType.OVIS: ("O", "V", "I", "S"),
    SentenceType.SOIV: ("S", "O", "IV"),
    SentenceType.OTHER: ("IV", "S", "O"),
}


def definite_article(noun: str) -> str:
    return "az" if noun and noun[0].lower() in VOWELS else "a"


def realize_sentence(
    stimulus: StimulusItem,
    st: SentenceType,
    cond: FocusCondition,
    focus_indefinite: bool,
) -> tuple[str, list[Token]]:
    """Instantiate a word-order template with the stimulus lexemes.

    The Focus NP (when the order has a preverbal one under cond) takes
    "egy" if focus_indefinite else a definite article; every other NP is
    definite.
    """
    focus_role = FOCUS_ROLE.get((cond, st))
    tokens: list[Token] = []
    verb_index = None
    pending: list[tuple] = []   # (kind, payload) before head indices known

    def np_tokens(noun: str, indefinite: bool):
        article = "egy" if indefinite else definite_article(noun)
        feats = {"Definite": "Ind" if indefinite else "Def", "PronType": "Art"}
        return [("det", article, feats), ("noun", noun)]

    for part in _TEMPLATES[st]:
        if part == "S":
            indef = focus_indefinite and focus_role is Role.S
            pending.extend([("np", "nsubj", piece) for piece in np_tokens(stimulus.subject_np, indef)])
        elif part == "O":
            indef = focus_indefinite and focus_role is Role.O
            pending.extend([("np", "obj", piece) for piece in np_tokens(stimulus.object_np, indef)])
        elif part == "V":
            pending.append(("verb", stimulus.verb_lemma, stimulus.verb_lemma))
        elif part == "IV":
            fused = stimulus.preverb_lemma + stimulus.verb_lemma
            pending.append(("verb", fused, fused))
        elif part == "I":
            pending.append(("preverb", stimulus.preverb_lemma))

    # First pass: assign indices and find the verb.
    index = 0
    drafts = []
    for entry in pending:
        index += 1
        drafts.append((index, entry))
        if entry[0] == "verb":
            verb_index = index
    punct_index = index + 1

    for idx, entry in drafts:
        kind = entry[0]
        if kind == "verb":
            _, form, lemma = entry
            tokens.append(Token(idx, form, lemma, "VERB", {}, 0, "root"))
        elif kind == "preverb":
            form = entry[1]
            tokens.append(Token(idx, form, form, "ADV", {}, verb_index, "compound:preverb"))
        else:  # np piece
            _, rel, piece = entry
            if piece[0] == "det":
                _, form, feats = piece
                # The article attaches to the noun right after it.
                tokens.append(Token(idx, form, form, "DET", dict(feats), idx + 1, "det"))
            else:
                noun = piece[1]
                tokens.append(Token(idx, noun, noun, "NOUN", {}, verb_index, rel))
    tokens.append(Token(punct_index, ".", ".", "PUNCT", {}, verb_index, "punct"))

    words = [t.form for t in tokens[:-1]]
    words[0] = words[0][0].upper() + words[0][1:]
    first = tokens[0]
    tokens[0] = Token(first.index, words[0], first.lemma, first.upos, first.feats, first.head, first.deprel)
    text = " ".join(words) + "."
    return text, tokens


def _sample_label(dist: dict, rng: np.random.Generator) -> str:
    u = float(rng.random())
    cumulative = 0.0
    for label in IS_TYPE_LABELS:
        cumulative += dist.get(label, 0.0)
        if u < cumulative:
            return label
    return next(k for k in reversed(IS_TYPE_LABELS) if dist.get(k, 0.0) > 0)


def generate(
    profile: StrategyProfile,
    stimuli: Sequence[StimulusItem],
    trials_per_condition: int,
    seed: int,
    source_id: str | None = None,
    source_kind: SourceKind = SourceKind.VLM,
    run_index: int = 0,
) -> tuple[list[TrialRecord], list[ParsedSentence], list[CodedRecord]]:
    """Sample trials from a profile; emit surface text, gold parse, gold coding.

    Deterministic given seed; the random stream is partitioned per trial
    index so generation could run in parallel. Raises UnrealizableProfile
    if the profile puts mass on a category no word order realizes under
    that condition (neutral order is unavailable under object focus).
    """
    if not stimuli:
        raise ValueError("need at least one stimulus")
    source_id = source_id or profile.name
    for cond in FocusCondition:
        for label, prob in profile.distributions[cond].items():
            if prob > 0 and ISType(label) not in _REALIZATIONS[cond]:
                raise UnrealizableProfile(
                    f"profile {profile.name!r}: {label} unrealizable under {cond.value}"
                )

    trials: list[TrialRecord] = []
    parses: list[ParsedSentence] = []
    gold: list[CodedRecord] = []
    for cond_idx, cond in enumerate(
        (FocusCondition.OBJECT_FOCUS, FocusCondition.SUBJECT_FOCUS)
    ):
        dist = profile.distributions[cond]
        for i in range(trials_per_condition):
            rng = np.random.default_rng([seed, run_index, cond_idx, i])
            stimulus = stimuli[i % len(stimuli)]
            label = _sample_label(dist, rng)
            ist = ISType(label)
            options = _REALIZATIONS[cond][ist]
            st = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]
            focus_indefinite = False
            definiteness = None
            if ist in (ISType.PRE_VF, ISType.TOP_PRE_VF):
                focus_indefinite = bool(rng.random() < profile.indefinite_rate[cond])
                definiteness = "indefinite" if focus_indefinite else "definite"
            text, tokens = realize_sentence(stimulus, st, cond, focus_indefinite)
            trial_id = f"{source_id}-r{run_index:02d}-{cond.value}-{i:05d}"
            trials.append(
                TrialRecord(
                    trial_id=trial_id,
                    source_id=source_id,
                    source_kind=source_kind,
                    run_index=run_index,
                    condition=cond,
                    item_id=stimulus.item_id,
                    response_text=text,
                    seed=seed,
                )
            )
            parses.append(ParsedSentence(tokens=tokens, meta={"response_id": trial_id, "text": text}))
            gold.append(
                CodedRecord(
                    trial_id=trial_id,
                    sentence_type=st.value,
                    is_type=ist.value,
                    focus_definiteness=definiteness,
                )
            )
    return trials, parses, gold


def generate_population(
    groups: Sequence[tuple[StrategyProfile, int]],
    stimuli: Sequence[StimulusItem],
    trials_per_condition: int,
    seed: int,
) -> tuple[list[TrialRecord], list[ParsedSentence], list[CodedRecord]]:
    """Synthetic participants: `count` sources per profile, one run each."""
    trials, parses, gold = [], [], []
    participant = 0
    for profile, count in groups:
        for _ in range(count):
            t, p, g = generate(
                profile,
                stimuli,
                trials_per_condition,
                seed=seed + 7919 * participant,
                source_id=f"p{participant:03d}-{profile.name}",
                source_kind=SourceKind.HUMAN,
                run_index=0,
            )
            trials.extend(t)
            parses.extend(p)
            gold.extend(g)
            participant += 1
    return trials, parses, gold


def demo_stimuli() -> list[StimulusItem]:
    """Three transitive stimuli with verb modifiers, for simulations."""
    rows = [
        ("k01", "images/k01.png", "fest", "le", "fiú", "lányt", "Kit fest le a fiú?", "Ki festi le a lányt?"),
        ("k02", "images/k02.png", "fésül", "meg", "bohóc", "királyt", "Kit fésül meg a bohóc?", "Ki fésüli meg a királyt?"),
        ("k03", "images/k03.png", "rajzol", "le", "orvos", "tanárt", "Kit rajzol le az orvos?", "Ki rajzolja le a tanárt?"),
    ]
    return [StimulusItem(*row) for row in rows]


def _profile_table() -> dict[str, StrategyProfile]:
    # Rows in IS_TYPE_LABELS order (default, preVF, Top-preVF, Top-postVF,
    # error), percentages; indefiniteness rates are per-condition medians.
    published = {
        "claude-opus-4": ((0.0, 0.0, 84.8, 15.0, 0.2), (0.2, 99.7, 0.1, 0.0, 0.1), 0.12, 0.05),
        "gemini-2.5-pro": ((0.0, 0.0, 96.3, 2.0, 1.8), (6.5, 90.0, 3.5, 0.0, 0.1), 0.10, 0.03),
        "gemma-3-12b": ((0.0, 0.0, 98.3, 1.0, 0.7), (7.1, 90.1, 0.5, 0.0, 2.3), 0.41, 0.00),
        "gemma-3-27b": ((0.0, 0.0, 92.3, 0.4, 7.3), (0.0, 99.6, 0.4, 0.0, 0.0), 0.12, 0.02),
        "mistral-small-3.1": ((0.0, 3.5, 18.9, 27.3, 50.3), (6.3, 73.0, 20.2, 0.0, 0.4), 0.00, 0.02),
        "gpt-4.1": ((0.0, 0.0, 76.5, 23.4, 0.1), (2.3, 62.8, 35.0, 0.0, 0.0), 0.00, 0.00),
        "vlm-aggregate": ((0.0, 0.4, 81.4, 11.1, 7.1), (3.6, 85.6, 10.4, 0.0, 0.4), 0.11, 0.02),
        "human-aggregate": ((0.0, 18.4, 81.0, 0.6, 0.0), (0.1, 31.6, 68.1, 0.1, 0.0), 0.43, 0.43),
        # Human strategy clusters: majority topicalisers, focus-fronters,
        # and a small post-verbal-Focus group.
        "human-cluster1": ((0.0, 2.0, 94.0, 1.0, 3.0), (2.0, 17.0, 80.0, 0.0, 1.0), 0.43, 0.43),
        "human-cluster2": ((0.0, 22.0, 70.0, 2.0, 6.0), (4.0, 80.0, 13.0, 0.0, 3.0), 0.43, 0.43),
        "human-cluster3": ((0.0, 1.0, 2.0, 95.0, 2.0), (5.0, 2.0, 1.0, 92.0, 0.0), 0.43, 0.43),
    }
    return {
        name: StrategyProfile.from_percentages(name, obj, subj, rate_obj, rate_subj)
        for name, (obj, subj, rate_obj, rate_subj) in published.items()
    }


BUNDLED_PROFILES: dict[str, StrategyProfile] = _profile_table()

HUMAN_CLUSTER_GROUPS: list[tuple[StrategyProfile, int]] = [
    (BUNDLED_PROFILES["human-cluster1"], 35),
    (BUNDLED_PROFILES["human-cluster2"], 13),
    (BUNDLED_PROFILES["human-cluster3"], 3),
]
