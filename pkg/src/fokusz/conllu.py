"""Reader/writer for dependency-parsed responses in CoNLL-U format.

Only the columns consumed downstream are retained: ID, FORM, LEMMA, UPOS,
FEATS, HEAD, DEPREL. XPOS, DEPS and MISC are ignored. One file may hold
many responses, keyed by a ``# response_id = <trial_id>`` comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import MalformedLine

N_COLUMNS = 10


@dataclass(frozen=True)
class Token:
    index: int                    # 1-based surface position
    form: str
    lemma: str
    upos: str
    feats: dict = field(default_factory=dict, compare=True, hash=False)
    head: int = 0                 # 0 = root
    deprel: str = "dep"

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be positive, got {self.index}")
        if self.head == self.index:
            raise ValueError(f"token {self.index}: head must not equal index")

    def rel_matches(self, base: str) -> bool:
        """Case-insensitive, sub-relation-tolerant deprel match.

        "obj:…" matches "obj"; parser versions drift in subtyping.
        """
        d = self.deprel.lower()
        return d == base or d.startswith(base + ":")


@dataclass
class ParsedSentence:
    tokens: list[Token]
    meta: dict = field(default_factory=dict)

    @property
    def response_id(self) -> Optional[str]:
        return self.meta.get("response_id")

    def root(self) -> Optional[Token]:
        """The token attached by the root relation.

        Well-formed sentences have exactly one or zero; on drifted parser
        output with several, the leftmost wins.
        """
        for tok in self.tokens:
            if tok.rel_matches("root"):
                return tok
        return None

    def children_of(self, head_index: int) -> list[Token]:
        return [t for t in self.tokens if t.head == head_index]

    def subtree_span(self, tok: Token) -> tuple[int, int]:
        """Covering index range of tok plus all its descendants."""
        kids = {tok.index}
        frontier = [tok.index]
        while frontier:
            nxt = [t.index for t in self.tokens if t.head in frontier and t.index not in kids]
            kids.update(nxt)
            frontier = nxt
        return (min(kids), max(kids))

    def tokens_in_span(self, span: tuple[int, int]) -> list[Token]:
        lo, hi = span
        return [t for t in self.tokens if lo <= t.index <= hi]


def _parse_feats(raw: str) -> dict:
    if raw == "_" or not raw:
        return {}
    feats = {}
    for pair in raw.split("|"):
        if "=" in pair:
            key, value = pair.split("=", 1)
            feats[key] = value
    return feats


def _format_feats(feats: dict) -> str:
    if not feats:
        return "_"
    return "|".join(f"{k}={v}" for k, v in sorted(feats.items(), key=lambda kv: kv[0].lower()))


def parse_conllu(text: str) -> list[ParsedSentence]:
    """Parse blank-line-separated sentence blocks of 10-column token lines.

    Multiword-token range lines (``i-j`` ids) and empty-node lines
    (``i.j`` ids) are skipped. Raises MalformedLine (with the 1-based line
    number) for wrong arity or an unparseable index/head; nothing is
    silently lost otherwise.
    """
    sentences: list[ParsedSentence] = []
    tokens: list[Token] = []
    token_lines: list[int] = []
    meta: dict = {}

    def flush(at_line: int) -> None:
        nonlocal tokens, token_lines, meta
        if not tokens and not meta:
            return
        max_index = tokens[-1].index if tokens else 0
        for tok, lineno in zip(tokens, token_lines):
            if tok.head > max_index:
                raise MalformedLine(f"head {tok.head} beyond last token {max_index}", line=lineno)
        sentences.append(ParsedSentence(tokens=tokens, meta=meta))
        tokens, token_lines, meta = [], [], {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            flush(lineno)
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise MalformedLine(f"expected {N_COLUMNS} columns, got {len(cols)}", line=lineno)
        raw_id = cols[0]
        if "-" in raw_id or "." in raw_id:
            continue  # multiword range / empty node
        try:
            index = int(raw_id)
        except ValueError:
            raise MalformedLine(f"unparseable token id {raw_id!r}", line=lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise MalformedLine(f"unparseable head {cols[6]!r}", line=lineno) from None
        if head < 0:
            raise MalformedLine(f"negative head {head}", line=lineno)
        if tokens and index <= tokens[-1].index:
            raise MalformedLine(f"token index {index} not increasing", line=lineno)
        try:
            tok = Token(
                index=index,
                form=cols[1],
                lemma=cols[2],
                upos=cols[3],
                feats=_parse_feats(cols[5]),
                head=head,
                deprel=cols[7],
            )
        except ValueError as exc:
            raise MalformedLine(str(exc), line=lineno) from None
        tokens.append(tok)
        token_lines.append(lineno)
    flush(-1)
    return sentences


def serialize_conllu(sentences: Iterable[ParsedSentence]) -> str:
    """Inverse of parse_conllu on the retained columns (round-trip identity)."""
    blocks = []
    for sent in sentences:
        lines = [f"# {key} = {value}" for key, value in sent.meta.items()]
        for tok in sent.tokens:
            lines.append(
                "\t".join(
                    [
                        str(tok.index),
                        tok.form,
                        tok.lemma,
                        tok.upos,
                        "_",
                        _format_feats(tok.feats),
                        str(tok.head),
                        tok.deprel,
                        "_",
                        "_",
                    ]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def load_conllu(path) -> list[ParsedSentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read())


def save_conllu(sentences: Iterable[ParsedSentence], path) -> None:
    from .corpus import atomic_write_text

    atomic_write_text(path, serialize_conllu(sentences))


def group_by_response(sentences: Iterable[ParsedSentence]) -> tuple[dict, list[ParsedSentence]]:
    """Group sentences by response_id, preserving in-file order.

    Returns (mapping response_id -> sentences, sentences with no id).
    """
    grouped: dict[str, list[ParsedSentence]] = {}
    unkeyed: list[ParsedSentence] = []
    for sent in sentences:
        rid = sent.response_id
        if rid is None:
            unkeyed.append(sent)
        else:
            grouped.setdefault(rid, []).append(sent)
    return grouped, unkeyed
