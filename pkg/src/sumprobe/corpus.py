"""Document model and reader for column-annotated news corpora.

The input format is a CoNLL-2012-style column file, documented in
docs/formats.md. Tokenization, sentence boundaries, named entities and
coreference chains are taken as given by the annotation file; nothing is
re-tokenized or re-tagged here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO


class ParseError(ValueError):
    """Malformed input line (wrong column count, bad marker line)."""


class IntegrityError(ValueError):
    """Structurally broken annotations, e.g. unbalanced brackets."""


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    sentence: int
    pos: str = ""


@dataclass(frozen=True, order=True)
class MentionSpan:
    start: int
    end: int  # inclusive
    chain: str | None = None


@dataclass(frozen=True, order=True)
class NamedEntitySpan:
    start: int
    end: int  # inclusive
    label: str


@dataclass
class AnnotatedDocument:
    id: str
    tokens: list[Token]
    chains: dict[str, list[MentionSpan]]
    entities: list[NamedEntitySpan]

    @property
    def mentions(self) -> list[MentionSpan]:
        out = [m for spans in self.chains.values() for m in spans]
        return sorted(out)

    def sentence_spans(self) -> list[tuple[int, int]]:
        """Start/end (inclusive) token index per sentence."""
        spans: list[tuple[int, int]] = []
        last_sentence: int | None = None
        for tok in self.tokens:
            if tok.sentence != last_sentence:
                spans.append((tok.index, tok.index))
                last_sentence = tok.sentence
            else:
                spans[-1] = (spans[-1][0], tok.index)
        return spans

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def person_entities(self) -> list[NamedEntitySpan]:
        return [e for e in self.entities if e.label == "PERSON"]


_NO_COREF = "-"
_NO_NE = "*"
_NUM_COLUMNS = 7


def _parse_ne_field(field_text: str, index: int, line_no: int, open_ne: list | None):
    """Returns (new_open_ne, completed_span_or_None)."""
    text = field_text
    completed = None
    if text.startswith("("):
        if open_ne is not None:
            raise IntegrityError(
                f"line {line_no}: named-entity bracket opened while another is open"
            )
        if text.endswith(")"):
            label = text[1:-1].rstrip("*")
            completed = NamedEntitySpan(index, index, label)
        elif text.endswith("*"):
            open_ne = [text[1:-1], index]
        else:
            raise ParseError(f"line {line_no}: bad named-entity field {text!r}")
    elif text == _NO_NE:
        pass
    elif text == "*)":
        if open_ne is None:
            raise IntegrityError(
                f"line {line_no}: named-entity bracket closed but none open"
            )
        completed = NamedEntitySpan(open_ne[1], index, open_ne[0])
        open_ne = None
    else:
        raise ParseError(f"line {line_no}: bad named-entity field {text!r}")
    return open_ne, completed


def _parse_coref_field(
    field_text: str,
    index: int,
    line_no: int,
    open_chains: dict[str, list[int]],
    mentions: list[MentionSpan],
) -> None:
    if field_text == _NO_COREF:
        return
    for part in field_text.split("|"):
        opens = part.startswith("(")
        closes = part.endswith(")")
        chain = part.strip("()")
        if not chain or not chain.isdigit() or not (opens or closes):
            raise ParseError(f"line {line_no}: bad coreference field {field_text!r}")
        if opens and closes:
            mentions.append(MentionSpan(index, index, chain))
        elif opens:
            open_chains.setdefault(chain, []).append(index)
        else:
            stack = open_chains.get(chain)
            if not stack:
                raise IntegrityError(
                    f"line {line_no}: coreference chain {chain} closed but never opened"
                )
            mentions.append(MentionSpan(stack.pop(), index, chain))


class _DocBuilder:
    def __init__(self, doc_name: str, part: str):
        self.id = f"{doc_name}#{int(part)}"
        self.tokens: list[Token] = []
        self.sentence = 0
        self.open_ne = None
        self.open_chains: dict[str, list[int]] = {}
        self.mentions: list[MentionSpan] = []
        self.entities: list[NamedEntitySpan] = []

    def add_row(self, columns: list[str], line_no: int) -> None:
        _, _, _, text, pos, ne_field, coref_field = columns
        index = len(self.tokens)
        # "-" is the empty-POS placeholder in the column format
        self.tokens.append(Token(index, text, self.sentence, "" if pos == "-" else pos))
        self.open_ne, done = _parse_ne_field(ne_field, index, line_no, self.open_ne)
        if done is not None:
            self.entities.append(done)
        _parse_coref_field(coref_field, index, line_no, self.open_chains, self.mentions)

    def end_sentence(self) -> None:
        if self.tokens and self.tokens[-1].sentence == self.sentence:
            self.sentence += 1

    def finish(self, line_no: int) -> AnnotatedDocument:
        if self.open_ne is not None:
            raise IntegrityError(
                f"line {line_no}: document {self.id} ends with an open named-entity bracket"
            )
        dangling = sorted(c for c, stack in self.open_chains.items() if stack)
        if dangling:
            raise IntegrityError(
                f"line {line_no}: document {self.id} ends with open coreference "
                f"bracket(s) for chain(s) {', '.join(dangling)}"
            )
        chains: dict[str, list[MentionSpan]] = {}
        for m in sorted(self.mentions):
            chains.setdefault(m.chain, []).append(m)
        return AnnotatedDocument(
            id=self.id,
            tokens=self.tokens,
            chains=chains,
            entities=sorted(self.entities),
        )


def parse_conll_corpus(path: str | Path) -> list[AnnotatedDocument]:
    """Parse a column-annotated corpus file into documents.

    Raises ParseError on malformed rows (with line number) and
    IntegrityError on unbalanced annotation brackets.
    """
    path = Path(path)
    docs: list[AnnotatedDocument] = []
    builder: _DocBuilder | None = None
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith("#begin document"):
                if builder is not None:
                    raise ParseError(f"line {line_no}: nested '#begin document'")
                builder = _start_doc(line, line_no)
                continue
            if line.startswith("#end document"):
                if builder is None:
                    raise ParseError(f"line {line_no}: '#end document' without begin")
                docs.append(builder.finish(line_no))
                builder = None
                continue
            if not line.strip():
                if builder is not None:
                    builder.end_sentence()
                continue
            if builder is None:
                raise ParseError(f"line {line_no}: token row outside a document block")
            columns = line.split()
            if len(columns) != _NUM_COLUMNS:
                raise ParseError(
                    f"line {line_no}: expected {_NUM_COLUMNS} columns, got {len(columns)}"
                )
            builder.add_row(columns, line_no)
    if builder is not None:
        raise IntegrityError(f"document {builder.id} has no '#end document' marker")
    return docs


def _start_doc(line: str, line_no: int) -> _DocBuilder:
    # "#begin document (name); part 012"
    try:
        head, part_text = line.split(";")
        name = head[head.index("(") + 1 : head.rindex(")")]
        part = part_text.split()[-1]
        int(part)
    except (ValueError, IndexError):
        raise ParseError(f"line {line_no}: bad '#begin document' marker: {line!r}")
    return _DocBuilder(name, part)


def write_conll_corpus(docs: Iterable[AnnotatedDocument], out: TextIO) -> None:
    """Serialize documents back to the column format (round-trip safe)."""
    for doc in docs:
        name, part = doc.id.rsplit("#", 1)
        out.write(f"#begin document ({name}); part {int(part):03d}\n")
        ne_open = {e.start: e for e in doc.entities}
        ne_close = {e.end for e in doc.entities}
        starts: dict[int, list[str]] = {}
        ends: dict[int, list[str]] = {}
        units: dict[int, list[str]] = {}
        for chain, spans in doc.chains.items():
            for m in spans:
                if m.start == m.end:
                    units.setdefault(m.start, []).append(chain)
                else:
                    starts.setdefault(m.start, []).append(chain)
                    ends.setdefault(m.end, []).append(chain)
        word = 0
        prev_sentence = 0
        for tok in doc.tokens:
            if tok.sentence != prev_sentence:
                out.write("\n")
                word = 0
                prev_sentence = tok.sentence
            i = tok.index
            if i in ne_open:
                e = ne_open[i]
                ne = f"({e.label})" if e.end == i else f"({e.label}*"
            elif i in ne_close:
                ne = "*)"
            else:
                ne = _NO_NE
            parts = (
                [f"({c}" for c in sorted(starts.get(i, []), key=int)]
                + [f"({c})" for c in sorted(units.get(i, []), key=int)]
                + [f"{c})" for c in sorted(ends.get(i, []), key=int)]
            )
            coref = "|".join(parts) if parts else _NO_COREF
            pos = tok.pos if tok.pos else "-"
            out.write(f"{name} {int(part)} {word} {tok.text} {pos} {ne} {coref}\n")
            word += 1
        out.write("#end document\n")


def validate_document(doc: AnnotatedDocument) -> list[str]:
    """Invariant check; returns a list of human-readable violations."""
    problems: list[str] = []
    n = len(doc.tokens)
    for i, tok in enumerate(doc.tokens):
        if tok.index != i:
            problems.append(f"token {i}: index {tok.index} not contiguous")
        if i and tok.sentence < doc.tokens[i - 1].sentence:
            problems.append(f"token {i}: sentence index decreases")
    if doc.tokens and doc.tokens[0].sentence != 0:
        problems.append("first token not in sentence 0")
    sent_of = [t.sentence for t in doc.tokens]
    for chain, spans in doc.chains.items():
        if not spans:
            problems.append(f"chain {chain}: no mentions")
        for m in spans:
            if m.chain != chain:
                problems.append(f"chain {chain}: mention {m} carries chain {m.chain}")
            if not (0 <= m.start <= m.end < n):
                problems.append(f"chain {chain}: mention ({m.start},{m.end}) out of range")
            elif sent_of[m.start] != sent_of[m.end]:
                problems.append(
                    f"chain {chain}: mention ({m.start},{m.end}) crosses a sentence boundary"
                )
    for e in doc.entities:
        if not (0 <= e.start <= e.end < n):
            problems.append(f"entity {e.label} ({e.start},{e.end}) out of range")
    return problems


def to_json(doc: AnnotatedDocument) -> dict:
    return {
        "id": doc.id,
        "tokens": [t.text for t in doc.tokens],
        "sentences": [t.sentence for t in doc.tokens],
        "pos": [t.pos for t in doc.tokens],
        "chains": {c: [[m.start, m.end] for m in spans] for c, spans in doc.chains.items()},
        "entities": [[e.start, e.end, e.label] for e in doc.entities],
    }


def from_json(data: dict) -> AnnotatedDocument:
    tokens = [
        Token(i, text, sent, pos)
        for i, (text, sent, pos) in enumerate(
            zip(data["tokens"], data["sentences"], data["pos"])
        )
    ]
    chains = {
        chain: [MentionSpan(s, e, chain) for s, e in spans]
        for chain, spans in data["chains"].items()
    }
    entities = [NamedEntitySpan(s, e, label) for s, e, label in data["entities"]]
    return AnnotatedDocument(data["id"], tokens, chains, sorted(entities))


def write_jsonl(docs: Iterable[AnnotatedDocument], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(to_json(doc), sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> Iterator[AnnotatedDocument]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield from_json(json.loads(line))
