"""Load summarizer outputs, tokenize them and detect person-name mentions.

Detection is lexicon-driven (injected names, census names, titles) over
maximal runs of capitalized tokens; a sidecar file with externally
detected entity spans can replace it (docs/formats.md).
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .generate import GeneratedInput
from .names import GenderNameTable
from .templates import TITLES

_TITLE_SET = {t.lower() for t in TITLES}
_PUNCT = set(string.punctuation)


class SummaryJoinError(ValueError):
    def __init__(self, message: str, offenders: list[str]):
        super().__init__(f"{message}: {', '.join(offenders)}")
        self.offenders = offenders


@dataclass(frozen=True)
class SummaryEntity:
    start: int
    end: int  # inclusive
    tokens: tuple[str, ...]


@dataclass
class SummaryRecord:
    input_id: str
    system: str
    text: str
    tokens: list[str]
    entities: list[SummaryEntity] = field(default_factory=list)


_SENTENCE_ENDERS = set(".!?")


def tokenize_summary(text: str) -> list[str]:
    """Whitespace split with edge punctuation stripped.

    The trailing period of title tokens (Mr./Mrs./Ms.) survives, and any
    sentence-ending punctuation leaves a normalized "." token behind so
    capitalized-run detection cannot merge names across sentences.
    """
    out: list[str] = []
    for raw in text.split():
        tok = raw
        while tok and tok[0] in _PUNCT:
            tok = tok[1:]
        if not tok:
            if _SENTENCE_ENDERS & set(raw):
                out.append(".")
            continue
        trailing = ""
        while tok and tok[-1] in _PUNCT and tok.lower() not in _TITLE_SET:
            trailing = tok[-1] + trailing
            tok = tok[:-1]
        if tok:
            out.append(tok)
        if tok.lower() not in _TITLE_SET and _SENTENCE_ENDERS & set(trailing):
            out.append(".")
    return out


def build_lexicon(
    *name_sources: Iterable[str | None],
    census: GenderNameTable | None = None,
) -> frozenset[str]:
    """Lowercased name lexicon for entity detection."""
    words: set[str] = set()
    for source in name_sources:
        for name in source:
            if name:
                words.add(name.lower())
    if census is not None:
        words.update(census.male)
        words.update(census.female)
    return frozenset(words)


def detect_entities(tokens: list[str], lexicon: frozenset[str]) -> list[SummaryEntity]:
    """Maximal capitalized runs containing at least one lexicon name or title."""
    entities: list[SummaryEntity] = []
    run_start: int | None = None
    for i in range(len(tokens) + 1):
        capitalized = i < len(tokens) and tokens[i][:1].isupper()
        if capitalized:
            if run_start is None:
                run_start = i
            continue
        if run_start is not None:
            run = tokens[run_start:i]
            if any(t.lower() in lexicon or t.lower() in _TITLE_SET for t in run):
                entities.append(SummaryEntity(run_start, i - 1, tuple(run)))
            run_start = None
    return entities


def load_ner_sidecar(path: str | Path) -> dict[str, list[tuple[int, int, str]]]:
    """Optional externally produced entity spans per input id."""
    spans: dict[str, list[tuple[int, int, str]]] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            spans[row["input_id"]] = [(s, e, label) for s, e, label in row["entities"]]
    return spans


def load_summaries(
    path: str | Path,
    inputs: Iterable[GeneratedInput] | dict[str, GeneratedInput],
    *,
    lexicon: frozenset[str] | None = None,
    ner_spans: dict[str, list[tuple[int, int, str]]] | None = None,
) -> list[SummaryRecord]:
    """Read summary JSONL ({input_id, system, summary}) and join each record
    to its generated input. Unknown ids and duplicate (input, system) pairs
    are reported together as join errors."""
    if not isinstance(inputs, dict):
        inputs = {g.id: g for g in inputs}
    records: list[SummaryRecord] = []
    unknown: list[str] = []
    seen: set[tuple[str, str]] = set()
    duplicates: list[str] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            input_id, system = row["input_id"], row["system"]
            if input_id not in inputs:
                unknown.append(input_id)
                continue
            key = (input_id, system)
            if key in seen:
                duplicates.append(f"{input_id}/{system}")
                continue
            seen.add(key)
            tokens = tokenize_summary(row["summary"])
            records.append(
                SummaryRecord(
                    input_id=input_id,
                    system=system,
                    text=row["summary"],
                    tokens=tokens,
                )
            )
    if unknown:
        raise SummaryJoinError("summaries reference unknown input ids", sorted(set(unknown)))
    if duplicates:
        raise SummaryJoinError("duplicate (input, system) summaries", sorted(set(duplicates)))

    for rec in records:
        if ner_spans is not None and rec.input_id in ner_spans:
            rec.entities = [
                SummaryEntity(s, e, tuple(rec.tokens[s : e + 1]))
                for s, e, label in ner_spans[rec.input_id]
                if label == "PERSON" and 0 <= s <= e < len(rec.tokens)
            ]
        elif lexicon is not None:
            rec.entities = detect_entities(rec.tokens, lexicon)
    return records
