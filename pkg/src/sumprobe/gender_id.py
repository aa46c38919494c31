"""Apparent-gender classification for hallucinated summary entities.

Two stages: an offline encyclopedia lookup (exact title match, person-like
category required, majority over gendered pronoun counts), then a census
first-name fallback. Race is deliberately never classified.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from .names import GenderNameTable

log = logging.getLogger(__name__)

MALE = "male"
FEMALE = "female"
UNKNOWN = "unknown"

CLASSIFIER_PRONOUNS = {
    MALE: ("he", "him", "his", "himself"),
    FEMALE: ("she", "her", "hers", "herself"),
}

_PERSON_CATEGORY_WORDS = ("births", "deaths", "people")


@dataclass(frozen=True)
class GenderVerdict:
    gender: str  # male | female | unknown
    source: str  # encyclopedia | census | none


@dataclass(frozen=True)
class LookupPage:
    title: str
    categories: tuple[str, ...]
    pronoun_counts: dict[str, int]


class LookupClient(Protocol):
    def query(self, title: str) -> LookupPage | None: ...


class FixtureLookupClient:
    """Offline lookup backed by a JSON cache of title -> categories + pronoun
    counts. Titles match case-insensitively; redirects are assumed to have
    been resolved when the cache was built."""

    def __init__(self, path: str | Path):
        with Path(path).open(encoding="utf-8") as fh:
            raw = json.load(fh)
        self._pages = {
            title.casefold(): LookupPage(
                title=title,
                categories=tuple(entry.get("categories", [])),
                pronoun_counts=dict(entry.get("counts", {})),
            )
            for title, entry in raw.items()
        }

    def query(self, title: str) -> LookupPage | None:
        return self._pages.get(title.casefold())


def _person_page(page: LookupPage) -> bool:
    return any(
        word in category.lower()
        for category in page.categories
        for word in _PERSON_CATEGORY_WORDS
    )


def classify_encyclopedia(
    tokens: Iterable[str], client: LookupClient
) -> GenderVerdict | None:
    """Verdict from an encyclopedia page, or None when no usable page exists.

    Single-token entities are skipped outright (too easily misidentified);
    pages without a person-like category are treated as not found; equal
    pronoun counts stay unknown.
    """
    tokens = list(tokens)
    if len(tokens) < 2:
        return None
    title = " ".join(tokens)
    try:
        page = client.query(title)
    except Exception as exc:  # degraded lookup must not kill the run
        log.warning("lookup for %r failed: %s", title, exc)
        return None
    if page is None or not _person_page(page):
        return None
    male = sum(page.pronoun_counts.get(p, 0) for p in CLASSIFIER_PRONOUNS[MALE])
    female = sum(page.pronoun_counts.get(p, 0) for p in CLASSIFIER_PRONOUNS[FEMALE])
    if male > female:
        return GenderVerdict(MALE, "encyclopedia")
    if female > male:
        return GenderVerdict(FEMALE, "encyclopedia")
    return GenderVerdict(UNKNOWN, "encyclopedia")


def classify_census(tokens: Iterable[str], table: GenderNameTable) -> GenderVerdict:
    """First-name lookup; expects a deduplicated table. Hits in both gender
    lists (or in neither) stay unknown."""
    lowered = [t.lower() for t in tokens]
    male_hit = any(t in table.male for t in lowered)
    female_hit = any(t in table.female for t in lowered)
    if male_hit and not female_hit:
        return GenderVerdict(MALE, "census")
    if female_hit and not male_hit:
        return GenderVerdict(FEMALE, "census")
    if male_hit and female_hit:
        return GenderVerdict(UNKNOWN, "census")
    return GenderVerdict(UNKNOWN, "none")


def classify(
    tokens: Iterable[str], client: LookupClient, table: GenderNameTable
) -> GenderVerdict:
    """Encyclopedia verdict when a page exists, census fallback otherwise."""
    tokens = list(tokens)
    verdict = classify_encyclopedia(tokens, client)
    if verdict is not None:
        return verdict
    return classify_census(tokens, table)
