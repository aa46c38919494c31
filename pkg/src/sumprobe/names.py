"""Demographic name dictionaries and identifier word lists.

Bundled data (under sumprobe/data/):
  census_{male,female}.txt  sample of the most frequent US first names with
                            frequencies, three whitespace-separated columns:
                            NAME FREQUENCY RANK
  race_names.json           group -> gendered first names + last names
  word_lists.json           group -> identifier word list; parallel ordering,
                            so pairs (male[i], female[i]) are counterparts
  topic_tokens.json         keyword lists for the topic heuristic
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class NameTableError(ValueError):
    """Raised on unreadable or internally inconsistent name data."""


@dataclass(frozen=True)
class GenderNameTable:
    male: dict[str, float]
    female: dict[str, float]

    def names(self, gender: str) -> dict[str, float]:
        if gender == "male":
            return self.male
        if gender == "female":
            return self.female
        raise KeyError(gender)


@dataclass(frozen=True)
class RaceNameTable:
    # group -> {"first": {gender: [names]}, "last": [names]}
    groups: dict[str, dict]

    def first_names(self, group: str, gender: str) -> list[str]:
        return list(self.groups[group]["first"][gender])

    def last_names(self, group: str) -> list[str]:
        return list(self.groups[group]["last"])


def _data_path(filename: str):
    return resources.files("sumprobe.data").joinpath(filename)


def _load_census_file(path: str | Path) -> dict[str, float]:
    table: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for row_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cols = line.split()
            # real census exports carry a cumulative-frequency column; accept it
            if len(cols) not in (3, 4):
                raise NameTableError(f"{path}: row {row_no}: expected 3 or 4 columns")
            name = cols[0].lower()
            try:
                freq = float(cols[1])
            except ValueError:
                raise NameTableError(f"{path}: row {row_no}: bad frequency {cols[1]!r}")
            if freq <= 0:
                raise NameTableError(f"{path}: row {row_no}: frequency must be > 0")
            table[name] = freq
    if not table:
        raise NameTableError(f"{path}: no rows")
    return table


def load_census(male_path: str | Path | None = None,
                female_path: str | Path | None = None) -> GenderNameTable:
    """Load first-name frequency tables; defaults to the bundled sample.

    Names that occur in both gender files are retained in both maps;
    use resolve_ambiguous() to deduplicate.
    """
    if male_path is None:
        male_path = _data_path("census_male.txt")
    if female_path is None:
        female_path = _data_path("census_female.txt")
    return GenderNameTable(
        male=_load_census_file(male_path),
        female=_load_census_file(female_path),
    )


def resolve_ambiguous(table: GenderNameTable) -> GenderNameTable:
    """Resolve names present in both genders to the clearly dominant one.

    The dominant gender keeps the name if its frequency is at least twice
    the other's; otherwise the name is dropped from both maps.
    """
    male = dict(table.male)
    female = dict(table.female)
    for name in sorted(set(male) & set(female)):
        m, f = male[name], female[name]
        if m >= 2 * f:
            del female[name]
        elif f >= 2 * m:
            del male[name]
        else:
            del male[name]
            del female[name]
    return GenderNameTable(male=male, female=female)


def sample_name(table: GenderNameTable, group: str, rng: random.Random,
                exclude: frozenset[str] | set[str] = frozenset(),
                weighted: bool = False) -> str:
    """Draw one name for a gender; uniform by default, frequency-weighted on request."""
    pool = table.names(group)
    eligible = sorted(n for n in pool if n not in exclude)
    if not eligible:
        raise NameTableError(f"no {group} names left to sample")
    if weighted:
        return rng.choices(eligible, weights=[pool[n] for n in eligible], k=1)[0]
    return rng.choice(eligible)


def load_race_names(path: str | Path | None = None) -> RaceNameTable:
    if path is None:
        path = _data_path("race_names.json")
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    for group, entry in data.items():
        if not entry.get("last"):
            raise NameTableError(f"race name group {group!r} has no last names")
        for gender in ("male", "female"):
            if not entry.get("first", {}).get(gender):
                raise NameTableError(f"race name group {group!r} has no {gender} first names")
    return RaceNameTable(groups=data)


def load_word_lists(path: str | Path | None = None) -> dict[str, list[str]]:
    """Group-identifier word lists; male/female lists must be disjoint and lowercase."""
    if path is None:
        path = _data_path("word_lists.json")
    with open(path, encoding="utf-8") as fh:
        lists = json.load(fh)
    for group, words in lists.items():
        bad = [w for w in words if w != w.lower()]
        if bad:
            raise NameTableError(f"word list {group!r} has non-lowercase entries: {bad}")
    if "male" in lists and "female" in lists:
        overlap = set(lists["male"]) & set(lists["female"])
        if overlap:
            raise NameTableError(f"male/female word lists overlap: {sorted(overlap)}")
    return lists


def word_pairs(lists: dict[str, list[str]]) -> list[tuple[str, str]]:
    """(male, female) identifier counterparts, by list position."""
    male, female = lists["male"], lists["female"]
    if len(male) != len(female):
        raise NameTableError("male/female word lists differ in length; cannot pair")
    return list(zip(male, female))


def load_topic_tokens(path: str | Path | None = None) -> dict[str, list[str]]:
    if path is None:
        path = _data_path("topic_tokens.json")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
