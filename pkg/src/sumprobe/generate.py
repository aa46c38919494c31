"""Generate demographically controlled input corpora from templates.

Supported assignment schemes:
  gender_local        half of each input's entities male, half female;
                      consecutive variants form inverted pairs that share
                      first-name lists
  gender_global       every entity in an input one gender, alternating
                      male/female across variants (even split)
  race_random_gender  half black / half white per input, gender drawn at
                      random per entity
  race_intersectional like race_random_gender, but gender is a fixed
                      function of the assigned race

Race schemes always substitute last names; gender schemes keep original
last names unless alter_last_names is set (which requires a last-name pool).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .names import GenderNameTable, RaceNameTable, load_census, resolve_ambiguous
from .seeding import derive_rng
from .templates import (
    DocumentTemplate,
    EntityTemplate,
    GENDERED_PRONOUNS,
    SlotCategory,
    splice,
)

SCHEME_KINDS = (
    "gender_local",
    "gender_global",
    "race_random_gender",
    "race_intersectional",
)

GENDERS = ("male", "female")


class GenerationError(RuntimeError):
    """Input corpus cannot be generated as configured."""


class RenderError(ValueError):
    """A slot cannot be rendered for the requested assignment."""


@dataclass(frozen=True)
class AssignmentScheme:
    kind: str
    intersection: dict[str, str] | None = None  # race group -> gender
    variants_per_original: int = 20
    alter_last_names: bool = False

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "race_intersectional":
            if not self.intersection:
                raise ValueError("race_intersectional requires an intersection mapping")
            bad = [g for g in self.intersection.values() if g not in GENDERS]
            if bad:
                raise ValueError(f"intersection maps to unknown gender(s) {bad}")
        elif self.intersection is not None:
            raise ValueError(f"{self.kind} does not take an intersection mapping")
        if self.kind == "gender_local" and self.variants_per_original % 2:
            raise ValueError("gender_local pairs variants; variants_per_original must be even")
        if self.kind == "gender_global" and self.variants_per_original % 2:
            raise ValueError("gender_global balances variants; variants_per_original must be even")
        if self.is_race and not self.alter_last_names:
            raise ValueError("race schemes substitute last names; alter_last_names must be true")

    @property
    def is_race(self) -> bool:
        return self.kind.startswith("race")


def make_scheme(kind: str, *, variants: int = 20, alter_last_names: bool = False,
                intersection: dict[str, str] | None = None) -> AssignmentScheme:
    if kind.startswith("race"):
        alter_last_names = True
    return AssignmentScheme(
        kind=kind,
        intersection=intersection,
        variants_per_original=variants,
        alter_last_names=alter_last_names,
    )


@dataclass(frozen=True)
class EntityAssignment:
    entity: str
    group: str  # male/female or black/white
    gender: str
    first: str
    last: str | None


@dataclass
class GeneratedInput:
    id: str
    original_id: str
    variant: int
    pair_id: str | None
    assignments: list[EntityAssignment]
    tokens: list[str]
    seed: str

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def assignment_map(self) -> dict[str, EntityAssignment]:
        return {a.entity: a for a in self.assignments}


# --- rendering ---------------------------------------------------------------


def _match_case(target: str, original: str) -> str:
    if len(original) > 1 and original.isupper():
        return target.upper()
    if original[:1].isupper():
        return target[:1].upper() + target[1:]
    return target


def map_pronoun(form: str, pos: str, gender: str) -> str:
    low = form.lower()
    if low not in GENDERED_PRONOUNS:
        raise RenderError(f"cannot map pronoun {form!r}")
    possessive = pos == "PRP$"
    if gender == "male":
        table = {
            "he": "he", "him": "him", "his": "his", "himself": "himself",
            "she": "he", "her": "his" if possessive else "him",
            "hers": "his", "herself": "himself",
        }
    elif gender == "female":
        table = {
            "she": "she", "her": "her", "hers": "hers", "herself": "herself",
            "he": "she", "him": "her", "his": "her" if possessive else "hers",
            "himself": "herself",
        }
    else:
        raise RenderError(f"cannot render gender {gender!r}")
    return _match_case(table[low], form)


def map_title(title_text: str, gender: str, preferred_female: str | None) -> str:
    low = title_text.lower()
    if low in ("mr.", "mrs.", "ms."):
        if gender == "male":
            return "Mr."
        return preferred_female or "Ms."
    if low in ("sir", "lady"):
        return "Sir" if gender == "male" else "Lady"
    raise RenderError(f"cannot map title {title_text!r}")


def _display_name(name: str) -> str:
    return name[:1].upper() + name[1:] if name else name


def render(
    template: DocumentTemplate,
    assignments: Sequence[EntityAssignment] | dict[str, EntityAssignment],
) -> list[str]:
    """Fill a template's holes for one entity assignment; unassigned
    entities keep their original text."""
    if not isinstance(assignments, dict):
        assignments = {a.entity: a for a in assignments}
    by_id = {e.entity: e for e in template.entities}
    pieces: list[tuple[int, int, list[str]]] = []
    for ent in template.entities:
        a = assignments.get(ent.entity)
        if a is None:
            continue
        preferred = ent.preferred_female_title()
        for slot in ent.slots:
            if slot.category is SlotCategory.FULL_NAME:
                rep = [a.first, a.last if a.last is not None else slot.text[-1]]
            elif slot.category is SlotCategory.FIRST_NAME:
                rep = [a.first]
            elif slot.category is SlotCategory.LAST_NAME:
                rep = [a.last if a.last is not None else slot.text[0]]
            elif slot.category is SlotCategory.PRONOUN:
                rep = [map_pronoun(slot.text[0], slot.pos, a.gender)]
            else:
                rep = [map_title(slot.title_text, a.gender, preferred)]
            pieces.append((slot.start, slot.end, rep))

    for span in template.content_spans:
        genders = set()
        for ent_id in span.entities:
            a = assignments.get(ent_id)
            gender = a.gender if a is not None else (
                by_id[ent_id].original_gender if ent_id in by_id else None
            )
            genders.add(gender)
        if None in genders or not genders:
            continue  # undetermined referent gender: keep original text
        if genders == {"male"}:
            variant = span.male
        elif genders == {"female"}:
            variant = span.female
        else:
            if span.neutral is None:
                raise RenderError(
                    f"content span ({span.start},{span.end}) needs a neutral variant"
                )
            variant = span.neutral
        pieces.append((span.start, span.end, variant.split()))

    return splice(template.tokens, pieces)


def identity_assignments(template: DocumentTemplate) -> dict[str, EntityAssignment]:
    """Assignments that keep every entity's original name and gender."""
    out = {}
    for e in template.entities:
        out[e.entity] = EntityAssignment(
            entity=e.entity,
            group=e.original_gender or "unknown",
            gender=e.original_gender or "male",
            first=e.first or "",
            last=e.last,
        )
    return out


# --- assignment --------------------------------------------------------------


def _sample_distinct(rng, pool: Iterable[str], k: int, what: str) -> list[str]:
    items = sorted(pool)
    if len(items) < k:
        raise GenerationError(f"need {k} distinct {what}, inventory has {len(items)}")
    return rng.sample(items, k)


def _gender_split(n: int, rng) -> list[bool]:
    """Per-entity male flags with |male - female| <= 1, order randomized."""
    n_male = n // 2
    if n % 2:
        n_male += rng.choice([0, 1])
    flags = [True] * n_male + [False] * (n - n_male)
    rng.shuffle(flags)
    return flags


def _last_names_for(
    ents: list[EntityTemplate],
    scheme: AssignmentScheme,
    rng,
    pool: Sequence[str] | None,
) -> list[str | None]:
    if not scheme.alter_last_names:
        return [e.last for e in ents]
    if pool is None:
        raise GenerationError("alter_last_names requires a last-name pool")
    return [_display_name(n) for n in _sample_distinct(rng, pool, len(ents), "last names")]


def assign_gender_pair(
    template: DocumentTemplate,
    scheme: AssignmentScheme,
    rng,
    census: GenderNameTable,
    last_name_pool: Sequence[str] | None = None,
) -> tuple[list[EntityAssignment], list[EntityAssignment]]:
    """A locally balanced assignment and its exact gender inverse.

    Both members consume the same per-gender first-name lists, so the same
    names appear in both inputs attached to opposite-category entities.
    """
    ents = template.gendered_entities()
    n = len(ents)
    male_flags = _gender_split(n, rng)
    male_names = _sample_distinct(rng, census.male, n, "male first names")
    female_names = _sample_distinct(rng, census.female, n, "female first names")
    lasts = _last_names_for(ents, scheme, rng, last_name_pool)

    def build(invert: bool) -> list[EntityAssignment]:
        out = []
        next_male = next_female = 0
        for i, ent in enumerate(ents):
            male = male_flags[i] != invert
            if male:
                first = male_names[next_male]
                next_male += 1
            else:
                first = female_names[next_female]
                next_female += 1
            gender = "male" if male else "female"
            out.append(
                EntityAssignment(ent.entity, gender, gender, _display_name(first), lasts[i])
            )
        return out

    return build(False), build(True)


def assign_global(
    template: DocumentTemplate,
    scheme: AssignmentScheme,
    rng,
    gender: str,
    census: GenderNameTable,
    last_name_pool: Sequence[str] | None = None,
) -> list[EntityAssignment]:
    ents = template.gendered_entities()
    names = _sample_distinct(rng, census.names(gender), len(ents), f"{gender} first names")
    lasts = _last_names_for(ents, scheme, rng, last_name_pool)
    return [
        EntityAssignment(e.entity, gender, gender, _display_name(names[i]), lasts[i])
        for i, e in enumerate(ents)
    ]


def assign_race(
    template: DocumentTemplate,
    scheme: AssignmentScheme,
    rng,
    race_table: RaceNameTable,
) -> list[EntityAssignment]:
    ents = template.gendered_entities()
    groups = sorted(race_table.groups)
    if len(groups) != 2:
        raise GenerationError("race assignment expects exactly two groups")
    flags = _gender_split(len(ents), rng)  # True -> first group
    used_first: set[str] = set()
    used_last: dict[str, set[str]] = {g: set() for g in groups}
    out = []
    for i, ent in enumerate(ents):
        group = groups[0] if flags[i] else groups[1]
        if scheme.kind == "race_intersectional":
            gender = scheme.intersection[group]
        else:
            gender = rng.choice(GENDERS)
        first_pool = [n for n in race_table.first_names(group, gender) if n not in used_first]
        first = _sample_distinct(rng, first_pool, 1, f"{group}/{gender} first names")[0]
        used_first.add(first)
        last_pool = [n for n in race_table.last_names(group) if n not in used_last[group]]
        last = _sample_distinct(rng, last_pool, 1, f"{group} last names")[0]
        used_last[group].add(last)
        out.append(
            EntityAssignment(ent.entity, group, gender, _display_name(first), _display_name(last))
        )
    return out


def assign_groups(
    template: DocumentTemplate,
    scheme: AssignmentScheme,
    rng,
    *,
    variant: int = 0,
    census: GenderNameTable | None = None,
    race_table: RaceNameTable | None = None,
    last_name_pool: Sequence[str] | None = None,
) -> list[EntityAssignment]:
    """One variant's entity assignments under the given scheme."""
    if scheme.is_race:
        if race_table is None:
            raise GenerationError("race schemes need a race name table")
        return assign_race(template, scheme, rng, race_table)
    if census is None:
        raise GenerationError("gender schemes need a census name table")
    if scheme.kind == "gender_global":
        gender = "male" if variant % 2 == 0 else "female"
        return assign_global(template, scheme, rng, gender, census, last_name_pool)
    first, second = assign_gender_pair(template, scheme, rng, census, last_name_pool)
    return first if variant % 2 == 0 else second


def race_capacity_ok(template: DocumentTemplate, scheme: AssignmentScheme,
                     race_table: RaceNameTable) -> bool:
    """Seed-independent check that every variant can be generated in full.

    Worst case: one race group receives ceil(n/2) entities and the random
    gender draw sends all of them to the same first-name bucket.
    """
    n = len(template.gendered_entities())
    if n == 0:
        return False
    worst = (n + 1) // 2
    for group in race_table.groups:
        if len(race_table.last_names(group)) < worst:
            return False
        if scheme.kind == "race_intersectional":
            genders = [scheme.intersection[group]]
        else:
            genders = list(GENDERS)
        for gender in genders:
            if len(race_table.first_names(group, gender)) < worst:
                return False
    return True


def generate_corpus(
    templates: Iterable[DocumentTemplate],
    scheme: AssignmentScheme,
    master_seed: int,
    *,
    census: GenderNameTable | None = None,
    race_table: RaceNameTable | None = None,
    last_name_pool: Sequence[str] | None = None,
) -> list[GeneratedInput]:
    """All variants for all eligible originals, in canonical order.

    Deterministic for a fixed master seed: every variant draws from an rng
    derived from (seed, original id, variant/pair index), so the output is
    independent of processing order.
    """
    if scheme.is_race:
        if race_table is None:
            raise GenerationError("race schemes need a race name table")
    elif census is None:
        census = resolve_ambiguous(load_census())
    out: list[GeneratedInput] = []
    provenance = f"master={master_seed}"
    for template in sorted(templates, key=lambda t: t.doc_id):
        if not template.eligible:
            continue
        if scheme.is_race and not race_capacity_ok(template, scheme, race_table):
            continue
        pair_cache: tuple[list[EntityAssignment], list[EntityAssignment]] | None = None
        for v in range(scheme.variants_per_original):
            pair_id = None
            if scheme.kind == "gender_local":
                k = v // 2
                if v % 2 == 0:
                    rng = derive_rng(master_seed, template.doc_id, "pair", k)
                    pair_cache = assign_gender_pair(
                        template, scheme, rng, census, last_name_pool
                    )
                assignments = pair_cache[v % 2]
                pair_id = f"{template.doc_id}:{k}"
            else:
                rng = derive_rng(master_seed, template.doc_id, "variant", v)
                assignments = assign_groups(
                    template,
                    scheme,
                    rng,
                    variant=v,
                    census=census,
                    race_table=race_table,
                    last_name_pool=last_name_pool,
                )
            tokens = render(template, assignments)
            out.append(
                GeneratedInput(
                    id=f"{template.doc_id}::{v:02d}",
                    original_id=template.doc_id,
                    variant=v,
                    pair_id=pair_id,
                    assignments=list(assignments),
                    tokens=tokens,
                    seed=provenance,
                )
            )
    return out


# --- serialization -----------------------------------------------------------


def input_to_json(g: GeneratedInput) -> dict:
    return {
        "id": g.id,
        "original_id": g.original_id,
        "variant": g.variant,
        "pair_id": g.pair_id,
        "assignments": [
            {
                "entity": a.entity,
                "group": a.group,
                "gender": a.gender,
                "first": a.first,
                "last": a.last,
            }
            for a in g.assignments
        ],
        "tokens": g.tokens,
        "text": g.text,
        "seed": g.seed,
    }


def input_from_json(data: dict) -> GeneratedInput:
    return GeneratedInput(
        id=data["id"],
        original_id=data["original_id"],
        variant=data["variant"],
        pair_id=data["pair_id"],
        assignments=[
            EntityAssignment(a["entity"], a["group"], a["gender"], a["first"], a["last"])
            for a in data["assignments"]
        ],
        tokens=data["tokens"],
        seed=data["seed"],
    )


def write_inputs(inputs: Iterable[GeneratedInput], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for g in inputs:
            fh.write(json.dumps(input_to_json(g), sort_keys=True) + "\n")


def read_inputs(path: str | Path) -> Iterator[GeneratedInput]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield input_from_json(json.loads(line))
