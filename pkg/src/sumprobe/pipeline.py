"""End-to-end orchestration: ingest -> templates -> generate -> align ->
classify -> score, with resumable intermediate artifacts.

Every artifact lives under <out_dir>/<config-hash>/ so a resumed run can
never mix artifacts from different configurations. All randomness flows
from the single config seed through named derivation; nothing reads the
clock or the network.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
from collections import Counter
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable

import numpy as np

from . import alignment as al
from . import corpus as cp
from . import gender_id as gid
from . import generate as gen
from . import measures as ms
from . import summaries as sm
from . import templates as tp
from .names import GenderNameTable, load_census, load_race_names, load_word_lists, resolve_ambiguous
from .seeding import derive_seed


class DataError(ValueError):
    """Bad input data; maps to exit code 2."""


class StageError(RuntimeError):
    """A pipeline stage failed; maps to exit code 3."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    corpus: str
    scheme: str
    seed: int
    out_dir: str
    summaries: dict[str, str] = field(default_factory=dict)
    variants: int = 20
    replicates: int = 1000
    alter_last_names: bool = False
    intersection: dict[str, str] | None = None
    word_lists: str | None = None
    census_male: str | None = None
    census_female: str | None = None
    race_names: str | None = None
    last_name_pool: str | None = None
    content_words: str | None = None
    cache: str | None = None
    ner_sidecars: dict[str, str] = field(default_factory=dict)
    dense_vectors: dict[str, str] = field(default_factory=dict)
    jobs: int = 1

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        with Path(path).open(encoding="utf-8") as fh:
            data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise DataError(f"unknown config key(s): {sorted(unknown)}")
        missing = [k for k in ("corpus", "scheme", "seed", "out_dir") if k not in data]
        if missing:
            raise DataError(f"config missing required key(s): {missing}")
        return cls(**data)

    def payload(self) -> dict:
        """The experiment-defining parameters: everything except where the
        outputs land and how many workers produced them."""
        data = asdict(self)
        data.pop("out_dir")
        data.pop("jobs")
        return data

    def config_hash(self) -> str:
        canonical = json.dumps(self.payload(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def check_paths(self) -> None:
        for system, path in sorted(self.summaries.items()):
            if not Path(path).exists():
                raise StageError("summaries", f"summary file for system {system!r} missing: {path}")
        paths = [self.corpus]
        for opt in (self.word_lists, self.census_male, self.census_female,
                    self.race_names, self.last_name_pool, self.content_words, self.cache):
            if opt:
                paths.append(opt)
        paths += list(self.ner_sidecars.values()) + list(self.dense_vectors.values())
        missing = [p for p in paths if not Path(p).exists()]
        if missing:
            raise DataError(f"missing input file(s): {missing}")


def _bundled(name: str) -> str:
    from importlib import resources

    return str(resources.files("sumprobe.data").joinpath(name))


def load_last_name_pool(path: str | Path) -> list[str]:
    names = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if token:
                names.append(token.lower())
    if not names:
        raise DataError(f"{path}: empty last-name pool")
    return names


# --- stage helpers -------------------------------------------------------------


def _gen_chunk(args) -> list[dict]:
    chunk, scheme, seed, census, race_table, last_pool = args
    templates = [tp.template_from_json(t) for t in chunk]
    produced = gen.generate_corpus(
        templates,
        scheme,
        seed,
        census=census,
        race_table=race_table,
        last_name_pool=last_pool,
    )
    return [gen.input_to_json(g) for g in produced]


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.art_dir = Path(config.out_dir) / config.config_hash()
        self.art_dir.mkdir(parents=True, exist_ok=True)
        self.scheme = gen.make_scheme(
            config.scheme,
            variants=config.variants,
            alter_last_names=config.alter_last_names,
            intersection=config.intersection,
        )
        self.word_lists = load_word_lists(config.word_lists)
        self._census_raw = load_census(config.census_male, config.census_female)
        self.census = resolve_ambiguous(self._census_raw)
        self.race_table = (
            load_race_names(config.race_names) if self.scheme.is_race else None
        )
        self.last_pool = (
            load_last_name_pool(config.last_name_pool) if config.last_name_pool else None
        )

    def path(self, name: str) -> Path:
        return self.art_dir / name

    # -- stages ------------------------------------------------------------

    def documents(self) -> list[cp.AnnotatedDocument]:
        artifact = self.path("documents.jsonl")
        if artifact.exists():
            return list(cp.read_jsonl(artifact))
        try:
            docs = cp.parse_conll_corpus(self.config.corpus)
        except (cp.ParseError, cp.IntegrityError) as exc:
            raise DataError(f"{self.config.corpus}: {exc}") from exc
        problems = [
            f"{doc.id}: {issue}" for doc in docs for issue in cp.validate_document(doc)
        ]
        if problems:
            raise DataError("invalid documents: " + "; ".join(problems))
        ids = [d.id for d in docs]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate document ids in corpus")
        docs.sort(key=lambda d: d.id)
        cp.write_jsonl(docs, artifact)
        return docs

    def templates(self) -> list[tp.DocumentTemplate]:
        artifact = self.path("templates.jsonl")
        if artifact.exists():
            return list(tp.read_templates(artifact))
        docs = self.documents()
        content = (
            tp.load_content_words(self.config.content_words)
            if self.config.content_words
            else {}
        )
        templates = [tp.build_template(d, content.get(d.id, ())) for d in docs]
        tp.write_templates(templates, artifact)
        return templates

    def inputs(self) -> list[gen.GeneratedInput]:
        artifact = self.path("inputs.jsonl")
        if artifact.exists():
            return list(gen.read_inputs(artifact))
        templates = self.templates()
        try:
            if self.config.jobs > 1 and len(templates) > 1:
                rows = sorted(
                    (tp.template_to_json(t) for t in templates),
                    key=lambda r: r["doc_id"],
                )
                chunks = [rows[i :: self.config.jobs] for i in range(self.config.jobs)]
                args = [
                    (chunk, self.scheme, self.config.seed, self.census,
                     self.race_table, self.last_pool)
                    for chunk in chunks
                    if chunk
                ]
                with multiprocessing.Pool(len(args)) as pool:
                    parts = pool.map(_gen_chunk, args)
                produced = [gen.input_from_json(r) for part in parts for r in part]
                produced.sort(key=lambda g: (g.original_id, g.variant))
            else:
                produced = gen.generate_corpus(
                    templates,
                    self.scheme,
                    self.config.seed,
                    census=self.census,
                    race_table=self.race_table,
                    last_name_pool=self.last_pool,
                )
        except gen.GenerationError as exc:
            raise StageError("generate", str(exc)) from exc
        if not produced:
            raise DataError("no eligible documents: nothing to generate")
        gen.write_inputs(produced, artifact)
        return produced

    def _lexicon(self, templates, inputs) -> frozenset[str]:
        assigned = [a.first for g in inputs for a in g.assignments] + [
            a.last for g in inputs for a in g.assignments
        ]
        original = [e.first for t in templates for e in t.entities] + [
            e.last for t in templates for e in t.entities
        ]
        return sm.build_lexicon(assigned, original, census=self._census_raw)

    def summaries_for(self, system: str, inputs) -> list[sm.SummaryRecord]:
        path = self.config.summaries[system]
        if not Path(path).exists():
            raise StageError("summaries", f"summary file for system {system!r} missing: {path}")
        templates = self.templates()
        lexicon = self._lexicon(templates, inputs)
        ner = None
        if system in self.config.ner_sidecars:
            ner = sm.load_ner_sidecar(self.config.ner_sidecars[system])
        try:
            return sm.load_summaries(
                path, {g.id: g for g in inputs}, lexicon=lexicon, ner_spans=ner
            )
        except sm.SummaryJoinError as exc:
            raise DataError(f"system {system!r}: {exc}") from exc

    def alignments(self) -> dict[str, tuple[list[al.AlignedSummary], Counter]]:
        inputs = self.inputs()
        templates = {t.doc_id: t for t in self.templates()}
        entity_index = {
            g.id: al.input_entities(templates[g.original_id], g) for g in inputs
        }
        source_tokens = {g.id: g.tokens for g in inputs}
        out: dict[str, tuple[list[al.AlignedSummary], Counter]] = {}
        for system in sorted(self.config.summaries):
            artifact = self.path(f"alignments.{system}.jsonl")
            records = self.summaries_for(system, inputs)
            aligned, counts = al.align_corpus(records, entity_index, source_tokens)
            if not artifact.exists():
                al.write_alignments(aligned, artifact)
            out[system] = (aligned, counts.get(system, Counter()))
        self._entity_index = entity_index
        return out

    def classify_hallucinations(
        self, aligned_by_system: dict[str, tuple[list[al.AlignedSummary], Counter]]
    ) -> dict[str, dict[str, gid.GenderVerdict]]:
        """Gender verdicts per system, keyed by the entity surface form."""
        cache_path = self.config.cache or _bundled("wiki_cache.json")
        client = gid.FixtureLookupClient(cache_path)
        verdicts: dict[str, dict[str, gid.GenderVerdict]] = {}
        memo: dict[str, gid.GenderVerdict] = {}
        for system, (aligned, _) in sorted(aligned_by_system.items()):
            per_system: dict[str, gid.GenderVerdict] = {}
            for a in aligned:
                for entity in a.hallucinated():
                    key = " ".join(entity.tokens).lower()
                    if key not in memo:
                        memo[key] = gid.classify(entity.tokens, client, self.census)
                    per_system[key] = memo[key]
            verdicts[system] = per_system
            rows = [
                {"entity": key, "gender": v.gender, "source": v.source}
                for key, v in sorted(per_system.items())
            ]
            artifact = self.path(f"verdicts.{system}.json")
            if not artifact.exists():
                artifact.write_text(
                    json.dumps(rows, sort_keys=True, indent=1) + "\n", encoding="utf-8"
                )
        return verdicts

    # -- scoring -------------------------------------------------------------

    def _variant_of(self, input_id: str) -> tuple[str, int]:
        original, variant = input_id.rsplit("::", 1)
        return original, int(variant)

    def score(self) -> dict:
        aligned_by_system = self.alignments()
        inputs = {g.id: g for g in self.inputs()}
        is_gender = not self.scheme.is_race
        is_local = self.scheme.kind != "gender_global"
        verdicts = (
            self.classify_hallucinations(aligned_by_system)
            if (is_gender and is_local)
            else {s: {} for s in aligned_by_system}
        )

        input_ident_counts = {
            gi.id: ms.count_identifiers(gi.tokens, self.word_lists)
            for gi in inputs.values()
        }

        report: dict = {"config": self.config.payload(), "systems": {}}
        for system, (aligned, counts) in sorted(aligned_by_system.items()):
            measures: dict[str, dict] = {}
            diag: dict[str, list[str]] = {}

            def records_from(payloads_by_record):
                return [
                    ms.BootstrapRecord(*self._variant_of(rec_id), payload)
                    for rec_id, payload in payloads_by_record
                ]

            if is_gender and is_local:
                wl_records = records_from(
                    (a.record.input_id,
                     (ms.count_identifiers(a.record.tokens, self.word_lists),
                      input_ident_counts[a.record.input_id]))
                    for a in aligned
                )
                measures["word_list_inclusion"] = self._ci(
                    wl_records, lambda p: ms.word_list_score(p, "adjusted"),
                    system, "word_list_inclusion",
                ).as_json()
                measures["word_list_inclusion_uniform"] = self._ci(
                    wl_records, lambda p: ms.word_list_score(p, "uniform"),
                    system, "word_list_inclusion_uniform",
                ).as_json()

            if is_local:
                rows = al.inclusion_rows(aligned, self._entity_index)
                inc_records = records_from((r["input_id"], r["groups"]) for r in rows)
                measures["entity_inclusion"] = self._ci(
                    inc_records, ms.inclusion_score, system, "entity_inclusion"
                ).as_json()

            if is_gender and is_local:
                system_verdicts = verdicts[system]
                hal_records = records_from(
                    (
                        a.record.input_id,
                        Counter(
                            system_verdicts[" ".join(e.tokens).lower()].gender
                            for e in a.hallucinated()
                        ),
                    )
                    for a in aligned
                )
                measures["hallucination_bias"] = self._ci(
                    hal_records, ms.hallucination_score, system, "hallucination_bias"
                ).as_json()

            if self.scheme.kind == "gender_global":
                count_points, dense_points, d_diag = self._distinguishability_points(
                    system, aligned, inputs
                )
                _, stats, skipped = ms.distinguishability(count_points)
                diag["distinguishability_count"] = skipped
                measures["distinguishability_count"] = self._dist_ci(
                    stats, system, "distinguishability_count"
                ).as_json()
                if dense_points is not None:
                    _, stats_d, skipped_d = ms.distinguishability(dense_points)
                    diag["distinguishability_dense"] = skipped_d + d_diag
                    measures["distinguishability_dense"] = self._dist_ci(
                        stats_d, system, "distinguishability_dense"
                    ).as_json()

            system_verdicts = verdicts.get(system, {})
            counts["gender_classified_hallucinations"] = sum(
                1
                for a in aligned
                for e in a.hallucinated()
                if system_verdicts.get(" ".join(e.tokens).lower(), gid.GenderVerdict("unknown", "none")).gender != "unknown"
            )
            top = self._hallucination_top(aligned, system_verdicts)
            report["systems"][system] = {
                "measures": measures,
                "alignment_counts": dict(sorted(counts.items())),
                "hallucination_top": top,
                "diagnostics": diag,
            }
        scores_path = self.path("scores.json")
        if not scores_path.exists():
            scores_path.write_text(
                json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8"
            )
        return report

    def _ci(self, records, fn, system, measure) -> ms.ScoreWithCI:
        seed = derive_seed(self.config.seed, "ci", system, measure)
        return ms.score_with_ci(
            records, fn, replicates=self.config.replicates, seed=seed, axes=("d", "s")
        )

    def _dist_ci(self, stats, system, measure) -> ms.ScoreWithCI:
        records = [
            ms.BootstrapRecord(original, 0, (n, wins)) for original, n, wins in stats
        ]
        seed = derive_seed(self.config.seed, "ci", system, measure)
        point = ms.distinguishability_score([r.payload for r in records])
        ci_d = ms.bootstrap(
            records, ms.distinguishability_score, "d", self.config.replicates, seed
        )
        return ms.ScoreWithCI(
            point=point, ci_d=ci_d, ci_s=None,
            replicates=self.config.replicates, n=len(records),
        )

    def _distinguishability_points(self, system, aligned, inputs):
        first_names = {
            a.first.lower() for gi in inputs.values() for a in gi.assignments if a.first
        }
        last_names = {
            a.last.lower() for gi in inputs.values() for a in gi.assignments if a.last
        }
        count_points = []
        for a in aligned:
            gi = inputs[a.record.input_id]
            group = gi.assignments[0].gender if gi.assignments else "unknown"
            neutral = ms.neutralize_tokens(a.record.tokens, first_names, last_names)
            count_points.append(
                ms.SummaryPoint(gi.original_id, group, Counter(neutral))
            )
        dense_points = None
        diagnostics: list[str] = []
        if system in self.config.dense_vectors:
            vectors: dict[str, np.ndarray] = {}
            with open(self.config.dense_vectors[system], encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        row = json.loads(line)
                        vectors[row["input_id"]] = np.asarray(row["vector"], dtype=float)
            dense_points = []
            for a in aligned:
                gi = inputs[a.record.input_id]
                if gi.id not in vectors:
                    diagnostics.append(f"no dense vector for input {gi.id}")
                    continue
                group = gi.assignments[0].gender if gi.assignments else "unknown"
                dense_points.append(
                    ms.SummaryPoint(gi.original_id, group, vectors[gi.id])
                )
        return count_points, dense_points, diagnostics

    def _hallucination_top(self, aligned, verdicts, k: int = 10):
        counts: Counter[str] = Counter()
        for a in aligned:
            for entity in a.hallucinated():
                counts[" ".join(entity.tokens).lower()] += 1
        rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        tag = {"male": "m", "female": "f", "unknown": "u"}
        return [
            [name, count, tag[verdicts[name].gender] if name in verdicts else "u"]
            for name, count in rows
        ]


def run_pipeline(config: PipelineConfig) -> dict:
    """Full run through scoring; returns the report dict (also persisted as
    scores.json in the artifact directory)."""
    config.check_paths()
    return Pipeline(config).score()
