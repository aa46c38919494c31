"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import alignment as al
from . import corpus as cp
from . import gender_id as gid
from . import generate as gen
from . import input_bias as ib
from . import summaries as sm
from . import templates as tp
from .names import (
    NameTableError,
    load_census,
    load_word_lists,
    resolve_ambiguous,
    word_pairs,
)
from .pipeline import DataError, PipelineConfig, StageError, load_last_name_pool, run_pipeline
from .report import render_report

USAGE_EXIT = 1
DATA_EXIT = 2
STAGE_EXIT = 3

_DATA_ERRORS = (
    DataError,
    cp.ParseError,
    cp.IntegrityError,
    NameTableError,
    sm.SummaryJoinError,
    FileNotFoundError,
    json.JSONDecodeError,
)
_STAGE_ERRORS = (StageError, gen.GenerationError, gen.RenderError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _pairs_arg(values: list[str], what: str) -> dict[str, str]:
    out = {}
    for item in values or []:
        if "=" not in item:
            raise DataError(f"{what} must look like name=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key] = value
    return out


def _load_docs(path: str) -> list[cp.AnnotatedDocument]:
    """Accept a raw column corpus or the ingest JSONL output."""
    with open(path, encoding="utf-8") as fh:
        head = fh.read(1)
    if head == "#":
        return cp.parse_conll_corpus(path)
    return list(cp.read_jsonl(path))


# --- commands -----------------------------------------------------------------


def cmd_ingest(args) -> int:
    docs = cp.parse_conll_corpus(args.corpus)
    problems = [f"{d.id}: {p}" for d in docs for p in cp.validate_document(d)]
    if problems:
        raise DataError("invalid documents: " + "; ".join(problems))
    docs.sort(key=lambda d: d.id)
    cp.write_jsonl(docs, args.out)
    print(f"ingested {len(docs)} documents -> {args.out}")
    return 0


def cmd_build_templates(args) -> int:
    docs = _load_docs(args.documents)
    content = tp.load_content_words(args.content_words) if args.content_words else {}
    templates = [tp.build_template(d, content.get(d.id, ())) for d in docs]
    tp.write_templates(templates, args.out)
    eligible = sum(t.eligible for t in templates)
    print(f"built {len(templates)} templates ({eligible} eligible) -> {args.out}")
    return 0


def cmd_generate(args) -> int:
    templates = list(tp.read_templates(args.templates))
    if args.content_words:
        spans = tp.load_content_words(args.content_words)
        templates = [
            tp.attach_content_words(t, spans[t.doc_id]) if t.doc_id in spans else t
            for t in templates
        ]
    scheme = gen.make_scheme(
        args.scheme,
        variants=args.variants,
        alter_last_names=args.alter_last_names,
        intersection=_pairs_arg(args.intersection, "--intersection") or None,
    )
    census = race = None
    if scheme.is_race:
        from .names import load_race_names

        race = load_race_names(args.race_names)
    else:
        census = resolve_ambiguous(load_census(args.census_male, args.census_female))
    pool = load_last_name_pool(args.last_names) if args.last_names else None
    inputs = gen.generate_corpus(
        templates, scheme, args.seed, census=census, race_table=race, last_name_pool=pool
    )
    gen.write_inputs(inputs, args.out)
    originals = len({g.original_id for g in inputs})
    print(f"generated {len(inputs)} inputs from {originals} originals -> {args.out}")
    return 0


def cmd_align(args) -> int:
    templates = {t.doc_id: t for t in tp.read_templates(args.templates)}
    inputs = list(gen.read_inputs(args.inputs))
    by_id = {g.id: g for g in inputs}
    census_raw = load_census(args.census_male, args.census_female)
    lexicon = sm.build_lexicon(
        [a.first for g in inputs for a in g.assignments],
        [a.last for g in inputs for a in g.assignments],
        [e.first for t in templates.values() for e in t.entities],
        [e.last for t in templates.values() for e in t.entities],
        census=census_raw,
    )
    entity_index = {g.id: al.input_entities(templates[g.original_id], g) for g in inputs}
    sources = {g.id: g.tokens for g in inputs}
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sidecars = _pairs_arg(args.ner, "--ner")
    for system, path in sorted(_pairs_arg(args.summaries, "--summaries").items()):
        ner = sm.load_ner_sidecar(sidecars[system]) if system in sidecars else None
        records = sm.load_summaries(path, by_id, lexicon=lexicon, ner_spans=ner)
        aligned, counts = al.align_corpus(records, entity_index, sources)
        out = out_dir / f"alignments.{system}.jsonl"
        al.write_alignments(aligned, out)
        c = counts.get(system, {})
        print(
            f"{system}: {c.get('aligned_summary_entities', 0)} aligned, "
            f"{c.get('hallucinated', 0)} hallucinated, "
            f"{c.get('unresolved', 0)} unresolved -> {out}"
        )
    return 0


def cmd_classify_hallucinations(args) -> int:
    rows = al.read_alignment_rows(args.alignments)
    client = gid.FixtureLookupClient(args.cache)
    census = resolve_ambiguous(load_census(args.census_male, args.census_female))
    verdicts = {}
    counts = {}
    for row in rows:
        if row["status"] != al.HALLUCINATED:
            continue
        key = " ".join(row["entity_tokens"]).lower()
        if key not in verdicts:
            verdicts[key] = gid.classify(row["entity_tokens"], client, census)
        counts[key] = counts.get(key, 0) + 1
    out_rows = [
        {
            "entity": key,
            "count": counts[key],
            "gender": verdicts[key].gender,
            "source": verdicts[key].source,
        }
        for key in sorted(verdicts)
    ]
    Path(args.out).write_text(
        json.dumps(out_rows, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    classified = sum(1 for r in out_rows if r["gender"] != "unknown")
    print(f"classified {classified}/{len(out_rows)} distinct hallucinated entities -> {args.out}")
    return 0


def cmd_analyze_input_bias(args) -> int:
    docs = _load_docs(args.corpus)
    word_lists = load_word_lists(args.word_lists)
    split = ib.split_by_identifier_majority([d.token_texts() for d in docs], word_lists)
    result = ib.fightin_words(
        split["male"], split["female"], pairs=word_pairs(word_lists), alpha=args.alpha
    )
    summary = {
        "documents": len(docs),
        "male_majority_docs": result.docs_a,
        "female_majority_docs": result.docs_b,
        "male_associated": [[t, round(z, 4)] for t, z in result.top("a", 25)],
        "female_associated": [[t, round(z, 4)] for t, z in result.top("b", 25)],
    }
    out = Path(args.out)
    out.with_suffix(".json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    with out.with_suffix(".csv").open("w", encoding="utf-8") as fh:
        fh.write("token,zscore\n")
        for token, z in sorted(result.zscores.items(), key=lambda kv: (-kv[1], kv[0])):
            fh.write(f"{token},{z!r}\n")
    print(
        f"{result.docs_a} male-majority vs {result.docs_b} female-majority docs -> "
        f"{out.with_suffix('.json')}, {out.with_suffix('.csv')}"
    )
    return 0


def cmd_simulate_baselines(args) -> int:
    docs = _load_docs(args.corpus)
    word_lists = load_word_lists(args.word_lists)
    result = ib.simulation_experiment(docs, word_lists, seed=args.seed)
    out = Path(args.out)
    out.with_suffix(".json").write_text(
        json.dumps(result, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    with out.with_suffix(".csv").open("w", encoding="utf-8") as fh:
        fh.write("algorithm,uniform,adjusted\n")
        for algorithm in ib.ALGORITHMS:
            scores = result["scores"][algorithm]
            fh.write(f"{algorithm},{scores['uniform']!r},{scores['adjusted']!r}\n")
    def show(value):
        return "n/a" if value is None else f"{value:.3f}"

    for algorithm in ib.ALGORITHMS:
        scores = result["scores"][algorithm]
        print(f"{algorithm:>7}: uniform={show(scores['uniform'])} adjusted={show(scores['adjusted'])}")
    return 0


def _config_from_args(args) -> PipelineConfig:
    overrides = {
        "out_dir": args.out_dir,
        "seed": args.seed,
        "jobs": args.jobs,
    }
    return PipelineConfig.from_file(args.config, **overrides)


def cmd_score(args) -> int:
    config = _config_from_args(args)
    run_pipeline(config)
    print(Path(config.out_dir) / config.config_hash() / "scores.json")
    return 0


def cmd_report(args) -> int:
    with open(args.scores, encoding="utf-8") as fh:
        report = json.load(fh)
    Path(args.out).write_text(render_report(report, args.format), encoding="utf-8")
    print(args.out)
    return 0


def cmd_run(args) -> int:
    config = _config_from_args(args)
    report = run_pipeline(config)
    art_dir = Path(config.out_dir) / config.config_hash()
    for fmt, name in (("markdown", "report.md"), ("csv", "report.csv"), ("json", "report.json")):
        (art_dir / name).write_text(render_report(report, fmt), encoding="utf-8")
    print(art_dir)
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="sumprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse a column-annotated corpus to JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-templates", help="derive fillable templates")
    p.add_argument("--documents", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--content-words")
    p.set_defaults(func=cmd_build_templates)

    p = sub.add_parser("generate", help="generate controlled input variants")
    p.add_argument("--templates", required=True)
    p.add_argument("--scheme", required=True, choices=gen.SCHEME_KINDS)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--variants", type=int, default=20)
    p.add_argument("--alter-last-names", action="store_true")
    p.add_argument("--last-names", help="text file with one last name per line")
    p.add_argument("--content-words", help="content-word annotation JSONL")
    p.add_argument("--census-male")
    p.add_argument("--census-female")
    p.add_argument("--race-names")
    p.add_argument("--intersection", nargs="*", metavar="GROUP=GENDER")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("align", help="align summary entities to input entities")
    p.add_argument("--templates", required=True)
    p.add_argument("--inputs", required=True)
    p.add_argument("--summaries", nargs="+", required=True, metavar="SYSTEM=PATH")
    p.add_argument("--ner", nargs="*", metavar="SYSTEM=PATH")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--census-male")
    p.add_argument("--census-female")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("classify-hallucinations", help="gender-classify hallucinated entities")
    p.add_argument("--alignments", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--census-male")
    p.add_argument("--census-female")
    p.set_defaults(func=cmd_classify_hallucinations)

    p = sub.add_parser("analyze-input-bias", help="identifier split + log-odds contrast")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output prefix (.json/.csv)")
    p.add_argument("--word-lists")
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_analyze_input_bias)

    p = sub.add_parser("simulate-baselines", help="score the four baseline summarizers")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, help="output prefix (.json/.csv)")
    p.add_argument("--word-lists")
    p.set_defaults(func=cmd_simulate_baselines)

    for name, func, help_text in (
        ("score", cmd_score, "run the pipeline through scores.json"),
        ("run", cmd_run, "run the pipeline and render reports"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out-dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="render a scores.json file")
    p.add_argument("--scores", required=True)
    p.add_argument("--format", default="markdown", choices=["markdown", "md", "csv", "json"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _STAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
