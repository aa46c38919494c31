#!/usr/bin/env python3
"""Stage a small self-contained demo run: a toy annotated corpus, two toy
summarizers' outputs (one faithful, one that drops female entities and
hallucinates), and a ready-to-run pipeline config.

    python scripts/make_demo_data.py --dir demo
    sumprobe run --config demo/config.json
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from corpusgen import make_fixture_corpus  # noqa: E402

from sumprobe.corpus import write_conll_corpus  # noqa: E402
from sumprobe.generate import generate_corpus, make_scheme  # noqa: E402
from sumprobe.names import load_census, resolve_ambiguous  # noqa: E402
from sumprobe.seeding import derive_rng  # noqa: E402
from sumprobe.templates import build_template  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dir", required=True)
    parser.add_argument("--n-docs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--variants", type=int, default=4)
    parser.add_argument(
        "--relative",
        action="store_true",
        help="store config paths relative to the working directory",
    )
    args = parser.parse_args()

    def as_path(p: Path) -> str:
        import os

        return os.path.relpath(p) if args.relative else str(p)

    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    docs = make_fixture_corpus(args.n_docs, seed=11)
    corpus_path = out / "corpus.conll"
    with corpus_path.open("w", encoding="utf-8") as fh:
        write_conll_corpus(docs, fh)

    templates = [build_template(d) for d in docs]
    census = resolve_ambiguous(load_census())
    inputs = generate_corpus(
        templates, make_scheme("gender_local", variants=args.variants), args.seed, census=census
    )

    def write(system, summarize):
        path = out / f"summaries.{system}.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for gi in inputs:
                rng = derive_rng(args.seed, "demo", system, gi.id)
                fh.write(
                    json.dumps({"input_id": gi.id, "system": system, "summary": summarize(gi, rng)})
                    + "\n"
                )
        return as_path(path)

    def faithful(gi, rng):
        return gi.text

    def skewed(gi, rng):
        kept = []
        for a in gi.assignments:
            rate = 0.9 if a.gender == "male" else 0.45
            if rng.random() < rate:
                kept.append(f"{a.first} {a.last} made the news .")
        if rng.random() < 0.25:
            kept.append("Observers credited Boris Yeltsin with the idea .")
        return " ".join(kept)

    config = {
        "corpus": as_path(corpus_path),
        "scheme": "gender_local",
        "seed": args.seed,
        "variants": args.variants,
        "replicates": 500,
        "summaries": {"faithful": write("faithful", faithful), "skewed": write("skewed", skewed)},
        "out_dir": as_path(out / "results"),
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config, indent=1) + "\n", encoding="utf-8")
    print(f"staged {len(inputs)} inputs for 2 systems")
    print(f"next: sumprobe run --config {config_path}")


if __name__ == "__main__":
    main()
