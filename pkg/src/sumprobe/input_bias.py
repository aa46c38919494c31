"""Lexical input-bias analysis and the baseline-summarizer simulation.

Contains the informed-Dirichlet log-odds contrast (z-scores per token)
between identifier-majority splits, the keyword topic heuristic, four
deliberately simple extractive baselines, and a synthetic topic/gender
correlated corpus generator that makes the simulation reproducible
without licensed news data.
"""

from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import AnnotatedDocument, Token
from .measures import count_identifiers, identifier_reference, uniform, word_list_inclusion
from .names import load_topic_tokens, load_word_lists, word_pairs
from .seeding import derive_rng

# POS-ambiguous pronouns excluded from the lexical contrast
IGNORED_PRONOUNS = {"him", "her", "his", "hers"}

ALGORITHMS = ("random", "lead", "topic", "sexist")

_TOPIC_SENTENCES = {"family": 1, "unknown": 3, "sport": 6}


def _clean(token: str) -> str:
    return token.strip(string.punctuation).lower()


# --- corpus split and log-odds contrast --------------------------------------


def split_by_identifier_majority(
    docs: Sequence[Sequence[str]], word_lists: dict[str, list[str]]
) -> dict[str, list[Sequence[str]]]:
    """Partition documents by which group's identifiers are more frequent;
    exact ties (including all-zero) are excluded."""
    out: dict[str, list[Sequence[str]]] = {g: [] for g in word_lists}
    for tokens in docs:
        counts = count_identifiers(tokens, word_lists)
        best = max(counts.values())
        winners = [g for g, c in counts.items() if c == best]
        if best > 0 and len(winners) == 1:
            out[winners[0]].append(tokens)
    return out


@dataclass(frozen=True)
class FightinWordsResult:
    zscores: dict[str, float]  # > 0: associated with the first corpus
    tokens_a: int
    tokens_b: int
    docs_a: int
    docs_b: int

    def top(self, direction: str, k: int = 10) -> list[tuple[str, float]]:
        reverse = direction == "a"
        items = sorted(
            self.zscores.items(),
            key=lambda kv: (-kv[1], kv[0]) if reverse else (kv[1], kv[0]),
        )
        return [(t, z if reverse else -z) for t, z in items[:k]]


def _contrast_tokens(
    docs: Iterable[Sequence[str]], marker: dict[str, str]
) -> tuple[Counter, int]:
    counts: Counter = Counter()
    for tokens in docs:
        for token in tokens:
            t = _clean(token)
            if not t or t in IGNORED_PRONOUNS:
                continue
            counts[marker.get(t, t)] += 1
    return counts, sum(counts.values())


def fightin_words(
    docs_a: Sequence[Sequence[str]],
    docs_b: Sequence[Sequence[str]],
    pairs: Sequence[tuple[str, str]] = (),
    alpha: float = 0.01,
) -> FightinWordsResult:
    """Per-token log-odds z-scores between two corpora under an
    uninformative Dirichlet prior.

    Paired identifier variants (e.g. father/mother) are folded into one
    shared marker token before counting, so the contrast compares the
    male variant's frequency in corpus A against the female variant's in
    corpus B rather than each word against its own counterpart.
    """
    marker = {}
    for male_word, female_word in pairs:
        name = f"{male_word}/{female_word}"
        marker[male_word] = name
        marker[female_word] = name
    counts_a, n_a = _contrast_tokens(docs_a, marker)
    counts_b, n_b = _contrast_tokens(docs_b, marker)
    vocab = sorted(set(counts_a) | set(counts_b))
    alpha0 = alpha * len(vocab)
    zscores: dict[str, float] = {}
    for word in vocab:
        ya = counts_a[word]
        yb = counts_b[word]
        delta = (
            math.log((ya + alpha) / (n_a + alpha0 - ya - alpha))
            - math.log((yb + alpha) / (n_b + alpha0 - yb - alpha))
        )
        sigma2 = 1.0 / (ya + alpha) + 1.0 / (yb + alpha)
        zscores[word] = delta / math.sqrt(sigma2)
    return FightinWordsResult(
        zscores=zscores,
        tokens_a=n_a,
        tokens_b=n_b,
        docs_a=len(docs_a),
        docs_b=len(docs_b),
    )


# --- topic heuristic and baselines --------------------------------------------


def classify_topic(
    tokens: Iterable[str], sport: Sequence[str], family: Sequence[str]
) -> str:
    sport_words = set(sport)
    family_words = set(family)
    sport_count = family_count = 0
    for token in tokens:
        t = _clean(token)
        if t in sport_words:
            sport_count += 1
        if t in family_words:
            family_count += 1
    if sport_count > family_count:
        return "sport"
    if family_count > sport_count:
        return "family"
    return "unknown"


def _sentence_tokens(doc: AnnotatedDocument) -> list[list[str]]:
    return [[t.text for t in doc.tokens[s : e + 1]] for s, e in doc.sentence_spans()]


def baseline_summarize(
    doc: AnnotatedDocument,
    algorithm: str,
    rng,
    word_lists: dict[str, list[str]] | None = None,
    topic_tokens: dict[str, list[str]] | None = None,
) -> list[int]:
    """Sentence indices (document order) selected by one baseline."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown baseline {algorithm!r}")
    sentences = _sentence_tokens(doc)
    n = len(sentences)
    if algorithm == "lead":
        return list(range(min(3, n)))
    if algorithm == "random":
        return sorted(rng.sample(range(n), min(3, n)))

    if word_lists is None:
        word_lists = load_word_lists()
    if topic_tokens is None:
        topic_tokens = load_topic_tokens()
    label = classify_topic(
        doc.token_texts(), topic_tokens["sport"], topic_tokens["family"]
    )
    if algorithm == "topic":
        want = _TOPIC_SENTENCES[label]
        return sorted(rng.sample(range(n), min(want, n)))

    # sexist: maximize one gender's identifiers depending on topic
    if label == "unknown":
        return sorted(rng.sample(range(n), min(3, n)))
    target = "male" if label == "sport" else "female"
    per_sentence = [
        count_identifiers(sent, word_lists)[target] for sent in sentences
    ]
    order = list(range(n))
    rng.shuffle(order)  # randomize ties before the stable sort
    order.sort(key=lambda i: -per_sentence[i])
    return sorted(order[: min(3, n)])


def simulation_experiment(
    docs: Sequence[AnnotatedDocument],
    word_lists: dict[str, list[str]] | None = None,
    seed: int = 0,
    topic_tokens: dict[str, list[str]] | None = None,
    algorithms: Sequence[str] = ALGORITHMS,
) -> dict:
    """Word-list inclusion of each baseline under uniform and adjusted
    (input-distribution) references, plus corpus composition stats."""
    if word_lists is None:
        word_lists = load_word_lists()
    if topic_tokens is None:
        topic_tokens = load_topic_tokens()
    doc_tokens = [d.token_texts() for d in docs]
    adjusted_ref = identifier_reference(doc_tokens, word_lists)
    uniform_ref = uniform(word_lists)

    stats: dict[str, dict] = {}
    by_topic: dict[str, Counter] = {}
    for tokens in doc_tokens:
        label = classify_topic(tokens, topic_tokens["sport"], topic_tokens["family"])
        c = by_topic.setdefault(label, Counter())
        c["docs"] += 1
        c.update(count_identifiers(tokens, word_lists))
    for label, c in sorted(by_topic.items()):
        idents = c["male"] + c["female"]
        stats[label] = {
            "docs": c["docs"],
            "female_share": (c["female"] / idents) if idents else None,
        }

    scores: dict[str, dict[str, float | None]] = {}
    for algorithm in algorithms:
        summaries = []
        for doc in docs:
            rng = derive_rng(seed, "baseline", algorithm, doc.id)
            picked = baseline_summarize(doc, algorithm, rng, word_lists, topic_tokens)
            sentences = _sentence_tokens(doc)
            summaries.append([t for i in picked for t in sentences[i]])
        scores[algorithm] = {
            "uniform": word_list_inclusion(summaries, word_lists, uniform_ref),
            "adjusted": (
                word_list_inclusion(summaries, word_lists, adjusted_ref)
                if adjusted_ref is not None
                else None
            ),
        }
    return {"stats": stats, "scores": scores}


# --- synthetic topic/gender corpus ---------------------------------------------


_FILLER = (
    "the a an officials said yesterday city report market plan new old people "
    "country government week street house music travel weather food school work "
    "road light water night morning paper letter phone idea question answer "
    "story number group part time day council budget committee minister vote "
    "study record price growth building bridge river region museum festival"
).split()


@dataclass(frozen=True)
class SyntheticCorpusConfig:
    n_docs: int = 5000
    topic_shares: tuple[float, float, float] = (0.4, 0.4, 0.2)  # sport, family, neutral
    male_rate: dict[str, float] = field(
        default_factory=lambda: {"sport": 0.85, "family": 0.3, "neutral": 0.5}
    )
    sentences: tuple[int, int] = (6, 12)
    sentence_length: tuple[int, int] = (8, 14)
    topic_token_prob: float = 0.6
    identifier_prob: float = 0.5


def make_synthetic_corpus(
    config: SyntheticCorpusConfig, seed: int = 0,
    word_lists: dict[str, list[str]] | None = None,
    topic_tokens: dict[str, list[str]] | None = None,
) -> list[AnnotatedDocument]:
    """Documents with a planted topic/identifier-gender correlation.

    Identifier tokens are drawn from the word lists minus any overlap with
    the topic keyword lists, so planted topic signal and planted gender
    signal stay independent knobs.
    """
    if word_lists is None:
        word_lists = load_word_lists()
    if topic_tokens is None:
        topic_tokens = load_topic_tokens()
    topic_vocab = {t for words in topic_tokens.values() for t in words}
    ident_pool = {
        g: sorted(set(words) - topic_vocab) for g, words in word_lists.items()
    }
    topics = ("sport", "family", "neutral")
    docs: list[AnnotatedDocument] = []
    for i in range(config.n_docs):
        rng = derive_rng(seed, "synthdoc", i)
        topic = rng.choices(topics, weights=config.topic_shares, k=1)[0]
        tokens: list[Token] = []
        n_sentences = rng.randint(*config.sentences)
        for s in range(n_sentences):
            words: list[str] = []
            length = rng.randint(*config.sentence_length)
            if topic != "neutral" and rng.random() < config.topic_token_prob:
                words.extend(
                    rng.choices(topic_tokens[topic], k=rng.randint(1, 2))
                )
            if rng.random() < config.identifier_prob:
                gender = (
                    "male" if rng.random() < config.male_rate[topic] else "female"
                )
                words.extend(rng.choices(ident_pool[gender], k=rng.randint(1, 2)))
            while len(words) < length:
                words.append(rng.choice(_FILLER))
            rng.shuffle(words)
            words.append(".")
            for w in words:
                tokens.append(Token(len(tokens), w, s, ""))
        docs.append(
            AnnotatedDocument(id=f"synth_{i:05d}#0", tokens=tokens, chains={}, entities=[])
        )
    return docs
