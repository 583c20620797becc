"""Inverted index over the corpus with Okapi-weighted ranked retrieval.

Terms come from node bodies and keyword tags; keyword occurrences are
boosted because tags exist precisely to steer retrieval. When a query is
over-broad the index can propose discriminating terms that would split the
hit set most evenly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import ContentTree

# Small English stopword list; configurable per call.
DEFAULT_STOPWORDS = frozenset(
    """a an and are as at be but by do for from how i if in into is it its of
    on or that the this to was what when where which who will with you"""
    .split()
)

K1 = 1.2
B = 0.75


class EmptyQuery(Exception):
    """Query had no usable terms after normalization."""


@dataclass(frozen=True)
class SearchIndex:
    """Immutable inverted index. postings[term] is sorted by node id."""

    postings: dict[str, tuple[tuple[str, float], ...]]
    doc_stats: dict[str, int]
    doc_count: int
    avg_doc_len: float
    keyword_boost: float


@dataclass(frozen=True)
class SearchHit:
    node_id: str
    score: float
    matched_terms: frozenset[str]


@dataclass(frozen=True)
class RefinementSuggestion:
    message: str
    discriminating_terms: tuple[str, ...] = ()


def tokenize(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Lower-case and split on non-alphanumeric runs, dropping stopwords."""
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return [t for t in tokens if t not in stopwords]


def build_index(
    tree: ContentTree,
    boost: float = 3.0,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> SearchIndex:
    """Index every node that has a body or keywords.

    Document length counts body and keyword tokens once each; keyword tokens
    additionally contribute `boost` to their term frequency.
    """
    if boost < 1:
        raise ValueError(f"boost must be >= 1, got {boost}")
    freqs: dict[str, dict[str, float]] = {}
    doc_stats: dict[str, int] = {}
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        body_tokens = tokenize(node.body, stopwords)
        kw_tokens: list[str] = []
        for kw in sorted(node.keywords):
            kw_tokens.extend(tokenize(kw, stopwords))
        if not body_tokens and not kw_tokens:
            continue
        tf: dict[str, float] = {}
        for t in body_tokens:
            tf[t] = tf.get(t, 0.0) + 1.0
        for t in kw_tokens:
            tf[t] = tf.get(t, 0.0) + boost
        doc_stats[node_id] = len(body_tokens) + len(kw_tokens)
        for term, count in tf.items():
            freqs.setdefault(term, {})[node_id] = count

    doc_count = len(doc_stats)
    avg_len = sum(doc_stats.values()) / doc_count if doc_count else 0.0
    postings = {
        term: tuple(sorted(by_doc.items())) for term, by_doc in sorted(freqs.items())
    }
    return SearchIndex(
        postings=postings,
        doc_stats=doc_stats,
        doc_count=doc_count,
        avg_doc_len=avg_len,
        keyword_boost=boost,
    )


def _idf(index: SearchIndex, term: str) -> float:
    df = len(index.postings.get(term, ()))
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def search(index: SearchIndex, terms: list[str], k: int) -> list[SearchHit]:
    """Rank documents by summed Okapi term weights; top k, ties by node id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    seen: set[str] = set()
    query: list[str] = []
    for raw in terms:
        term = raw.strip().lower()
        if term and term not in seen:
            seen.add(term)
            query.append(term)
    if not query:
        raise EmptyQuery("no usable query terms")

    scores: dict[str, float] = {}
    matched: dict[str, set[str]] = {}
    for term in query:
        postings = index.postings.get(term)
        if not postings:
            continue
        idf = _idf(index, term)
        for node_id, tf in postings:
            norm = 1.0 - B + B * index.doc_stats[node_id] / index.avg_doc_len
            scores[node_id] = scores.get(node_id, 0.0) + idf * tf * (K1 + 1.0) / (tf + K1 * norm)
            matched.setdefault(node_id, set()).add(term)

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [
        SearchHit(node_id=nid, score=score, matched_terms=frozenset(matched[nid]))
        for nid, score in ranked[:k]
    ]


def suggest_refinement(
    hits: list[SearchHit], index: SearchIndex, threshold: int = 10
) -> RefinementSuggestion | None:
    """Propose narrowing terms when the hit set is over-broad.

    Returns None when len(hits) <= threshold. Candidate terms occur in at
    least one and at most ceil(len(hits)/2) hit documents; the ones splitting
    the hit set most evenly are kept (up to five).
    """
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    if len(hits) <= threshold:
        return None

    hit_ids = {h.node_id for h in hits}
    query_terms = frozenset().union(*(h.matched_terms for h in hits)) if hits else frozenset()
    counts: dict[str, int] = {}
    for term, postings in index.postings.items():
        if term in query_terms:
            continue
        n = sum(1 for node_id, _ in postings if node_id in hit_ids)
        if n:
            counts[term] = n

    half = math.ceil(len(hits) / 2)
    candidates = [(term, n) for term, n in counts.items() if n <= half]
    # most even split first: distance from half the hit count, then frequency
    candidates.sort(key=lambda it: (abs(it[1] - len(hits) / 2.0), -it[1], it[0]))
    terms = tuple(term for term, _ in candidates[:5])
    if terms:
        message = (
            f"Your question matched {len(hits)} resources. Narrow it down by adding "
            f"a more specific term, for example: {', '.join(terms)}."
        )
    else:
        message = (
            f"Your question matched {len(hits)} resources and they all look alike to "
            f"the index. Try asking with different, more specific wording."
        )
    return RefinementSuggestion(message=message, discriminating_terms=terms)


def save_index(index: SearchIndex, tree_version: int, path: str) -> None:
    """Persist a binary index cache keyed by corpus version."""
    import pickle

    with open(path, "wb") as fh:
        pickle.dump({"format": 1, "tree_version": tree_version, "index": index}, fh)


def load_index(path: str, tree_version: int) -> SearchIndex | None:
    """Load a cached index; None when missing or built from another version."""
    import pickle

    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError):
        return None
    if payload.get("format") != 1 or payload.get("tree_version") != tree_version:
        return None
    return payload["index"]
