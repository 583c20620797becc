import math
import random

import pytest

from opnav.corpus import ContentNode, ContentTree
from opnav.index import (
    EmptyQuery,
    build_index,
    search,
    suggest_refinement,
    tokenize,
)


def make_tree(bodies: dict[str, str], keywords: dict[str, set] | None = None) -> ContentTree:
    keywords = keywords or {}
    ids = sorted(bodies)
    nodes = {
        "root": ContentNode(id="root", children=tuple(ids)),
    }
    for node_id in ids:
        nodes[node_id] = ContentNode(
            id=node_id,
            body=bodies[node_id],
            keywords=frozenset(keywords.get(node_id, ())),
            parent="root",
        )
    return ContentTree(root="root", nodes=nodes)


def reference_score(docs: dict[str, list[str]], query: list[str], doc_id: str) -> float:
    """Brute-force restatement of the scoring formula for oracle checks."""
    n = len(docs)
    avg = sum(len(t) for t in docs.values()) / n
    score = 0.0
    for term in dict.fromkeys(query):
        df = sum(1 for terms in docs.values() if term in terms)
        if term not in docs[doc_id]:
            continue
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        tf = docs[doc_id].count(term)
        score += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * len(docs[doc_id]) / avg))
    return score


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_stopword_removal(self):
        assert tokenize("Check the hydraulic pressure!", frozenset({"the"})) == [
            "check", "hydraulic", "pressure",
        ]

    def test_punctuation_split_digits_kept(self):
        assert tokenize("lube/filters 2x", frozenset()) == ["lube", "filters", "2x"]

    def test_order_preserved(self):
        assert tokenize("chuck pressure chuck", frozenset()) == [
            "chuck", "pressure", "chuck",
        ]


class TestBuildIndex:
    def test_direct_counts(self):
        tree = make_tree({"n": "spindle spindle coolant"})
        idx = build_index(tree, boost=3.0)
        assert idx.postings["spindle"] == (("n", 2.0),)
        assert idx.postings["coolant"] == (("n", 1.0),)
        assert idx.doc_stats["n"] == 3
        assert idx.avg_doc_len == pytest.approx(3.0)

    def test_bundled_corpus(self, tree, index):
        content_nodes = sum(
            1 for n in tree.nodes.values() if n.body or n.keywords
        )
        assert index.doc_count == content_nodes
        assert "lubrication" in index.postings

    def test_empty_tree(self):
        tree = ContentTree(root="r", nodes={"r": ContentNode(id="r")})
        idx = build_index(tree)
        assert idx.doc_count == 0
        assert search(idx, ["anything"], k=5) == []

    def test_keyword_boost_applied(self):
        tree = make_tree({"n": "spindle"}, {"n": {"coolant"}})
        idx = build_index(tree, boost=3.0)
        assert idx.postings["coolant"] == (("n", 3.0),)
        assert idx.doc_stats["n"] == 2

    def test_boost_below_one_rejected(self):
        tree = make_tree({"n": "spindle"})
        with pytest.raises(ValueError):
            build_index(tree, boost=0.5)


class TestSearch:
    def test_single_doc_single_term_score(self):
        tree = make_tree({"n": "coolant"})
        idx = build_index(tree)
        hits = search(idx, ["coolant"], k=5)
        assert len(hits) == 1
        assert hits[0].node_id == "n"
        assert hits[0].score == pytest.approx(math.log(4 / 3), abs=1e-12)
        assert hits[0].matched_terms == frozenset({"coolant"})

    def test_absent_term(self):
        tree = make_tree({"n": "coolant"})
        idx = build_index(tree)
        assert search(idx, ["spindle"], k=5) == []

    def test_three_doc_ranking_matches_brute_force(self):
        bodies = {
            "a": "chuck pressure gauge",
            "b": "chuck wrench holder",
            "c": "coolant tank level",
        }
        tree = make_tree(bodies)
        idx = build_index(tree)
        query = ["chuck", "pressure"]
        hits = search(idx, query, k=10)
        assert [h.node_id for h in hits] == ["a", "b"]
        docs = {k: v.split() for k, v in bodies.items()}
        for hit in hits:
            assert hit.score == pytest.approx(
                reference_score(docs, query, hit.node_id), abs=1e-12
            )

    def test_empty_query_raises(self):
        tree = make_tree({"n": "coolant"})
        idx = build_index(tree)
        with pytest.raises(EmptyQuery):
            search(idx, ["", "  "], k=3)

    def test_k_below_one_rejected(self):
        idx = build_index(make_tree({"n": "coolant"}))
        with pytest.raises(ValueError):
            search(idx, ["coolant"], k=0)

    def test_determinism(self, index):
        first = search(index, ["check", "pressure", "filter"], k=10)
        second = search(index, ["check", "pressure", "filter"], k=10)
        assert first == second

    def test_monotonicity_adding_matching_term(self, index):
        base = {h.node_id: h.score for h in search(index, ["chuck"], k=50)}
        more = {h.node_id: h.score for h in search(index, ["chuck", "pressure"], k=50)}
        for node_id, score in base.items():
            assert more[node_id] >= score - 1e-12

    def test_subset_dominance_equal_lengths(self):
        # distinct tokens per doc, equal lengths: superset matches outrank
        rng = random.Random(5)
        vocab = [f"t{i}" for i in range(12)]
        for _ in range(100):
            full = rng.sample(vocab, 6)
            subset_doc = full[:3] + [f"f{i}" for i in range(3)]
            bodies = {
                "full": " ".join(full),
                "part": " ".join(subset_doc),
            }
            idx = build_index(make_tree(bodies))
            hits = search(idx, full, k=2)
            assert [h.node_id for h in hits][0] == "full"


class TestRefinement:
    def make_broad_index(self, n_hits=12, with_term="hydraulic", in_docs=5):
        bodies = {}
        for i in range(n_hits):
            extra = f" {with_term}" if i < in_docs else ""
            bodies[f"d{i:02d}"] = f"machine setup note{i}{extra}"
        tree = make_tree(bodies)
        idx = build_index(tree)
        hits = search(idx, ["machine"], k=50)
        assert len(hits) == n_hits
        return idx, hits

    def test_under_threshold_none(self):
        idx, hits = self.make_broad_index()
        assert suggest_refinement(hits[:3], idx, threshold=10) is None

    def test_suggests_discriminating_term(self):
        idx, hits = self.make_broad_index(n_hits=12, in_docs=5)
        suggestion = suggest_refinement(hits, idx, threshold=10)
        assert suggestion is not None
        assert "hydraulic" in suggestion.discriminating_terms
        assert suggestion.discriminating_terms[0] == "hydraulic"
        assert len(suggestion.discriminating_terms) <= 5

    def test_candidate_counts_bounded(self):
        idx, hits = self.make_broad_index(n_hits=12, in_docs=5)
        suggestion = suggest_refinement(hits, idx, threshold=10)
        hit_ids = {h.node_id for h in hits}
        for term in suggestion.discriminating_terms:
            df = sum(1 for nid, _ in idx.postings[term] if nid in hit_ids)
            assert 1 <= df <= math.ceil(len(hits) / 2)

    def test_degenerate_split_generic_message(self):
        bodies = {f"d{i}": "machine setup shared words" for i in range(12)}
        idx = build_index(make_tree(bodies))
        hits = search(idx, ["machine"], k=50)
        suggestion = suggest_refinement(hits, idx, threshold=10)
        assert suggestion is not None
        assert suggestion.discriminating_terms == ()
        assert suggestion.message

    def test_triggers_exactly_above_threshold(self):
        idx, hits = self.make_broad_index(n_hits=12)
        for threshold in range(1, 15):
            suggestion = suggest_refinement(hits, idx, threshold=threshold)
            assert (suggestion is not None) == (len(hits) > threshold)


class TestIndexCache:
    def test_round_trip(self, tmp_path, tree, index):
        from opnav.index import load_index, save_index

        path = str(tmp_path / "index.bin")
        save_index(index, tree_version=tree.version, path=path)
        loaded = load_index(path, tree_version=tree.version)
        assert loaded == index

    def test_version_mismatch_invalidates(self, tmp_path, tree, index):
        from opnav.index import load_index, save_index

        path = str(tmp_path / "index.bin")
        save_index(index, tree_version=1, path=path)
        assert load_index(path, tree_version=2) is None

    def test_missing_or_garbage_file(self, tmp_path):
        from opnav.index import load_index

        assert load_index(str(tmp_path / "nope.bin"), tree_version=1) is None
        garbage = tmp_path / "garbage.bin"
        garbage.write_bytes(b"\x00\x01not-a-cache")
        assert load_index(str(garbage), tree_version=1) is None
