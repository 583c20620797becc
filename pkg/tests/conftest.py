import random

import pytest

from opnav import study
from opnav.corpus import ContentNode, ContentTree, load_synonyms, parse_corpus
from opnav.index import build_index


@pytest.fixture(scope="session")
def corpus_text():
    return study.data_text("corpus.xml")


@pytest.fixture(scope="session")
def tree(corpus_text):
    return parse_corpus(corpus_text)


@pytest.fixture(scope="session")
def synonyms():
    return load_synonyms(study.data_text("synonyms.txt"))


@pytest.fixture(scope="session")
def index(tree):
    return build_index(tree)


_WORDS = (
    "spindle coolant filter hydraulic chuck pressure axis turret guard swarf "
    "lube panel alarm gauge fixture taper insert slide tank sensor relay"
).split()

_TITLES = ("Check", "Inspect", "Replace", "Restore", "Verify", "Lubrificație")


def random_tree(rng: random.Random, max_nodes: int = 30) -> ContentTree:
    """Arbitrary valid tree: random shape, bodies, keywords, links, extras."""
    n = rng.randint(1, max_nodes)
    ids = [f"n{i}" for i in range(n)]
    parents: dict[str, str | None] = {ids[0]: None}
    children: dict[str, list[str]] = {i: [] for i in ids}
    for i in range(1, n):
        parent = ids[rng.randrange(i)]
        parents[ids[i]] = parent
        children[parent].append(ids[i])

    nodes = {}
    for node_id in ids:
        body_words = rng.sample(_WORDS, rng.randint(0, 6))
        related = [
            other for other in rng.sample(ids, min(len(ids), rng.randint(0, 2)))
            if other != node_id
        ]
        extras = ()
        if rng.random() < 0.2:
            extras = (f'<ext rank="{rng.randint(0, 9)}">note {rng.randrange(100)}</ext>',)
        nodes[node_id] = ContentNode(
            id=node_id,
            title=rng.choice(_TITLES) + f" {rng.randrange(100)}",
            body=" ".join(body_words),
            node_type=rng.choice(("safety", "maintenance", "operation", "generic")),
            keywords=frozenset(rng.sample(_WORDS, rng.randint(0, 3))),
            parent=parents[node_id],
            children=tuple(children[node_id]),
            related=tuple(related),
            media_refs=tuple(
                f"media/{rng.randrange(10)}.png" for _ in range(rng.randint(0, 2))
            ),
            extras=extras,
        )
    return ContentTree(root=ids[0], nodes=nodes, version=rng.randint(1, 9))
