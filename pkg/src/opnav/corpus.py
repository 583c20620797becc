"""Hierarchical knowledge corpus: XML parsing, validation, serialization.

A corpus is a single tree of content nodes (safety notes, operating
procedures, maintenance checklists, ...). Nodes carry keywords consumed by
the indexer, explicit cross-links, and opaque media references. Child order
is significant because procedures are stepwise. Unknown elements inside a
node are preserved verbatim so corpora written by newer tooling survive a
round-trip here unchanged.
"""
from __future__ import annotations

import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

NODE_TYPES = (
    "safety",
    "hazard",
    "operation",
    "maintenance",
    "message",
    "quality",
    "tooling",
    "generic",
)

_KNOWN_CHILD_TAGS = frozenset({"body", "kw", "related", "media", "node"})


class CorpusError(Exception):
    """Base class for corpus parse/validation failures."""


class MalformedMarkup(CorpusError):
    """Input is not well-formed or violates the element vocabulary."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DuplicateId(CorpusError):
    def __init__(self, node_id: str):
        super().__init__(f"duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingReference(CorpusError):
    def __init__(self, ref: str, source: str):
        super().__init__(f"node {source!r} references unknown id {ref!r}")
        self.ref = ref
        self.source = source


class MultipleRoots(CorpusError):
    def __init__(self, ids: list[str]):
        super().__init__(f"corpus has multiple root nodes: {', '.join(ids)}")
        self.ids = ids


@dataclass(frozen=True)
class ContentNode:
    """One knowledge item. Children are ordered; keywords are unordered."""

    id: str
    title: str = ""
    body: str = ""
    node_type: str = "generic"
    keywords: frozenset[str] = frozenset()
    parent: str | None = None
    children: tuple[str, ...] = ()
    related: tuple[str, ...] = ()
    media_refs: tuple[str, ...] = ()
    extras: tuple[str, ...] = ()  # unknown child elements, serialized verbatim


@dataclass(frozen=True)
class ContentTree:
    """Immutable corpus snapshot. Mutations produce a new tree with version+1."""

    root: str
    nodes: dict[str, ContentNode]
    version: int = 1

    def node(self, node_id: str) -> ContentNode:
        return self.nodes[node_id]

    def with_version(self, version: int) -> "ContentTree":
        return replace(self, version=version)


@dataclass(frozen=True)
class Violation:
    """One broken invariant, named by rule. Violations are data, not errors."""

    rule: str
    node_id: str
    message: str


@dataclass(frozen=True)
class SynonymTable:
    """Groups of mutually interchangeable lower-case words."""

    groups: tuple[tuple[str, ...], ...] = ()

    def group_of(self, word: str) -> tuple[str, ...] | None:
        for group in self.groups:
            if word in group:
                return group
        return None


def load_synonyms(text: str) -> SynonymTable:
    """Parse the synonyms file: one comma-separated group per line, # comments.

    Words are lower-cased; a word may belong to at most one group.
    """
    groups: list[tuple[str, ...]] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = tuple(w.strip().lower() for w in line.split(",") if w.strip())
        if len(words) < 2:
            raise MalformedMarkup(f"synonym group needs at least two words (line {lineno})")
        for w in words:
            if w in seen:
                raise MalformedMarkup(
                    f"word {w!r} appears in more than one synonym group (line {lineno})"
                )
            seen[w] = lineno
        groups.append(words)
    return SynonymTable(groups=tuple(groups))


def parse_corpus(markup: str) -> ContentTree:
    """Parse an XML corpus document into a validated ContentTree.

    Accepts either a `<corpus version="N">` wrapper holding one root
    `<node>`, or a bare `<node>` document (version defaults to 1).
    """
    try:
        root_elem = ET.fromstring(markup)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise MalformedMarkup(str(exc), line, column) from exc

    if root_elem.tag == "corpus":
        version_text = root_elem.get("version", "1")
        try:
            version = int(version_text)
        except ValueError:
            raise MalformedMarkup(f"corpus version must be an integer, got {version_text!r}")
        node_elems = [e for e in root_elem if e.tag == "node"]
        if not node_elems:
            raise MalformedMarkup("corpus element contains no root node")
        if len(node_elems) > 1:
            raise MultipleRoots([e.get("id", "?") for e in node_elems])
        top = node_elems[0]
    elif root_elem.tag == "node":
        version = 1
        top = root_elem
    else:
        raise MalformedMarkup(f"expected <corpus> or <node> document, got <{root_elem.tag}>")

    nodes: dict[str, ContentNode] = {}
    _read_node(top, parent=None, nodes=nodes)
    tree = ContentTree(root=top.get("id"), nodes=nodes, version=version)

    for node in nodes.values():
        for ref in node.related:
            if ref not in nodes:
                raise DanglingReference(ref, node.id)
    return tree


def _read_node(elem: ET.Element, parent: str | None, nodes: dict[str, ContentNode]) -> str:
    node_id = elem.get("id")
    if not node_id:
        raise MalformedMarkup("node element missing required id attribute")
    if node_id in nodes:
        raise DuplicateId(node_id)
    node_type = elem.get("type", "generic")
    if node_type not in NODE_TYPES:
        raise MalformedMarkup(f"node {node_id!r} has unknown type {node_type!r}")

    body = ""
    keywords: list[str] = []
    related: list[str] = []
    media: list[str] = []
    extras: list[str] = []
    child_elems: list[ET.Element] = []
    for child in elem:
        if child.tag == "body":
            body = (child.text or "").strip()
        elif child.tag == "kw":
            keywords.append((child.text or "").strip().lower())
        elif child.tag == "related":
            ref = child.get("ref")
            if ref is None:
                raise MalformedMarkup(f"related element under node {node_id!r} missing ref")
            related.append(ref)
        elif child.tag == "media":
            path = child.get("path")
            if path is None:
                raise MalformedMarkup(f"media element under node {node_id!r} missing path")
            media.append(path)
        elif child.tag == "node":
            child_elems.append(child)
        else:
            extras.append(ET.tostring(_canonical_extra(child), encoding="unicode"))

    # register before descending so duplicate ids in subtrees are caught
    placeholder = ContentNode(id=node_id)
    nodes[node_id] = placeholder
    child_ids = [_read_node(c, parent=node_id, nodes=nodes) for c in child_elems]

    nodes[node_id] = ContentNode(
        id=node_id,
        title=elem.get("title", ""),
        body=body,
        node_type=node_type,
        keywords=frozenset(k for k in keywords if k),
        parent=parent,
        children=tuple(child_ids),
        related=tuple(related),
        media_refs=tuple(media),
        extras=tuple(extras),
    )
    return node_id


def _canonical_extra(elem: ET.Element) -> ET.Element:
    # Indentation added on serialize must not change the stored fragment,
    # so whitespace-only text/tails are dropped inside preserved elements.
    clone = ET.Element(elem.tag, dict(elem.attrib))
    if elem.text and elem.text.strip():
        clone.text = elem.text
    for sub in elem:
        sub_clone = _canonical_extra(sub)
        if sub.tail and sub.tail.strip():
            sub_clone.tail = sub.tail
        clone.append(sub_clone)
    return clone


def serialize_corpus(tree: ContentTree) -> str:
    """Serialize a tree to UTF-8 XML text. parse_corpus inverts this exactly."""
    corpus = ET.Element("corpus", {"version": str(tree.version)})
    _write_node(corpus, tree, tree.root)
    ET.indent(corpus, space="  ")
    buf = io.StringIO()
    buf.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    buf.write(ET.tostring(corpus, encoding="unicode"))
    buf.write("\n")
    return buf.getvalue()


def _write_node(parent_elem: ET.Element, tree: ContentTree, node_id: str) -> None:
    node = tree.nodes[node_id]
    attrs = {"id": node.id}
    if node.title:
        attrs["title"] = node.title
    if node.node_type != "generic":
        attrs["type"] = node.node_type
    elem = ET.SubElement(parent_elem, "node", attrs)
    if node.body:
        ET.SubElement(elem, "body").text = node.body
    for kw in sorted(node.keywords):
        ET.SubElement(elem, "kw").text = kw
    for ref in node.related:
        ET.SubElement(elem, "related", {"ref": ref})
    for path in node.media_refs:
        ET.SubElement(elem, "media", {"path": path})
    for extra in node.extras:
        elem.append(ET.fromstring(extra))
    for child_id in node.children:
        _write_node(elem, tree, child_id)


def validate(tree: ContentTree) -> list[Violation]:
    """Check every tree invariant. Empty result means the tree is valid.

    Total: never raises on a malformed-but-representable tree.
    """
    violations: list[Violation] = []

    seen_ids: dict[str, str] = {}
    for key, node in tree.nodes.items():
        if node.id != key:
            violations.append(
                Violation("IdMismatch", key, f"stored under {key!r} but carries id {node.id!r}")
            )
        if node.id in seen_ids:
            violations.append(Violation("DuplicateId", node.id, "id used by more than one node"))
        seen_ids[node.id] = key

    if tree.root not in tree.nodes:
        violations.append(Violation("MissingRoot", tree.root, "root id not present in nodes"))
        return violations

    for node in tree.nodes.values():
        if node.parent is not None and node.parent not in tree.nodes:
            violations.append(
                Violation("DanglingReference", node.id, f"parent {node.parent!r} does not exist")
            )
        for child_id in node.children:
            if child_id not in tree.nodes:
                violations.append(
                    Violation("DanglingReference", node.id, f"child {child_id!r} does not exist")
                )
            elif tree.nodes[child_id].parent != node.id:
                violations.append(
                    Violation(
                        "InconsistentParent",
                        child_id,
                        f"listed as child of {node.id!r} but parent field says "
                        f"{tree.nodes[child_id].parent!r}",
                    )
                )
        for ref in node.related:
            if ref not in tree.nodes:
                violations.append(
                    Violation("DanglingReference", node.id, f"related {ref!r} does not exist")
                )
        if node.parent is not None and node.parent in tree.nodes:
            if node.id not in tree.nodes[node.parent].children:
                violations.append(
                    Violation(
                        "InconsistentParent",
                        node.id,
                        f"parent {node.parent!r} does not list it as a child",
                    )
                )
        for kw in node.keywords:
            if not kw:
                violations.append(Violation("EmptyKeyword", node.id, "empty keyword"))
        if node.node_type not in NODE_TYPES:
            violations.append(
                Violation("BadNodeType", node.id, f"unknown node type {node.node_type!r}")
            )

    if tree.nodes[tree.root].parent is not None:
        violations.append(Violation("BadRoot", tree.root, "root node has a parent"))

    reachable: set[str] = set()
    stack = [tree.root]
    while stack:
        current = stack.pop()
        if current in reachable or current not in tree.nodes:
            continue
        reachable.add(current)
        stack.extend(tree.nodes[current].children)
    for node_id in tree.nodes:
        if node_id not in reachable:
            violations.append(Violation("Unreachable", node_id, "not reachable from root"))

    edge_count = sum(len(n.children) for n in tree.nodes.values())
    if not violations and edge_count != len(tree.nodes) - 1:
        violations.append(
            Violation("NotATree", tree.root, f"{edge_count} edges for {len(tree.nodes)} nodes")
        )
    return violations
