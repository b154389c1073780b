"""Persuasion-technique taxonomy: parsing, validation and ancestor queries.

The hierarchy ships as a data file rather than code so a revised taxonomy
only means swapping the file. Names are compared by exact byte equality;
there is no case folding or normalization.

File format (strict, unknown keys rejected)::

    {"root": "persuasion",
     "edges": [["persuasion", "Ethos"], ["Ethos", "Smears"], ...],
     "leaf_order": ["Smears", ...]}

A node is a leaf iff it has no children; ``leaf_order`` must list exactly
those nodes and fixes the canonical column order used by prediction
matrices. Single parent per node: multi-parent edges are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .errors import ValidationError

# Technique identifiers are plain strings matching hierarchy node names.
TechniqueId = str

BUNDLED_HIERARCHY = "hierarchy_semeval2024.json"


@dataclass(frozen=True)
class LabelHierarchy:
    """Immutable rooted tree of technique nodes.

    ``parent`` maps every non-root node to its unique parent. All queries
    are pure, so instances are safe to share across threads.
    """

    root: TechniqueId
    parent: dict[TechniqueId, TechniqueId]
    leaf_order: tuple[TechniqueId, ...]
    nodes: frozenset[TechniqueId] = field(default_factory=frozenset)

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    @property
    def leaves(self) -> frozenset[TechniqueId]:
        return frozenset(self.leaf_order)

    def require(self, name: str) -> None:
        if name not in self.nodes:
            raise ValidationError(f"unknown technique: {name!r}")


def parse_hierarchy(doc: bytes | str) -> LabelHierarchy:
    """Parse and validate a hierarchy document.

    Raises ValidationError on malformed JSON, duplicate/multi-parent
    nodes, cycles, nodes that cannot reach the root, or a ``leaf_order``
    that does not match the childless nodes exactly.
    """
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"hierarchy file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("hierarchy file must be a JSON object")
    extra = set(obj) - {"root", "edges", "leaf_order"}
    if extra:
        raise ValidationError(f"hierarchy file has unknown keys: {sorted(extra)}")
    for key in ("root", "edges", "leaf_order"):
        if key not in obj:
            raise ValidationError(f"hierarchy file is missing key {key!r}")

    root = obj["root"]
    if not isinstance(root, str) or not root:
        raise ValidationError("hierarchy root must be a non-empty string")
    if not isinstance(obj["edges"], list):
        raise ValidationError("hierarchy edges must be a list of [parent, child] pairs")

    parent: dict[str, str] = {}
    nodes: set[str] = {root}
    seen_edges: set[tuple[str, str]] = set()
    for edge in obj["edges"]:
        if (
            not isinstance(edge, list)
            or len(edge) != 2
            or not all(isinstance(x, str) and x for x in edge)
        ):
            raise ValidationError(f"malformed edge {edge!r}; expected [parent, child]")
        par, child = edge
        if (par, child) in seen_edges:
            raise ValidationError(f"duplicate edge {edge!r}")
        seen_edges.add((par, child))
        if child == root:
            raise ValidationError(f"root {root!r} may not appear as a child")
        if child in parent:
            raise ValidationError(
                f"node {child!r} has multiple parents ({parent[child]!r} and {par!r})"
            )
        parent[child] = par
        nodes.add(par)
        nodes.add(child)

    # Every non-root node must reach the root by following parent links.
    for node in nodes:
        seen: set[str] = set()
        cur = node
        while cur != root:
            if cur in seen:
                raise ValidationError(f"cycle detected at node {cur!r}")
            seen.add(cur)
            if cur not in parent:
                raise ValidationError(f"orphan node {cur!r} cannot reach root {root!r}")
            cur = parent[cur]

    children: set[str] = set(parent.values())
    leaves = {n for n in nodes if n not in children}

    leaf_order = obj["leaf_order"]
    if not isinstance(leaf_order, list) or not all(
        isinstance(x, str) for x in leaf_order
    ):
        raise ValidationError("leaf_order must be a list of strings")
    if len(set(leaf_order)) != len(leaf_order):
        raise ValidationError("leaf_order contains duplicates")
    if set(leaf_order) != leaves:
        missing = leaves - set(leaf_order)
        extra_leaves = set(leaf_order) - leaves
        raise ValidationError(
            "leaf_order must list exactly the childless nodes; "
            f"missing={sorted(missing)} extra={sorted(extra_leaves)}"
        )

    return LabelHierarchy(
        root=root,
        parent=dict(parent),
        leaf_order=tuple(leaf_order),
        nodes=frozenset(nodes),
    )


def load_hierarchy(path) -> LabelHierarchy:
    with open(path, "rb") as fh:
        return parse_hierarchy(fh.read())


def bundled_hierarchy() -> LabelHierarchy:
    """The shipped 20-leaf persuasion taxonomy (best-effort transcription)."""
    data = resources.files("persuakit.data").joinpath(BUNDLED_HIERARCHY).read_bytes()
    return parse_hierarchy(data)


def ancestors(h: LabelHierarchy, technique: TechniqueId) -> set[TechniqueId]:
    """Strict ancestors of ``technique``, excluding the root node.

    The universal root is excluded so two arbitrary non-empty label sets
    never share free credit under the hierarchical metric.
    """
    h.require(technique)
    out: set[str] = set()
    cur = technique
    while cur != h.root:
        cur = h.parent[cur]
        if cur != h.root:
            out.add(cur)
    return out


def ancestor_closure(
    h: LabelHierarchy, labels: Iterable[TechniqueId]
) -> set[TechniqueId]:
    """Labels plus all their non-root ancestors; never contains the root."""
    out: set[str] = set()
    for t in labels:
        h.require(t)
        if t != h.root:
            out.add(t)
        out |= ancestors(h, t)
    return out
