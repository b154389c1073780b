"""Readers/writers for the toolkit's wire formats.

The trainer talks to the main toolkit only through its JSON file formats
(dataset, hierarchy, prediction matrix), so these are self-contained
parsers rather than imports from the toolkit package.
"""
from __future__ import annotations

import json
from dataclasses import dataclass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class Record:
    id: str
    text: str
    labels: frozenset[str]


def load_leaf_order(path) -> tuple[str, ...]:
    """Leaf techniques of a hierarchy file, in canonical order."""
    with open(path, "rb") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"hierarchy file is not valid JSON: {exc}") from exc
    leaf_order = obj.get("leaf_order") if isinstance(obj, dict) else None
    if not isinstance(leaf_order, list) or not all(isinstance(x, str) for x in leaf_order):
        raise FormatError("hierarchy file lacks a leaf_order list")
    return tuple(leaf_order)


def load_records(path, leaf_order: tuple[str, ...]) -> list[Record]:
    with open(path, "rb") as fh:
        try:
            rows = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"dataset file is not valid JSON: {exc}") from exc
    if not isinstance(rows, list):
        raise FormatError("dataset file must be a JSON array")
    leaves = set(leaf_order)
    records = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or "id" not in row or "text" not in row:
            raise FormatError(f"dataset record #{i} malformed")
        labels = frozenset(row.get("labels", []))
        unknown = labels - leaves
        if unknown:
            raise FormatError(
                f"instance {row['id']!r} has labels outside the hierarchy: {sorted(unknown)}"
            )
        records.append(Record(id=row["id"], text=row["text"], labels=labels))
    return records


def save_logit_matrix(path, ids, leaf_order, logits) -> None:
    """Write a prediction-matrix file with kind=logits."""
    obj = {
        "kind": "logits",
        "technique_order": list(leaf_order),
        "rows": [
            {"id": iid, "values": [float(v) for v in row]}
            for iid, row in zip(ids, logits)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False)
        fh.write("\n")
