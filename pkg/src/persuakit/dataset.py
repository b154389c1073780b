"""Instance datasets: loading, statistics, and the legacy-corpus merge.

Dataset file format: a JSON array of records::

    {"id": "1234", "text": "...", "labels": ["Smears", ...],
     "origin": "original", "language": "en"}

``origin`` and ``language`` are optional on input (defaulting to
"original"/"en") but always written on output so a save/load round trip
is exact. Empty label lists are first class: a large share of real
training data carries no technique at all.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from importlib import resources

from .errors import ValidationError
from .taxonomy import LabelHierarchy, TechniqueId

ORIGINS = ("original", "legacy", "paraphrase")
BUNDLED_SPLIT_MAP = "splitmap_2020to2024.json"

_RECORD_KEYS = {"id", "text", "labels", "origin", "language"}


@dataclass(frozen=True)
class Instance:
    id: str
    text: str
    labels: frozenset[TechniqueId]
    origin: str = "original"
    language: str = "en"


@dataclass(frozen=True)
class Dataset:
    name: str
    instances: tuple[Instance, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for inst in self.instances:
            if inst.id in seen:
                raise ValidationError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def by_id(self) -> dict[str, Instance]:
        return {inst.id: inst for inst in self.instances}

    def labels_by_id(self) -> dict[str, frozenset[TechniqueId]]:
        return {inst.id: inst.labels for inst in self.instances}


def _parse_record(rec, index: int, h: LabelHierarchy | None) -> Instance:
    if not isinstance(rec, dict):
        raise ValidationError(f"record #{index} is not an object")
    extra = set(rec) - _RECORD_KEYS
    if extra:
        raise ValidationError(f"record #{index} has unknown keys: {sorted(extra)}")
    for key in ("id", "text", "labels"):
        if key not in rec:
            raise ValidationError(f"record #{index} is missing key {key!r}")
    iid, text = rec["id"], rec["text"]
    if not isinstance(iid, str) or not iid:
        raise ValidationError(f"record #{index}: id must be a non-empty string")
    if not isinstance(text, str) or not text:
        raise ValidationError(f"instance {iid!r}: text must be a non-empty string")
    raw_labels = rec["labels"]
    if not isinstance(raw_labels, list) or not all(
        isinstance(x, str) for x in raw_labels
    ):
        raise ValidationError(f"instance {iid!r}: labels must be a list of strings")
    if h is not None:
        leaves = h.leaves
        for lab in raw_labels:
            if lab not in leaves:
                raise ValidationError(f"instance {iid!r}: unknown label {lab!r}")
    origin = rec.get("origin", "original")
    if origin not in ORIGINS:
        raise ValidationError(
            f"instance {iid!r}: origin must be one of {ORIGINS}, got {origin!r}"
        )
    language = rec.get("language", "en")
    if not isinstance(language, str) or not language:
        raise ValidationError(f"instance {iid!r}: language must be a non-empty string")
    return Instance(
        id=iid,
        text=text,
        labels=frozenset(raw_labels),
        origin=origin,
        language=language,
    )


def parse_dataset(
    doc: bytes | str, h: LabelHierarchy | None = None, name: str = "dataset"
) -> Dataset:
    """Parse a dataset document, validating labels against ``h``'s leaves.

    Pass ``h=None`` to skip label validation (used by the CLI validator
    to collect every problem instead of stopping at the first).
    """
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"dataset file is not valid JSON: {exc}") from exc
    if not isinstance(obj, list):
        raise ValidationError("dataset file must be a JSON array of records")
    return Dataset(
        name=name, instances=tuple(_parse_record(r, i, h) for i, r in enumerate(obj))
    )


def load_dataset(path, h: LabelHierarchy | None = None, name: str | None = None) -> Dataset:
    with open(path, "rb") as fh:
        doc = fh.read()
    return parse_dataset(doc, h, name=name if name is not None else str(path))


def dumps_dataset(ds: Dataset) -> str:
    records = [
        {
            "id": inst.id,
            "text": inst.text,
            "labels": sorted(inst.labels),
            "origin": inst.origin,
            "language": inst.language,
        }
        for inst in ds.instances
    ]
    return json.dumps(records, ensure_ascii=False, indent=1)


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_dataset(ds))
        fh.write("\n")


def dataset_problems(ds: Dataset, h: LabelHierarchy) -> list[str]:
    """Describe every label-validity violation, naming instance and label."""
    leaves = h.leaves
    problems = []
    for inst in ds.instances:
        for lab in sorted(inst.labels):
            if lab not in leaves:
                problems.append(f"instance {inst.id!r}: unknown label {lab!r}")
    return problems


def label_counts(ds: Dataset, h: LabelHierarchy) -> dict[TechniqueId, int]:
    """Instances per technique, with zero-count techniques present.

    Keys follow the hierarchy's canonical leaf order.
    """
    counts = {t: 0 for t in h.leaf_order}
    for inst in ds.instances:
        for lab in inst.labels:
            if lab in counts:
                counts[lab] += 1
    return counts


def cardinality_stats(ds: Dataset) -> dict[str, float]:
    """Fractions of instances with zero, one, and multiple labels."""
    if len(ds) == 0:
        raise ValidationError("cardinality_stats requires a non-empty dataset")
    zero = sum(1 for i in ds if len(i.labels) == 0)
    one = sum(1 for i in ds if len(i.labels) == 1)
    multi = len(ds) - zero - one
    n = len(ds)
    return {"zero": zero / n, "one": one / n, "multi": multi / n}


@dataclass(frozen=True)
class SplitRule:
    pattern: str
    target: TechniqueId

    def matches(self, text: str) -> bool:
        return re.search(self.pattern, text, flags=re.IGNORECASE) is not None


@dataclass(frozen=True)
class SplitEntry:
    kind: str  # "rename" | "split"
    targets: tuple[TechniqueId, ...]
    rules: tuple[SplitRule, ...] = ()
    default: TechniqueId | None = None

    def resolve(self, text: str) -> TechniqueId:
        """Pick the per-instance target: first matching rule, else default."""
        if self.kind == "rename":
            return self.targets[0]
        for rule in self.rules:
            if rule.matches(text):
                return rule.target
        if self.default is None:
            raise ValidationError(
                f"split entry with targets {list(self.targets)} resolved no target "
                f"for text {text[:60]!r}"
            )
        return self.default


@dataclass(frozen=True)
class SplitMap:
    entries: dict[str, SplitEntry]


def parse_split_map(doc: bytes | str, h: LabelHierarchy) -> SplitMap:
    """Parse a legacy-technique conversion map, checking targets exist."""
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"split map is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("split map must be a JSON object")
    leaves = h.leaves
    entries: dict[str, SplitEntry] = {}
    for legacy, spec in obj.items():
        if not isinstance(spec, dict):
            raise ValidationError(f"split map entry {legacy!r} is not an object")
        kind = spec.get("kind")
        if kind not in ("rename", "split"):
            raise ValidationError(
                f"split map entry {legacy!r}: kind must be 'rename' or 'split'"
            )
        targets = spec.get("targets")
        if not isinstance(targets, list) or not targets:
            raise ValidationError(f"split map entry {legacy!r}: targets required")
        for t in targets:
            if t not in leaves:
                raise ValidationError(
                    f"split map entry {legacy!r}: target {t!r} is not a leaf technique"
                )
        if kind == "rename" and len(targets) != 1:
            raise ValidationError(
                f"split map entry {legacy!r}: rename must have exactly one target"
            )
        rules = []
        for rule in spec.get("rules", []):
            if (
                not isinstance(rule, dict)
                or not isinstance(rule.get("pattern"), str)
                or rule.get("target") not in targets
            ):
                raise ValidationError(f"split map entry {legacy!r}: malformed rule")
            try:
                re.compile(rule["pattern"])
            except re.error as exc:
                raise ValidationError(
                    f"split map entry {legacy!r}: bad pattern {rule['pattern']!r}: {exc}"
                ) from exc
            rules.append(SplitRule(pattern=rule["pattern"], target=rule["target"]))
        default = spec.get("default")
        if default is not None and default not in targets:
            raise ValidationError(
                f"split map entry {legacy!r}: default {default!r} not among targets"
            )
        if kind == "split" and default is None and not rules:
            raise ValidationError(
                f"split map entry {legacy!r}: split needs rules and/or a default"
            )
        entries[legacy] = SplitEntry(
            kind=kind, targets=tuple(targets), rules=tuple(rules), default=default
        )
    return SplitMap(entries=entries)


def load_split_map(path, h: LabelHierarchy) -> SplitMap:
    with open(path, "rb") as fh:
        return parse_split_map(fh.read(), h)


def bundled_split_map(h: LabelHierarchy) -> SplitMap:
    """Best-effort 14-to-20 technique conversion map (configurable fixture)."""
    data = resources.files("persuakit.data").joinpath(BUNDLED_SPLIT_MAP).read_bytes()
    return parse_split_map(data, h)


def merge_with_split(
    current: Dataset, legacy: Dataset, split_map: SplitMap, h: LabelHierarchy
) -> Dataset:
    """Concatenate ``current`` and ``legacy``, relabeling legacy instances.

    Legacy labels are converted through the split map (renames unconditionally,
    splits per instance via keyword rules); labels already in the current leaf
    inventory pass through unchanged. Converted instances get origin="legacy".
    """
    leaves = h.leaves
    converted: list[Instance] = []
    for inst in legacy.instances:
        new_labels: set[str] = set()
        for lab in inst.labels:
            entry = split_map.entries.get(lab)
            if entry is not None:
                new_labels.add(entry.resolve(inst.text))
            elif lab in leaves:
                new_labels.add(lab)
            else:
                raise ValidationError(
                    f"legacy instance {inst.id!r}: label {lab!r} not covered by the "
                    "split map and not a current technique"
                )
        converted.append(
            replace(inst, labels=frozenset(new_labels), origin="legacy")
        )
    return Dataset(
        name=f"{current.name}+{legacy.name}",
        instances=current.instances + tuple(converted),
    )
