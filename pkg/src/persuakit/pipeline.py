"""End-to-end flows: ensemble prediction, zero-shot translation, manifests.

The submission label format consumed and produced here is a JSON array of
{"id": ..., "labels": [...]} records. Every CLI run writes a manifest with
content digests of its inputs and outputs so experiments stay auditable;
with mock providers, re-running a pipeline reproduces outputs and manifest
byte-for-byte except the timestamp.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset, Instance, parse_dataset
from .ensembling import mean_ensemble
from .errors import PersuakitError, ValidationError
from .taxonomy import LabelHierarchy, TechniqueId
from .thresholding import (
    KIND_PROBABILITIES,
    PredictionMatrix,
    ThresholdProfile,
    apply_thresholds,
    as_probabilities,
)

LabelMap = dict[str, frozenset[TechniqueId]]

# producer(dataset) -> ensemble member matrices for that dataset
MembersProducer = Callable[[Dataset], Sequence[PredictionMatrix]]


def parse_labels(doc: bytes | str, h: LabelHierarchy | None = None) -> LabelMap:
    """Parse a submission-format label file, validating against ``h``."""
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"label file is not valid JSON: {exc}") from exc
    if not isinstance(obj, list):
        raise ValidationError("label file must be a JSON array")
    out: LabelMap = {}
    for i, rec in enumerate(obj):
        if not isinstance(rec, dict) or set(rec) != {"id", "labels"}:
            raise ValidationError(f"label record #{i} must have exactly id and labels")
        iid = rec["id"]
        if not isinstance(iid, str) or not iid:
            raise ValidationError(f"label record #{i}: id must be a non-empty string")
        if iid in out:
            raise ValidationError(f"duplicate id {iid!r} in label file")
        labels = rec["labels"]
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise ValidationError(f"label record {iid!r}: labels must be strings")
        if h is not None:
            for lab in labels:
                h.require(lab)
        out[iid] = frozenset(labels)
    return out


def load_label_map(path, h: LabelHierarchy | None = None) -> LabelMap:
    """Load id -> label-set from a submission file or a dataset file.

    Dataset files are recognized by their "text" field, so gold labels can
    come straight from an annotated dataset.
    """
    with open(path, "rb") as fh:
        doc = fh.read()
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"label file is not valid JSON: {exc}") from exc
    if isinstance(obj, list) and obj and isinstance(obj[0], dict) and "text" in obj[0]:
        return parse_dataset(doc, h).labels_by_id()
    return parse_labels(doc, h)


def dumps_labels(labels: LabelMap) -> str:
    records = [
        {"id": iid, "labels": sorted(labels[iid])} for iid in labels
    ]
    return json.dumps(records, ensure_ascii=False, indent=1)


def save_labels(labels: LabelMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_labels(labels))
        fh.write("\n")


def predict_labels(
    members: Sequence[PredictionMatrix],
    profile: ThresholdProfile,
    h: LabelHierarchy | None = None,
) -> LabelMap:
    """Sigmoid (where needed) -> mean ensemble -> per-technique thresholds.

    With a single member this reduces to thresholding that member.
    """
    probs = [as_probabilities(m) for m in members]
    fused = mean_ensemble(probs)
    if h is not None:
        fused.check_leaf_order(h)
    return apply_thresholds(fused, profile)


@dataclass
class ZeroShotResult:
    labels: LabelMap
    failures: list[str] = field(default_factory=list)  # instance ids


def zero_shot_predict(
    ds: Dataset,
    translator,
    members_producer: MembersProducer,
    profile: ThresholdProfile,
    h: LabelHierarchy | None = None,
    target_lang: str = "en",
) -> ZeroShotResult:
    """Translate every instance to ``target_lang``, then ensemble-predict.

    Translation failures do not abort the run: the failing instance keeps an
    empty label set and its id is recorded so the manifest can report it.
    Output ids always equal input ids.
    """
    translated: list[Instance] = []
    failures: list[str] = []
    for inst in ds.instances:
        try:
            text = translator.translate(inst.text, inst.language, target_lang)
        except PersuakitError:
            failures.append(inst.id)
            continue
        translated.append(
            Instance(
                id=inst.id,
                text=text,
                labels=inst.labels,
                origin=inst.origin,
                language=target_lang,
            )
        )
    labels: LabelMap = {iid: frozenset() for iid in failures}
    if translated:
        translated_ds = Dataset(name=f"{ds.name}@{target_lang}", instances=tuple(translated))
        members = members_producer(translated_ds)
        labels.update(predict_labels(members, profile, h))
    # preserve input id order
    return ZeroShotResult(
        labels={inst.id: labels[inst.id] for inst in ds.instances},
        failures=failures,
    )


def mock_members_producer(
    technique_order: Sequence[TechniqueId], n_members: int = 3, seed: int = 0
) -> MembersProducer:
    """Deterministic stand-in for the three fine-tuned models.

    Scores are derived from a SHA-256 of (seed, member, text, technique), so
    results are stable across runs and platforms without any model weights.
    """

    def producer(ds: Dataset) -> list[PredictionMatrix]:
        members = []
        for k in range(n_members):
            rows = np.empty((len(ds.instances), len(technique_order)))
            for i, inst in enumerate(ds.instances):
                for j, t in enumerate(technique_order):
                    digest = hashlib.sha256(
                        f"{seed}|{k}|{inst.text}|{t}".encode("utf-8")
                    ).digest()
                    rows[i, j] = int.from_bytes(digest[:8], "big") / 2**64
            members.append(
                PredictionMatrix(
                    ids=tuple(i.id for i in ds.instances),
                    technique_order=tuple(technique_order),
                    values=rows,
                    kind=KIND_PROBABILITIES,
                )
            )
        return members

    return producer


def file_digest(path) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            sha.update(chunk)
    return sha.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    inputs: list[dict] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    translation_failures: list[str] | None = None

    def add_input(self, path) -> None:
        self.inputs.append({"path": str(path), "sha256": file_digest(path)})

    def add_output(self, path) -> None:
        self.outputs.append({"path": str(path), "sha256": file_digest(path)})

    def write(self, path) -> None:
        obj = {
            "command": self.command,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        if self.translation_failures is not None:
            obj["translation_failures"] = self.translation_failures
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, ensure_ascii=False, indent=1, sort_keys=True)
            fh.write("\n")
