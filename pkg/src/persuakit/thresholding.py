"""Prediction matrices, sigmoid conversion, and per-technique thresholds.

Matrix file format::

    {"kind": "logits" | "probabilities",
     "technique_order": ["Name calling/Labelling", ...],
     "rows": [{"id": "123", "values": [0.1, ...]}, ...]}

Thresholds are compared inclusively: a score equal to the threshold keeps
the label. Tuning scans a fixed grid per technique independently and
breaks F1 ties toward the smallest qualifying threshold, which favors
recall on rare classes and makes the search reproducible.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ValidationError
from .taxonomy import LabelHierarchy, TechniqueId

KIND_LOGITS = "logits"
KIND_PROBABILITIES = "probabilities"

DEFAULT_GRID_LO = 0.01
DEFAULT_GRID_HI = 0.70
DEFAULT_GRID_STEP = 0.01


@dataclass(frozen=True)
class PredictionMatrix:
    ids: tuple[str, ...]
    technique_order: tuple[TechniqueId, ...]
    values: np.ndarray  # shape (len(ids), len(technique_order)), float64
    kind: str

    def __post_init__(self):
        if self.kind not in (KIND_LOGITS, KIND_PROBABILITIES):
            raise ValidationError(f"unknown matrix kind {self.kind!r}")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("matrix ids contain duplicates")
        if len(set(self.technique_order)) != len(self.technique_order):
            raise ValidationError("technique_order contains duplicates")
        # copy so freezing the matrix never freezes a caller-owned array
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != (len(self.ids), len(self.technique_order)):
            raise ValidationError(
                f"matrix shape {vals.shape} does not match "
                f"{len(self.ids)} ids x {len(self.technique_order)} techniques"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("matrix contains non-finite values")
        if self.kind == KIND_PROBABILITIES and (vals.min(initial=0.0) < 0.0 or vals.max(initial=0.0) > 1.0):
            raise ValidationError("probability matrix has values outside [0, 1]")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    def row_index(self) -> dict[str, int]:
        return {iid: i for i, iid in enumerate(self.ids)}

    def check_leaf_order(self, h: LabelHierarchy) -> None:
        if self.technique_order != h.leaf_order:
            raise ValidationError(
                "matrix technique_order does not match the hierarchy leaf order"
            )


def parse_matrix(doc: bytes | str) -> PredictionMatrix:
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"matrix file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("matrix file must be a JSON object")
    extra = set(obj) - {"kind", "technique_order", "rows"}
    if extra:
        raise ValidationError(f"matrix file has unknown keys: {sorted(extra)}")
    try:
        order = tuple(obj["technique_order"])
        rows = obj["rows"]
        kind = obj["kind"]
    except KeyError as exc:
        raise ValidationError(f"matrix file is missing key {exc}") from exc
    if not isinstance(rows, list):
        raise ValidationError("matrix rows must be a list")
    ids = []
    values = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or set(row) != {"id", "values"}:
            raise ValidationError(f"matrix row #{i} must have exactly id and values")
        if not isinstance(row["id"], str) or not row["id"]:
            raise ValidationError(f"matrix row #{i}: id must be a non-empty string")
        vals = row["values"]
        if not isinstance(vals, list) or len(vals) != len(order):
            raise ValidationError(
                f"matrix row {row['id']!r}: expected {len(order)} values"
            )
        ids.append(row["id"])
        values.append([float(v) for v in vals])
    arr = (
        np.asarray(values, dtype=np.float64)
        if values
        else np.zeros((0, len(order)), dtype=np.float64)
    )
    return PredictionMatrix(ids=tuple(ids), technique_order=order, values=arr, kind=kind)


def load_matrix(path) -> PredictionMatrix:
    with open(path, "rb") as fh:
        return parse_matrix(fh.read())


def dumps_matrix(m: PredictionMatrix) -> str:
    obj = {
        "kind": m.kind,
        "technique_order": list(m.technique_order),
        "rows": [
            {"id": iid, "values": [float(v) for v in m.values[i]]}
            for i, iid in enumerate(m.ids)
        ],
    }
    return json.dumps(obj, ensure_ascii=False)


def save_matrix(m: PredictionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_matrix(m))
        fh.write("\n")


@dataclass(frozen=True)
class Grid:
    lo: float = DEFAULT_GRID_LO
    hi: float = DEFAULT_GRID_HI
    step: float = DEFAULT_GRID_STEP

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValidationError("grid requires 0 <= lo <= hi <= 1")
        if self.step <= 0:
            raise ValidationError("grid step must be positive")

    def values(self) -> list[float]:
        # round() keeps candidates like 0.01 + 30*0.01 at exactly 0.31
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return [round(self.lo + k * self.step, 10) for k in range(count)]


@dataclass(frozen=True)
class ThresholdProfile:
    thresholds: dict[TechniqueId, float]
    grid: Grid = field(default_factory=Grid)

    def __post_init__(self):
        for t, v in self.thresholds.items():
            if not (self.grid.lo <= v <= self.grid.hi):
                raise ValidationError(
                    f"threshold for {t!r} ({v}) outside grid "
                    f"[{self.grid.lo}, {self.grid.hi}]"
                )

    def dumps(self) -> str:
        obj = {
            "thresholds": dict(self.thresholds),
            "grid": {"lo": self.grid.lo, "hi": self.grid.hi, "step": self.grid.step},
        }
        return json.dumps(obj, ensure_ascii=False, indent=1)


def parse_profile(doc: bytes | str) -> ThresholdProfile:
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"profile file is not valid JSON: {exc}") from exc
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("thresholds"), dict)
        or not isinstance(obj.get("grid"), dict)
    ):
        raise ValidationError("profile file must have 'thresholds' and 'grid' objects")
    try:
        grid = Grid(
            lo=float(obj["grid"]["lo"]),
            hi=float(obj["grid"]["hi"]),
            step=float(obj["grid"]["step"]),
        )
        thresholds = {t: float(v) for t, v in obj["thresholds"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed profile file: {exc}") from exc
    return ThresholdProfile(thresholds=thresholds, grid=grid)


def load_profile(path) -> ThresholdProfile:
    with open(path, "rb") as fh:
        return parse_profile(fh.read())


def save_profile(p: ThresholdProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(p.dumps())
        fh.write("\n")


def sigmoid_matrix(m: PredictionMatrix) -> PredictionMatrix:
    """Elementwise logistic transform of a logit matrix."""
    if m.kind != KIND_LOGITS:
        raise ValidationError("sigmoid_matrix expects a logits matrix")
    return PredictionMatrix(
        ids=m.ids,
        technique_order=m.technique_order,
        values=expit(m.values),
        kind=KIND_PROBABILITIES,
    )


def as_probabilities(m: PredictionMatrix) -> PredictionMatrix:
    """Pass probabilities through; convert logits via sigmoid."""
    return sigmoid_matrix(m) if m.kind == KIND_LOGITS else m


def apply_thresholds(
    m: PredictionMatrix, profile: ThresholdProfile
) -> dict[str, frozenset[TechniqueId]]:
    """Assign label t to instance i iff value(i, t) >= threshold(t)."""
    if m.kind != KIND_PROBABILITIES:
        raise ValidationError("apply_thresholds expects a probabilities matrix")
    if set(profile.thresholds) != set(m.technique_order):
        raise ValidationError(
            "threshold profile does not cover the matrix technique_order exactly"
        )
    cutoffs = np.array([profile.thresholds[t] for t in m.technique_order])
    keep = m.values >= cutoffs  # inclusive comparison
    out: dict[str, frozenset[str]] = {}
    for i, iid in enumerate(m.ids):
        out[iid] = frozenset(
            t for j, t in enumerate(m.technique_order) if keep[i, j]
        )
    return out


def _best_threshold(
    scores: np.ndarray, positives: np.ndarray, candidates: np.ndarray
) -> float:
    """Smallest candidate maximizing flat F1 for one technique column."""
    pred = scores[:, None] >= candidates[None, :]
    tp = (pred & positives[:, None]).sum(axis=0)
    fp = (pred & ~positives[:, None]).sum(axis=0)
    fn = positives.sum() - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)
    best = f1.max()
    return float(candidates[int(np.flatnonzero(f1 == best)[0])])


def tune_thresholds(
    m: PredictionMatrix,
    gold: dict[str, frozenset[TechniqueId]],
    grid: Grid | None = None,
    h: LabelHierarchy | None = None,
) -> ThresholdProfile:
    """Grid-search the flat-F1-optimal threshold per technique independently.

    Ties break to the smallest maximizing grid value. Technique columns are
    tuned in isolation, so adding or removing other columns never changes a
    technique's result.
    """
    if m.kind != KIND_PROBABILITIES:
        raise ValidationError("tune_thresholds expects a probabilities matrix")
    if set(m.ids) != set(gold):
        raise ValidationError("matrix ids do not match the gold label map")
    if h is not None:
        m.check_leaf_order(h)
    grid = grid or Grid()
    candidates = np.asarray(grid.values())
    if candidates.size == 0:
        raise ValidationError("empty threshold grid")

    gold_rows = [gold[iid] for iid in m.ids]
    thresholds: dict[str, float] = {}
    for j, t in enumerate(m.technique_order):
        positives = np.array([t in labels for labels in gold_rows], dtype=bool)
        thresholds[t] = _best_threshold(m.values[:, j], positives, candidates)
    return ThresholdProfile(thresholds=thresholds, grid=grid)
