"""Hierarchical and per-class evaluation of multi-label predictions.

The headline metric is micro-averaged hierarchical precision/recall/F1:
each instance's gold and predicted label sets are expanded with their
non-root ancestors, and intersection/set sizes are summed over instances
before dividing. Per-class scores stay at leaf level (no closure) because
threshold tuning and benefit selection operate on the predictable
techniques only.

Denominator conventions (deterministic, pinned by tests):
  * both closure sums zero -> hP = hR = hF1 = 1 (vacuously perfect);
  * exactly one sum zero   -> that metric is 0;
  * per-class 0/0          -> 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .errors import ValidationError
from .taxonomy import LabelHierarchy, TechniqueId, ancestor_closure

LabelMap = Mapping[str, frozenset[TechniqueId]]


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ScoreReport:
    h_precision: float
    h_recall: float
    h_f1: float
    per_class: dict[TechniqueId, ClassScore]

    def to_dict(self) -> dict:
        return {
            "h_precision": self.h_precision,
            "h_recall": self.h_recall,
            "h_f1": self.h_f1,
            "per_class": {
                t: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for t, s in self.per_class.items()
            },
        }

    def dumps(self) -> str:
        # json emits full repr precision for floats (>= 9 significant digits)
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1)

    @classmethod
    def from_dict(cls, obj: dict) -> "ScoreReport":
        try:
            per_class = {
                t: ClassScore(
                    precision=float(s["precision"]),
                    recall=float(s["recall"]),
                    f1=float(s["f1"]),
                    support=int(s["support"]),
                )
                for t, s in obj["per_class"].items()
            }
            return cls(
                h_precision=float(obj["h_precision"]),
                h_recall=float(obj["h_recall"]),
                h_f1=float(obj["h_f1"]),
                per_class=per_class,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed score report: {exc}") from exc


@dataclass(frozen=True)
class BenefitSet:
    """Techniques whose F1 improved by strictly more than ``epsilon``."""

    techniques: frozenset[TechniqueId]
    epsilon: float = 0.03


def _check_same_ids(gold: LabelMap, pred: LabelMap) -> None:
    if set(gold) != set(pred):
        only_gold = sorted(set(gold) - set(pred))[:5]
        only_pred = sorted(set(pred) - set(gold))[:5]
        raise ValidationError(
            f"gold and prediction id sets differ (gold-only {only_gold}, "
            f"pred-only {only_pred})"
        )


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def hierarchical_prf(gold: LabelMap, pred: LabelMap, h: LabelHierarchy) -> ScoreReport:
    """Micro-averaged hierarchical P/R/F1 plus flat per-class scores."""
    _check_same_ids(gold, pred)
    inter_total = 0
    pred_total = 0
    gold_total = 0
    for iid in gold:
        cg = ancestor_closure(h, gold[iid])
        cp = ancestor_closure(h, pred[iid])
        inter_total += len(cg & cp)
        pred_total += len(cp)
        gold_total += len(cg)

    if pred_total == 0 and gold_total == 0:
        hp = hr = hf = 1.0
    else:
        hp = inter_total / pred_total if pred_total > 0 else 0.0
        hr = inter_total / gold_total if gold_total > 0 else 0.0
        hf = _f1(hp, hr)
    return ScoreReport(
        h_precision=hp,
        h_recall=hr,
        h_f1=hf,
        per_class=per_class_f1(gold, pred, h),
    )


def per_class_f1(
    gold: LabelMap, pred: LabelMap, h: LabelHierarchy
) -> dict[TechniqueId, ClassScore]:
    """Binary P/R/F1 per leaf technique over instance membership (0/0 -> 0)."""
    _check_same_ids(gold, pred)
    out: dict[str, ClassScore] = {}
    for t in h.leaf_order:
        tp = fp = fn = 0
        for iid in gold:
            g = t in gold[iid]
            p = t in pred[iid]
            tp += g and p
            fp += p and not g
            fn += g and not p
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        out[t] = ClassScore(
            precision=prec, recall=rec, f1=_f1(prec, rec), support=tp + fn
        )
    return out


def f1_delta(after: ScoreReport, before: ScoreReport) -> dict[TechniqueId, float]:
    """Signed per-technique F1 change, after minus before."""
    if set(after.per_class) != set(before.per_class):
        raise ValidationError("reports cover different technique sets")
    return {t: after.per_class[t].f1 - before.per_class[t].f1 for t in after.per_class}


def benefit_set(deltas: Mapping[TechniqueId, float], epsilon: float = 0.03) -> BenefitSet:
    """Techniques with delta strictly greater than ``epsilon``."""
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    return BenefitSet(
        techniques=frozenset(t for t, d in deltas.items() if d > epsilon),
        epsilon=epsilon,
    )
