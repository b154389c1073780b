"""Paraphrase-augmentation planning and execution.

Three strategies produce plans:

* para_n:     n paraphrases of every instance, labels copied verbatim.
* para_benef: for each instance whose labels T intersect the benefit set B,
              one request of m paraphrases per benefiting technique, each
              labeled with T ∩ B (instances with empty intersection
              contribute nothing).
* para_bal:   greedy balancing toward a per-technique target count, in
              batches of a fixed size, rarest technique first, round-robin
              over that technique's instances by id. Paraphrases carry the
              source's full label set, so planned co-occurrence side effects
              are accounted live before later techniques are processed.

Planning is pure and deterministic (byte-identical plan files for the same
inputs); execution is the only part that touches a provider.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .dataset import Dataset, Instance, label_counts
from .errors import PersuakitError, PlanExecutionError, ValidationError
from .scoring import BenefitSet
from .services import ParaphraseProvider
from .taxonomy import LabelHierarchy, TechniqueId

log = logging.getLogger(__name__)

STRATEGIES = ("para_n", "para_benef", "para_bal")


@dataclass(frozen=True)
class ParaphraseRequest:
    source_id: str
    count: int
    assigned_labels: frozenset[TechniqueId]

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError("paraphrase request count must be >= 1")


@dataclass(frozen=True)
class AugmentationPlan:
    strategy: str
    base: str
    requests: tuple[ParaphraseRequest, ...]
    projected_counts: dict[TechniqueId, int]

    @property
    def total_paraphrases(self) -> int:
        return sum(r.count for r in self.requests)

    def dumps(self) -> str:
        obj = {
            "strategy": self.strategy,
            "base": self.base,
            "requests": [
                {
                    "source_id": r.source_id,
                    "count": r.count,
                    "labels": sorted(r.assigned_labels),
                }
                for r in self.requests
            ],
            "projected_counts": self.projected_counts,
        }
        return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1)


def parse_plan(doc: bytes | str) -> AugmentationPlan:
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"plan file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("plan file must be a JSON object")
    extra = set(obj) - {"strategy", "base", "requests", "projected_counts"}
    if extra:
        raise ValidationError(f"plan file has unknown keys: {sorted(extra)}")
    strategy = obj.get("strategy")
    if strategy not in STRATEGIES:
        raise ValidationError(f"plan strategy must be one of {STRATEGIES}")
    if not isinstance(obj.get("base"), str):
        raise ValidationError("plan base must be a string")
    counts = obj.get("projected_counts")
    if not isinstance(counts, dict) or not all(
        isinstance(v, int) and v >= 0 for v in counts.values()
    ):
        raise ValidationError("plan projected_counts must map techniques to counts")
    requests = []
    for i, r in enumerate(obj.get("requests", [])):
        if not isinstance(r, dict) or set(r) != {"source_id", "count", "labels"}:
            raise ValidationError(f"plan request #{i} malformed")
        if not isinstance(r["count"], int) or not isinstance(r["source_id"], str):
            raise ValidationError(f"plan request #{i} malformed")
        requests.append(
            ParaphraseRequest(
                source_id=r["source_id"],
                count=r["count"],
                assigned_labels=frozenset(r["labels"]),
            )
        )
    return AugmentationPlan(
        strategy=strategy,
        base=obj["base"],
        requests=tuple(requests),
        projected_counts=dict(counts),
    )


def load_plan(path) -> AugmentationPlan:
    with open(path, "rb") as fh:
        return parse_plan(fh.read())


def save_plan(plan: AugmentationPlan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(plan.dumps())
        fh.write("\n")


def _project(
    base_counts: dict[str, int], requests: list[ParaphraseRequest]
) -> dict[str, int]:
    counts = dict(base_counts)
    for r in requests:
        for t in r.assigned_labels:
            counts[t] = counts.get(t, 0) + r.count
    return counts


def plan_para_n(ds: Dataset, n: int, h: LabelHierarchy) -> AugmentationPlan:
    """One request of n paraphrases per instance, labels copied verbatim.

    Projected dataset size is exactly |ds| * (n + 1).
    """
    if n < 1:
        raise ValidationError("para_n requires n >= 1")
    requests = [
        ParaphraseRequest(source_id=inst.id, count=n, assigned_labels=inst.labels)
        for inst in ds.instances
    ]
    return AugmentationPlan(
        strategy="para_n",
        base=ds.name,
        requests=tuple(requests),
        projected_counts=_project(label_counts(ds, h), requests),
    )


def plan_para_benef(
    ds: Dataset, benefit: BenefitSet, m: int, h: LabelHierarchy
) -> AugmentationPlan:
    """Targeted paraphrases for benefiting techniques only.

    For an instance labeled T, each technique in T ∩ B yields one request of
    m paraphrases labeled T ∩ B; |T ∩ B| requests per instance in total.
    """
    if m < 1:
        raise ValidationError("para_benef requires m >= 1")
    b = benefit.techniques
    requests = []
    for inst in ds.instances:
        inter = inst.labels & b
        if not inter:
            continue
        assigned = frozenset(inter)
        # one request per benefiting technique; the requests are identical
        for _ in range(len(inter)):
            requests.append(
                ParaphraseRequest(source_id=inst.id, count=m, assigned_labels=assigned)
            )
    return AugmentationPlan(
        strategy="para_benef",
        base=ds.name,
        requests=tuple(requests),
        projected_counts=_project(label_counts(ds, h), requests),
    )


def plan_para_bal(
    ds: Dataset, target: int, batch: int, h: LabelHierarchy
) -> AugmentationPlan:
    """Greedy balancing toward ``target`` instances per technique.

    Techniques are processed rarest-first (ties by name, counted on the base
    dataset); each emitted request is exactly ``batch`` paraphrases of one
    source instance, cycling round-robin over the technique's instances in id
    order, until the live projected count reaches the target. Because
    paraphrases keep the full source label set, every request also raises the
    live counts of co-occurring techniques, which later techniques see.

    A technique below target with no source instances is unsatisfiable; it is
    reported via logging and skipped.
    """
    if target < 1:
        raise ValidationError("para_bal requires target >= 1")
    if batch < 1:
        raise ValidationError("para_bal requires batch >= 1")
    base_counts = label_counts(ds, h)
    live = dict(base_counts)
    order = sorted(h.leaf_order, key=lambda t: (base_counts[t], t))
    sources = {
        t: sorted((i for i in ds.instances if t in i.labels), key=lambda i: i.id)
        for t in h.leaf_order
    }
    requests: list[ParaphraseRequest] = []
    for t in order:
        if live[t] >= target:
            continue
        if not sources[t]:
            log.warning(
                "technique %r has %d instances and no sources; target %d unsatisfiable",
                t,
                live[t],
                target,
            )
            continue
        cursor = 0
        while live[t] < target:
            inst = sources[t][cursor % len(sources[t])]
            cursor += 1
            requests.append(
                ParaphraseRequest(
                    source_id=inst.id, count=batch, assigned_labels=inst.labels
                )
            )
            for lab in inst.labels:
                live[lab] += batch
    return AugmentationPlan(
        strategy="para_bal",
        base=ds.name,
        requests=tuple(requests),
        projected_counts=live,
    )


def execute_plan(
    plan: AugmentationPlan,
    ds: Dataset,
    provider: ParaphraseProvider,
    workers: int = 1,
) -> Dataset:
    """Run every request against the provider and append the paraphrases.

    Generated ids are "{source_id}-p{k}" with k counting per source across
    the whole plan, so a source receiving several requests still yields
    unique ids. Existing instances are never modified. On provider failure
    the exception carries the dataset built from the completed prefix of the
    plan, so callers can persist a clearly-marked partial output.
    """
    by_id = ds.by_id()
    for r in plan.requests:
        if r.source_id not in by_id:
            raise ValidationError(f"plan request references unknown id {r.source_id!r}")

    def call(r: ParaphraseRequest) -> list[str]:
        return provider.paraphrase(by_id[r.source_id].text, r.count)

    texts_per_request: list[list[str] | None] = [None] * len(plan.requests)
    failure: Exception | None = None
    if workers <= 1 or len(plan.requests) <= 1:
        for i, r in enumerate(plan.requests):
            try:
                texts_per_request[i] = call(r)
            except PersuakitError as exc:
                failure = exc
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(call, r) for r in plan.requests]
            for i, fut in enumerate(futures):
                try:
                    texts_per_request[i] = fut.result()
                except PersuakitError as exc:
                    failure = failure or exc

    # assemble in plan order, stopping at the first missing result
    per_source: dict[str, int] = {}
    generated: list[Instance] = []
    for i, r in enumerate(plan.requests):
        texts = texts_per_request[i]
        if texts is None:
            break
        src = by_id[r.source_id]
        for text in texts:
            per_source[r.source_id] = per_source.get(r.source_id, 0) + 1
            generated.append(
                Instance(
                    id=f"{r.source_id}-p{per_source[r.source_id]}",
                    text=text,
                    labels=r.assigned_labels,
                    origin="paraphrase",
                    language=src.language,
                )
            )
    if failure is not None:
        partial = Dataset(
            name=f"{ds.name}+{plan.strategy}-PARTIAL",
            instances=ds.instances + tuple(generated),
        )
        raise PlanExecutionError(
            f"provider failed during plan execution: {failure}", partial=partial
        ) from failure
    return Dataset(
        name=f"{ds.name}+{plan.strategy}",
        instances=ds.instances + tuple(generated),
    )
