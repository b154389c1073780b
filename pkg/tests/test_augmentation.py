import logging

import pytest

from persuakit import (
    BenefitSet,
    Dataset,
    Instance,
    MockParaphraseProvider,
    ValidationError,
    execute_plan,
    label_counts,
    plan_para_bal,
    plan_para_benef,
    plan_para_n,
)
from persuakit.augmentation import parse_plan
from persuakit.errors import PlanExecutionError, ProviderError


def inst(iid, labels, text=None):
    return Instance(id=iid, text=text or f"text of {iid}", labels=frozenset(labels))


def ds_of(*instances, name="base"):
    return Dataset(name=name, instances=tuple(instances))


@pytest.fixture
def h3(flat3):
    return flat3


class TestParaN:
    def test_three_instances_n3(self, h3):
        ds = ds_of(inst("a", ["X"]), inst("b", ["Y"]), inst("c", []))
        plan = plan_para_n(ds, 3, h3)
        assert len(plan.requests) == 3
        assert plan.total_paraphrases == 9
        assert len(ds) + plan.total_paraphrases == len(ds) * 4
        assert plan.strategy == "para_n"

    def test_labels_copied_even_empty(self, h3):
        ds = ds_of(inst("a", []))
        plan = plan_para_n(ds, 3, h3)
        assert plan.requests[0].assigned_labels == frozenset()

    def test_projected_counts(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]), inst("b", ["X"]))
        plan = plan_para_n(ds, 2, h3)
        assert plan.projected_counts == {"X": 6, "Y": 3, "Z": 0}

    def test_n_must_be_positive(self, h3):
        with pytest.raises(ValidationError):
            plan_para_n(ds_of(inst("a", [])), 0, h3)


class TestParaBenef:
    def test_empty_intersection_contributes_nothing(self, h3):
        ds = ds_of(inst("a", ["X"]))
        plan = plan_para_benef(ds, BenefitSet(techniques=frozenset({"Y"})), 10, h3)
        assert plan.requests == ()

    def test_single_overlap(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]))
        plan = plan_para_benef(ds, BenefitSet(techniques=frozenset({"Y", "Z"})), 10, h3)
        assert len(plan.requests) == 1
        r = plan.requests[0]
        assert (r.count, r.assigned_labels) == (10, {"Y"})

    def test_double_overlap_two_requests(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]))
        plan = plan_para_benef(ds, BenefitSet(techniques=frozenset({"X", "Y"})), 10, h3)
        assert len(plan.requests) == 2
        assert plan.total_paraphrases == 20
        for r in plan.requests:
            assert r.assigned_labels == {"X", "Y"}

    def test_generated_labels_subset_of_b_and_t(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]), inst("b", ["Y", "Z"]), inst("c", []))
        b = frozenset({"Y", "Z"})
        plan = plan_para_benef(ds, BenefitSet(techniques=b), 5, h3)
        sources = ds.by_id()
        for r in plan.requests:
            assert r.assigned_labels <= b
            assert r.assigned_labels <= sources[r.source_id].labels


class TestParaBal:
    def test_hand_trace(self, h3):
        # Y has 2 instances; target 10 batch 5 -> two batches, i1 then i2
        ds = ds_of(
            inst("i1", ["Y"]), inst("i2", ["Y"]),
            *(inst(f"x{k}", ["X"]) for k in range(12)),
            *(inst(f"z{k}", ["Z"]) for k in range(12)),
        )
        plan = plan_para_bal(ds, target=10, batch=5, h=h3)
        y_requests = [r for r in plan.requests if r.assigned_labels == {"Y"}]
        assert [r.source_id for r in y_requests] == ["i1", "i2"]
        assert all(r.count == 5 for r in plan.requests)
        assert plan.projected_counts["Y"] == 12

    def test_everything_already_at_target(self, h3):
        ds = ds_of(*(inst(f"i{k}", ["X", "Y", "Z"]) for k in range(4)))
        plan = plan_para_bal(ds, target=3, batch=5, h=h3)
        assert plan.requests == ()
        assert plan.projected_counts == label_counts(ds, h3)

    def test_co_occurrence_feeds_later_techniques(self, h3):
        # boosting X via an X+Y instance also lifts Y past the target
        ds = ds_of(inst("a", ["X", "Y"]), inst("b", ["Y"]), *(inst(f"z{k}", ["Z"]) for k in range(9)))
        plan = plan_para_bal(ds, target=6, batch=5, h=h3)
        # X processed first (count 1 < 2 Y's count); one batch of a lifts both
        assert plan.projected_counts["X"] >= 6
        assert plan.projected_counts["Y"] >= 6
        y_only = [r for r in plan.requests if r.assigned_labels == {"Y"}]
        assert y_only == []

    def test_unsatisfiable_reported_not_fatal(self, h3, caplog):
        ds = ds_of(inst("a", ["X"]), *(inst(f"y{k}", ["Y"]) for k in range(3)))
        with caplog.at_level(logging.WARNING):
            plan = plan_para_bal(ds, target=3, batch=5, h=h3)
        assert any("unsatisfiable" in r.message for r in caplog.records)
        assert plan.projected_counts["Z"] == 0

    def test_deterministic_bytes(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]), inst("b", ["Y"]), inst("c", ["Z"]))
        one = plan_para_bal(ds, target=4, batch=2, h=h3).dumps()
        two = plan_para_bal(ds, target=4, batch=2, h=h3).dumps()
        assert one == two


class TestPlanSerialization:
    def test_round_trip(self, h3):
        ds = ds_of(inst("a", ["X"]), inst("b", []))
        plan = plan_para_n(ds, 2, h3)
        again = parse_plan(plan.dumps())
        assert again == plan

    def test_bad_strategy_rejected(self):
        with pytest.raises(ValidationError, match="strategy"):
            parse_plan('{"strategy": "magic", "base": "b", "requests": [], "projected_counts": {}}')


class FailingProvider:
    """Succeeds for ``good`` calls, then raises."""

    def __init__(self, good):
        self.good = good
        self.mock = MockParaphraseProvider()

    def paraphrase(self, text, n):
        if self.good <= 0:
            raise ProviderError("provider down")
        self.good -= 1
        return self.mock.paraphrase(text, n)


class TestExecute:
    def test_empty_plan_identity(self, h3):
        ds = ds_of(inst("a", ["X"]))
        plan = plan_para_bal(ds, target=1, batch=1, h=h3)
        assert plan.requests == ()
        out = execute_plan(plan, ds, MockParaphraseProvider())
        assert out.instances == ds.instances

    def test_para_n_execution(self, h3):
        ds = ds_of(inst("a", ["X"]), inst("b", ["Y"]), inst("c", []))
        plan = plan_para_n(ds, 3, h3)
        out = execute_plan(plan, ds, MockParaphraseProvider())
        assert len(out) == 12
        paraphrases = [i for i in out if i.origin == "paraphrase"]
        assert len(paraphrases) == 9
        assert {i.id for i in out if i.origin != "paraphrase"} == {"a", "b", "c"}
        assert "a-p1" in out.by_id()
        assert out.by_id()["a-p2"].text == "text of a ⟨para 2⟩"

    def test_balancing_reaches_target(self, h3):
        ds = ds_of(
            inst("i1", ["Y"]), inst("i2", ["Y"]),
            *(inst(f"x{k}", ["X"]) for k in range(12)),
            *(inst(f"z{k}", ["Z"]) for k in range(12)),
        )
        plan = plan_para_bal(ds, target=10, batch=5, h=h3)
        out = execute_plan(plan, ds, MockParaphraseProvider())
        counts = label_counts(out, h3)
        assert min(counts.values()) >= 10
        assert counts == plan.projected_counts

    def test_multi_request_source_gets_unique_ids(self, h3):
        ds = ds_of(inst("a", ["X", "Y"]))
        plan = plan_para_benef(ds, BenefitSet(techniques=frozenset({"X", "Y"})), 3, h3)
        assert len(plan.requests) == 2
        out = execute_plan(plan, ds, MockParaphraseProvider())
        ids = [i.id for i in out if i.origin == "paraphrase"]
        assert ids == [f"a-p{k}" for k in range(1, 7)]

    def test_unknown_source_id(self, h3):
        ds = ds_of(inst("a", ["X"]))
        plan = plan_para_n(ds, 1, h3)
        with pytest.raises(ValidationError, match="unknown id"):
            execute_plan(plan, ds_of(inst("other", ["X"])), MockParaphraseProvider())

    def test_existing_instances_untouched(self, h3):
        ds = ds_of(inst("a", ["X"]))
        plan = plan_para_n(ds, 2, h3)
        out = execute_plan(plan, ds, MockParaphraseProvider())
        assert out.instances[0] == ds.instances[0]

    def test_provider_failure_carries_partial(self, h3):
        ds = ds_of(inst("a", ["X"]), inst("b", ["Y"]))
        plan = plan_para_n(ds, 2, h3)
        with pytest.raises(PlanExecutionError) as err:
            execute_plan(plan, ds, FailingProvider(good=1))
        partial = err.value.partial
        assert partial is not None
        assert "PARTIAL" in partial.name
        # the completed prefix (first request) is preserved
        assert len(partial) == 4

    def test_concurrent_matches_sequential(self, h3):
        ds = ds_of(*(inst(f"i{k}", ["X"]) for k in range(6)))
        plan = plan_para_n(ds, 2, h3)
        seq = execute_plan(plan, ds, MockParaphraseProvider(), workers=1)
        par = execute_plan(plan, ds, MockParaphraseProvider(), workers=4)
        assert seq == par
