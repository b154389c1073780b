import json

import numpy as np
import pytest

from persuakit import (
    Dataset,
    Instance,
    MockTranslator,
    PredictionMatrix,
    ThresholdProfile,
    apply_thresholds,
    load_label_map,
    mock_members_producer,
    predict_labels,
    zero_shot_predict,
)
from persuakit.errors import ProviderError
from persuakit.pipeline import RunManifest, dumps_labels, file_digest, parse_labels


def member(values, ids, techniques=("X", "Y"), kind="probabilities"):
    return PredictionMatrix(
        ids=tuple(ids),
        technique_order=tuple(techniques),
        values=np.asarray(values, dtype=float),
        kind=kind,
    )


PROFILE = ThresholdProfile(thresholds={"X": 0.35, "Y": 0.55})


class TestPredictLabels:
    def test_single_member_equals_thresholding(self):
        m = member([[0.4, 0.6], [0.2, 0.9]], ids=("a", "b"))
        assert predict_labels([m], PROFILE) == apply_thresholds(m, PROFILE)

    def test_three_identical_members(self):
        m = member([[0.4, 0.6]], ids=("a",))
        assert predict_labels([m, m, m], PROFILE) == predict_labels([m], PROFILE)

    def test_hand_fixture(self):
        m1 = member([[0.2, 0.8]], ids=("a",))
        m2 = member([[0.6, 0.4]], ids=("a",))
        assert predict_labels([m1, m2], PROFILE)["a"] == {"X", "Y"}

    def test_logit_members_pass_through_sigmoid(self):
        # logits 0 -> 0.5 probability, above X's 0.35 and below Y's 0.55
        m = member([[0.0, 0.0]], ids=("a",), kind="logits")
        assert predict_labels([m], PROFILE)["a"] == {"X"}

    def test_all_ones_gets_every_label(self):
        m = member([[1.0, 1.0]], ids=("a",))
        assert predict_labels([m], PROFILE)["a"] == {"X", "Y"}


def bg_dataset():
    return Dataset(
        name="bg",
        instances=tuple(
            Instance(id=f"b{k}", text=f"текст {k}", labels=frozenset(), language="bg")
            for k in range(3)
        ),
    )


class FailFirstTranslator:
    def __init__(self):
        self.calls = 0

    def translate(self, text, source, target):
        self.calls += 1
        if self.calls == 1:
            raise ProviderError("mt down")
        return f"[{target}] {text}"


class TestZeroShot:
    def test_english_identity_matches_direct(self):
        ds = Dataset(
            name="en",
            instances=(Instance(id="a", text="hello", labels=frozenset()),),
        )
        producer = mock_members_producer(("X", "Y"), n_members=3)
        direct = predict_labels(producer(ds), PROFILE)
        result = zero_shot_predict(ds, MockTranslator(), producer, PROFILE)
        assert result.labels == direct
        assert result.failures == []

    def test_mock_bulgarian_three_instances(self):
        ds = bg_dataset()
        producer = mock_members_producer(("X", "Y"), n_members=3)
        result = zero_shot_predict(ds, MockTranslator(), producer, PROFILE)
        assert set(result.labels) == {"b0", "b1", "b2"}
        assert result.failures == []

    def test_translation_failure_isolated(self):
        ds = bg_dataset()
        producer = mock_members_producer(("X", "Y"), n_members=2)
        result = zero_shot_predict(ds, FailFirstTranslator(), producer, PROFILE)
        assert set(result.labels) == {"b0", "b1", "b2"}
        assert result.failures == ["b0"]
        assert result.labels["b0"] == frozenset()

    def test_id_order_preserved(self):
        ds = bg_dataset()
        producer = mock_members_producer(("X", "Y"))
        result = zero_shot_predict(ds, MockTranslator(), producer, PROFILE)
        assert list(result.labels) == ["b0", "b1", "b2"]


class TestMockProducer:
    def test_deterministic_across_calls(self):
        ds = bg_dataset()
        one = mock_members_producer(("X", "Y"), seed=1)(ds)
        two = mock_members_producer(("X", "Y"), seed=1)(ds)
        for a, b in zip(one, two):
            assert np.array_equal(a.values, b.values)

    def test_seed_changes_scores(self):
        ds = bg_dataset()
        one = mock_members_producer(("X", "Y"), seed=1)(ds)
        two = mock_members_producer(("X", "Y"), seed=2)(ds)
        assert not np.array_equal(one[0].values, two[0].values)

    def test_members_align_for_ensembling(self):
        ds = bg_dataset()
        members = mock_members_producer(("X", "Y"), n_members=3)(ds)
        assert len(members) == 3
        assert all(m.ids == members[0].ids for m in members)


class TestLabelFiles:
    def test_round_trip(self, h1):
        labels = {"a": frozenset({"Slogans"}), "b": frozenset()}
        again = parse_labels(dumps_labels(labels), h1)
        assert again == labels

    def test_rejects_unknown_label(self, h1):
        doc = json.dumps([{"id": "a", "labels": ["nope"]}])
        with pytest.raises(Exception, match="unknown technique"):
            parse_labels(doc, h1)

    def test_load_label_map_detects_dataset(self, tmp_path, h1):
        ds_file = tmp_path / "ds.json"
        ds_file.write_text(
            json.dumps([{"id": "a", "text": "t", "labels": ["Slogans"]}]),
            encoding="utf-8",
        )
        assert load_label_map(ds_file, h1) == {"a": frozenset({"Slogans"})}

    def test_load_label_map_accepts_submissions(self, tmp_path, h1):
        f = tmp_path / "labels.json"
        f.write_text(json.dumps([{"id": "a", "labels": []}]), encoding="utf-8")
        assert load_label_map(f, h1) == {"a": frozenset()}


class TestManifest:
    def test_digests_and_shape(self, tmp_path):
        data = tmp_path / "in.json"
        data.write_text("[1, 2, 3]", encoding="utf-8")
        manifest = RunManifest(command="stats", parameters={"x": 1})
        manifest.add_input(data)
        out = tmp_path / "manifest.json"
        manifest.write(out)
        obj = json.loads(out.read_text(encoding="utf-8"))
        assert obj["command"] == "stats"
        assert obj["inputs"][0]["sha256"] == file_digest(data)
        assert "timestamp" in obj
        assert "translation_failures" not in obj

    def test_failures_recorded_when_present(self, tmp_path):
        manifest = RunManifest(command="translate-predict", parameters={},
                               translation_failures=["b0"])
        out = tmp_path / "m.json"
        manifest.write(out)
        assert json.loads(out.read_text())["translation_failures"] == ["b0"]
