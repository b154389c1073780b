import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from persuakit import PredictionMatrix, ValidationError, mean_ensemble


def member(values, ids=None, techniques=("X", "Y")):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    ids = ids or tuple(f"i{k}" for k in range(values.shape[0]))
    return PredictionMatrix(
        ids=tuple(ids),
        technique_order=tuple(techniques),
        values=values,
        kind="probabilities",
    )


def test_three_member_mean():
    fused = mean_ensemble([member([[0.2, 0.2]]), member([[0.4, 0.4]]), member([[0.6, 0.6]])])
    assert fused.values[0, 0] == pytest.approx(0.4, abs=1e-12)


def test_two_member_extremes():
    fused = mean_ensemble([member([[0.0, 1.0]]), member([[1.0, 0.0]])])
    assert np.array_equal(fused.values, [[0.5, 0.5]])


def test_identical_members_exact():
    rng = np.random.default_rng(0)
    vals = rng.random((4, 2))
    fused = mean_ensemble([member(vals), member(vals.copy()), member(vals.copy())])
    assert np.array_equal(fused.values, vals)


def test_single_member_identity():
    rng = np.random.default_rng(1)
    m = member(rng.random((5, 2)))
    fused = mean_ensemble([m])
    assert np.array_equal(fused.values, m.values)
    assert fused.ids == m.ids


def test_rows_realigned_by_id():
    a = member([[0.0, 0.0], [1.0, 1.0]], ids=("x", "y"))
    b = member([[1.0, 1.0], [0.0, 0.0]], ids=("y", "x"))
    fused = mean_ensemble([a, b])
    assert fused.ids == ("x", "y")
    assert np.array_equal(fused.values, [[0.0, 0.0], [1.0, 1.0]])


def test_empty_member_list():
    with pytest.raises(ValidationError, match="at least one"):
        mean_ensemble([])


def test_id_set_mismatch():
    with pytest.raises(ValidationError, match="id set"):
        mean_ensemble([member([[0.1, 0.1]]), member([[0.1, 0.1]], ids=("other",))])


def test_technique_order_mismatch():
    with pytest.raises(ValidationError, match="technique_order"):
        mean_ensemble(
            [member([[0.1, 0.1]]), member([[0.1, 0.1]], techniques=("Y", "X"))]
        )


def test_logits_rejected():
    probs = member([[0.1, 0.1]])
    logits = PredictionMatrix(
        ids=("i0",), technique_order=("X", "Y"), values=[[0.1, 0.1]], kind="logits"
    )
    with pytest.raises(ValidationError, match="probability"):
        mean_ensemble([probs, logits])


member_sets = st.integers(min_value=1, max_value=5).flatmap(
    lambda k: st.lists(
        st.lists(
            st.lists(st.floats(0, 1, allow_nan=False), min_size=2, max_size=2),
            min_size=3, max_size=3,
        ),
        min_size=k, max_size=k,
    )
)


@settings(max_examples=60)
@given(member_sets)
def test_permutation_invariance_and_bounds(raw):
    members = [member(v) for v in raw]
    fused = mean_ensemble(members)
    reversed_fused = mean_ensemble(list(reversed(members)))
    assert np.max(np.abs(fused.values - reversed_fused.values)) <= 1e-12
    stack = np.stack([m.values for m in members])
    assert np.all(fused.values >= stack.min(axis=0) - 1e-12)
    assert np.all(fused.values <= stack.max(axis=0) + 1e-12)


def test_commutes_with_column_selection():
    rng = np.random.default_rng(5)
    vals = [rng.random((4, 3)) for _ in range(3)]
    full = mean_ensemble([member(v, techniques=("A", "B", "C")) for v in vals])
    sliced = mean_ensemble([member(v[:, :2], techniques=("A", "B")) for v in vals])
    assert np.array_equal(full.values[:, :2], sliced.values)
