"""Fusion of aligned probability matrices by unweighted averaging."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ValidationError
from .thresholding import KIND_PROBABILITIES, PredictionMatrix


def check_alignment(members: Sequence[PredictionMatrix]) -> None:
    """Require non-empty members with equal id sets and technique order.

    Alignment is strict on purpose: silently outer-joining mismatched
    model outputs is the classic way to ship a broken ensemble.
    """
    if not members:
        raise ValidationError("ensemble requires at least one member")
    first = members[0]
    for k, m in enumerate(members):
        if m.kind != KIND_PROBABILITIES:
            raise ValidationError(f"ensemble member #{k} is not a probability matrix")
        if m.technique_order != first.technique_order:
            raise ValidationError(f"ensemble member #{k} has a different technique_order")
        if set(m.ids) != set(first.ids):
            raise ValidationError(f"ensemble member #{k} has a different id set")


def mean_ensemble(members: Sequence[PredictionMatrix]) -> PredictionMatrix:
    """Entrywise arithmetic mean, rows ordered by the first member's ids.

    Computed as first + mean(member - first), summed left-to-right in
    member order: identical members (and the single-member case) come out
    bit-for-bit equal to the input, and a given call is reproducible.
    """
    check_alignment(members)
    first = members[0]
    deltas = np.zeros_like(first.values)
    for m in members[1:]:
        index = m.row_index()
        perm = np.array([index[iid] for iid in first.ids], dtype=np.intp)
        deltas += m.values[perm] - first.values
    mean = first.values + deltas / len(members)
    # rounding can nudge an entry past [0, 1] by an ulp; clip for the invariant
    np.clip(mean, 0.0, 1.0, out=mean)
    return PredictionMatrix(
        ids=first.ids,
        technique_order=first.technique_order,
        values=mean,
        kind=KIND_PROBABILITIES,
    )
