import random


def synthetic_rows(leaf_order, n, seed=0):
    rng = random.Random(seed)
    rows = []
    for k in range(n):
        labels = rng.sample(list(leaf_order), rng.choice([0, 1, 1, 2]))
        rows.append({
            "id": f"s{k:04d}",
            "text": f"synthetic english sentence {k} about {' and '.join(labels) or 'nothing'}",
            "labels": labels,
        })
    return rows
