"""Walkthrough: the three paraphrase-augmentation strategies.

Run with:  python demos/03_augmentation_planning.py
"""
import random

from persuakit import (
    BenefitSet,
    Dataset,
    Instance,
    MockParaphraseProvider,
    bundled_hierarchy,
    execute_plan,
    label_counts,
    plan_para_bal,
    plan_para_benef,
    plan_para_n,
)

h = bundled_hierarchy()
leaves = list(h.leaf_order)
rng = random.Random(1)

# A skewed corpus: the three frequent techniques dominate, the rest are thin.
instances = []
serial = 0
for t in leaves[:3]:
    for _ in range(60):
        instances.append(Instance(id=f"d{serial:04d}", text=f"text {serial}", labels=frozenset({t})))
        serial += 1
for t in leaves[3:]:
    for _ in range(rng.randint(2, 8)):
        labels = {t}
        if rng.random() < 0.3:
            labels.add(rng.choice(leaves[:3]))  # co-occurrence with a frequent one
        instances.append(Instance(id=f"d{serial:04d}", text=f"text {serial}", labels=frozenset(labels)))
        serial += 1
ds = Dataset(name="train-demo", instances=tuple(instances))
print("Corpus:", len(ds), "instances")

# --- para_n: blanket augmentation -----------------------------------------
plan = plan_para_n(ds, n=3, h=h)
print(f"\npara_n(n=3): {len(plan.requests)} requests, "
      f"projected size {len(ds) + plan.total_paraphrases} = |ds|*(3+1)")

# --- para_benef: only techniques that benefited ----------------------------
benefit = BenefitSet(techniques=frozenset(leaves[3:7]))
plan_b = plan_para_benef(ds, benefit, m=10, h=h)
print(f"\npara_benef(m=10) over B={sorted(benefit.techniques)[:2]}...: "
      f"{len(plan_b.requests)} requests, {plan_b.total_paraphrases} paraphrases")
print("every request labels the copy with T ∩ B only")

# --- para_bal: balance toward a per-technique target -----------------------
target, batch = 60, 5
plan_bal = plan_para_bal(ds, target=target, batch=batch, h=h)
print(f"\npara_bal(target={target}, batch={batch}): {len(plan_bal.requests)} "
      f"requests of exactly {batch} paraphrases each")

out = execute_plan(plan_bal, ds, MockParaphraseProvider())
before = label_counts(ds, h)
after = label_counts(out, h)
print(f"executed with the mock provider -> {len(out)} instances")
print("\ntechnique counts before -> after:")
for t in leaves:
    marker = "*" if before[t] < target else " "
    print(f" {marker} {t:45s} {before[t]:4d} -> {after[t]:4d}")
print("(*) was below target; every technique with sources now meets it")
