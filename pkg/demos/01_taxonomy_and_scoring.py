"""Walkthrough: the technique taxonomy and the hierarchical scorer.

Run with:  python demos/01_taxonomy_and_scoring.py
"""
from persuakit import ancestor_closure, bundled_hierarchy, hierarchical_prf

h = bundled_hierarchy()

print("The shipped taxonomy has", len(h.leaf_order), "predictable techniques:")
for t in h.leaf_order:
    print("  -", t)

# Label sets expand with their non-root ancestors before scoring, so a
# prediction in the right subtree earns partial credit.
print("\nClosure of {'Smears'}:", sorted(ancestor_closure(h, {"Smears"})))
print("Closure of {'Slogans', 'Red Herring'}:",
      sorted(ancestor_closure(h, {"Slogans", "Red Herring"})))

# Two annotated instances; the model confuses Smears with Name calling.
gold = {
    "meme-1": frozenset({"Smears"}),
    "meme-2": frozenset({"Loaded Language", "Slogans"}),
}
pred = {
    "meme-1": frozenset({"Name calling/Labelling"}),   # sibling under Ad Hominem
    "meme-2": frozenset({"Loaded Language", "Slogans"}),
}

report = hierarchical_prf(gold, pred, h)
print("\nHierarchical scores with a sibling confusion on meme-1:")
print(f"  hP = {report.h_precision:.4f}")
print(f"  hR = {report.h_recall:.4f}")
print(f"  hF1 = {report.h_f1:.4f}")
print("The wrong leaf still shares 'Ad Hominem' and 'Ethos' with the gold one,")
print("so the score is well above zero; a flat scorer would give no credit.")

print("\nPer-technique flat scores:")
for t, s in report.per_class.items():
    if s.support or s.precision or s.recall:
        print(f"  {t:35s} P={s.precision:.2f} R={s.recall:.2f} F1={s.f1:.2f} "
              f"support={s.support}")
