"""Walkthrough: zero-shot translate-then-predict, and the file-based CLI.

Run with:  python demos/04_zero_shot_and_cli.py
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

from persuakit import (
    Dataset,
    Instance,
    MockTranslator,
    ThresholdProfile,
    bundled_hierarchy,
    mock_members_producer,
    save_dataset,
    zero_shot_predict,
)

h = bundled_hierarchy()

# --- zero-shot in-library ---------------------------------------------------
bulgarian = [
    "Правителството никога няма да се поправи само",
    "Всички вече са съгласни с това",
    "Това е чиста пропаганда",
]
ds = Dataset(
    name="surprise-bg",
    instances=tuple(
        Instance(id=f"bg{k}", text=t, labels=frozenset(), language="bg")
        for k, t in enumerate(bulgarian)
    ),
)
profile = ThresholdProfile(thresholds={t: 0.65 for t in h.leaf_order})
result = zero_shot_predict(
    ds,
    MockTranslator(),                         # swap in HttpTranslator for live MT
    mock_members_producer(h.leaf_order),      # swap in real model logits when available
    profile,
    h,
)
print("Zero-shot predictions (mock translator + mock members):")
for iid, labels in result.labels.items():
    print(f"  {iid}: {sorted(labels) or '[]'}")
print("translation failures:", result.failures)

# --- the same flow through the CLI -------------------------------------------
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    ds_file = tmp / "bg.json"
    save_dataset(ds, ds_file)
    h_file = tmp / "h.json"
    h_file.write_text(json.dumps({
        "root": h.root,
        "edges": [[p, c] for c, p in h.parent.items()],
        "leaf_order": list(h.leaf_order),
    }), encoding="utf-8")
    profile_file = tmp / "profile.json"
    profile_file.write_text(profile.dumps(), encoding="utf-8")
    out_file = tmp / "labels.json"

    cmd = [
        sys.executable, "-m", "persuakit.cli", "translate-predict",
        "--dataset", str(ds_file), "--hierarchy", str(h_file),
        "--profile", str(profile_file), "--mock", "--out", str(out_file), "--quiet",
    ]
    print("\n$", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)
    print(out_file.read_text(encoding="utf-8"))
    manifest = json.loads((tmp / "labels.json.manifest.json").read_text())
    print("manifest inputs:", [e["path"].rsplit("/", 1)[-1] for e in manifest["inputs"]])
    print("manifest records", len(manifest["translation_failures"]), "translation failures")
