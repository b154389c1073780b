"""Fine-tuning and prediction-export for the three encoder models.

Training minimizes binary cross entropy on logits against multi-hot label
vectors; the head has one logit per leaf technique. Artifacts are
self-contained directories that reload without hub access, and prediction
writes the toolkit's logit-matrix wire format.
"""
from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import torch
from torch import nn

from .config import ConfigError, TrainConfig
from .data import Record, save_logit_matrix
from .modeling import HashingTokenizer, HubTokenizerAdapter, MultiLabelClassifier, build_encoder

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


def _subsample(records: list[Record], fraction: float, seed: int) -> list[Record]:
    if fraction >= 1.0:
        return list(records)
    count = max(1, round(len(records) * fraction))
    rng = random.Random(seed)
    return rng.sample(records, count)


def _multi_hot(records: list[Record], leaf_order) -> torch.Tensor:
    index = {t: j for j, t in enumerate(leaf_order)}
    target = torch.zeros((len(records), len(leaf_order)))
    for i, rec in enumerate(records):
        for lab in rec.labels:
            target[i, index[lab]] = 1.0
    return target


def train(
    cfg: TrainConfig,
    records: list[Record],
    leaf_order: tuple[str, ...],
    out_dir,
) -> dict:
    """Fine-tune one model and save the artifact; returns the training log."""
    if not records:
        raise TrainingError("training requires a non-empty dataset")
    torch.manual_seed(cfg.seed)

    subset = _subsample(records, cfg.toy_fraction, cfg.seed)
    encoder, tokenizer, provenance = build_encoder(cfg.model_id, cfg.max_sequence_length)
    model = MultiLabelClassifier(encoder, n_labels=len(leaf_order))
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()

    targets = _multi_hot(subset, leaf_order)
    texts = [r.text for r in subset]
    batch_size = min(cfg.resolved_batch_size, len(subset))
    shuffler = torch.Generator().manual_seed(cfg.seed)

    epoch_losses: list[float] = []
    model.train()
    for epoch in range(cfg.epochs):
        perm = torch.randperm(len(subset), generator=shuffler)
        total = 0.0
        steps = 0
        for start in range(0, len(subset), batch_size):
            idx = perm[start : start + batch_size]
            batch = tokenizer.batch([texts[i] for i in idx])
            optimizer.zero_grad()
            logits = model(**batch)
            loss = loss_fn(logits, targets[idx])
            loss.backward()
            optimizer.step()
            total += loss.item()
            steps += 1
        epoch_losses.append(total / steps)
        log.info("%s epoch %d/%d loss %.4f", cfg.model_id, epoch + 1, cfg.epochs, epoch_losses[-1])

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out_dir / "weights.pt")
    tokenizer_spec = (
        {"kind": "hub", "model_id": cfg.model_id, "max_length": cfg.max_sequence_length}
        if isinstance(tokenizer, HubTokenizerAdapter)
        else {
            "kind": "hash",
            "vocab_size": tokenizer.vocab_size,
            "max_length": tokenizer.max_length,
        }
    )
    (out_dir / "artifact.json").write_text(
        json.dumps(
            {
                "model_id": cfg.model_id,
                "provenance": provenance,
                "technique_order": list(leaf_order),
                "encoder_config": model.encoder.config.to_dict(),
                "tokenizer": tokenizer_spec,
            },
            ensure_ascii=False,
            indent=1,
        ),
        encoding="utf-8",
    )
    train_log = {
        "model_id": cfg.model_id,
        "provenance": provenance,
        "config": cfg.to_dict(),
        "n_train": len(subset),
        "epoch_losses": epoch_losses,
    }
    (out_dir / "training_log.json").write_text(
        json.dumps(train_log, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    return train_log


def _load_artifact(model_dir):
    model_dir = Path(model_dir)
    try:
        meta = json.loads((model_dir / "artifact.json").read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise TrainingError(f"{model_dir} is not a model artifact") from exc
    from transformers import AutoConfig, AutoModel

    enc_cfg = dict(meta["encoder_config"])
    model_type = enc_cfg.pop("model_type")
    encoder = AutoModel.from_config(AutoConfig.for_model(model_type, **enc_cfg))
    model = MultiLabelClassifier(encoder, n_labels=len(meta["technique_order"]))
    state = torch.load(model_dir / "weights.pt", weights_only=True)
    model.load_state_dict(state)
    model.eval()

    tok = meta["tokenizer"]
    if tok["kind"] == "hash":
        tokenizer = HashingTokenizer(vocab_size=tok["vocab_size"], max_length=tok["max_length"])
    else:
        from transformers import AutoTokenizer

        tokenizer = HubTokenizerAdapter(
            AutoTokenizer.from_pretrained(tok["model_id"]), tok["max_length"]
        )
    return model, tokenizer, meta


def predict(
    model_dir,
    records: list[Record],
    leaf_order: tuple[str, ...],
    out_path,
    batch_size: int = 32,
) -> list[str]:
    """Export logits for every instance; returns ids skipped on tokenization.

    The artifact's technique order must equal the hierarchy's leaf order
    (otherwise the head width would not match the requested matrix).
    """
    model, tokenizer, meta = _load_artifact(model_dir)
    if tuple(meta["technique_order"]) != tuple(leaf_order):
        raise ConfigError(
            "artifact technique order does not match the hierarchy leaf order "
            f"({len(meta['technique_order'])} vs {len(leaf_order)} techniques)"
        )

    usable: list[Record] = []
    skipped: list[str] = []
    for rec in records:
        try:
            tokenizer.batch([rec.text])
        except Exception:
            skipped.append(rec.id)
            continue
        usable.append(rec)
    if skipped:
        log.warning("skipped %d instances that failed tokenization: %s",
                    len(skipped), skipped[:5])

    rows = []
    with torch.no_grad():
        for start in range(0, len(usable), batch_size):
            chunk = usable[start : start + batch_size]
            batch = tokenizer.batch([r.text for r in chunk])
            rows.append(model(**batch))
    logits = torch.cat(rows).numpy() if rows else torch.zeros((0, len(leaf_order))).numpy()
    save_logit_matrix(out_path, [r.id for r in usable], leaf_order, logits)
    return skipped
