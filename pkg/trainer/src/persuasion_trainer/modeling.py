"""Encoder construction and tokenization, hub-backed with an offline fallback.

With hub access, the pretrained encoder and tokenizer named by model_id are
loaded and the pinned revision is recorded. Without it (air-gapped CI, this
sandbox), toy mode falls back to a tiny randomly-initialized encoder of the
matching family plus a deterministic hashing tokenizer; the fallback is
recorded in the training log in place of a revision.
"""
from __future__ import annotations

import hashlib
import logging
import os
import re

import torch
from torch import nn

log = logging.getLogger(__name__)


def _hub_disabled() -> bool:
    # honor the standard offline switches to skip the hub probe entirely
    return any(
        os.environ.get(var, "").lower() in ("1", "true", "yes")
        for var in ("HF_HUB_OFFLINE", "TRANSFORMERS_OFFLINE")
    )

TINY = dict(
    vocab_size=4096,
    hidden_size=64,
    num_hidden_layers=2,
    num_attention_heads=4,
    intermediate_size=128,
)


class HashingTokenizer:
    """Vocabulary-free tokenizer: stable sha256 bucket per word.

    Deterministic across runs and platforms, which keeps fixed-seed toy
    training reproducible without any downloaded vocab files.
    """

    PAD, CLS, SEP, UNK = 0, 1, 2, 3
    SPECIALS = 4

    def __init__(self, vocab_size: int = TINY["vocab_size"], max_length: int = 64):
        self.vocab_size = vocab_size
        self.max_length = max_length

    def _bucket(self, token: str) -> int:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "big") % (self.vocab_size - self.SPECIALS) + self.SPECIALS

    def encode(self, text: str) -> list[int]:
        tokens = re.findall(r"\w+", text.lower(), flags=re.UNICODE)
        ids = [self._bucket(t) for t in tokens[: self.max_length - 2]]
        if not ids:
            ids = [self.UNK]
        return [self.CLS] + ids + [self.SEP]

    def batch(self, texts: list[str]) -> dict[str, torch.Tensor]:
        encoded = [self.encode(t) for t in texts]
        width = max(len(e) for e in encoded)
        input_ids = torch.full((len(encoded), width), self.PAD, dtype=torch.long)
        attention_mask = torch.zeros((len(encoded), width), dtype=torch.long)
        for i, ids in enumerate(encoded):
            input_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            attention_mask[i, : len(ids)] = 1
        return {"input_ids": input_ids, "attention_mask": attention_mask}


class HubTokenizerAdapter:
    """Wrap a hub tokenizer behind the same batch() surface."""

    def __init__(self, tokenizer, max_length: int):
        self.tokenizer = tokenizer
        self.max_length = max_length

    def batch(self, texts: list[str]) -> dict[str, torch.Tensor]:
        out = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        return {"input_ids": out["input_ids"], "attention_mask": out["attention_mask"]}


def _tiny_encoder(model_id: str, max_length: int):
    from transformers import BertConfig, BertModel, XLMRobertaConfig, XLMRobertaModel

    common = dict(TINY, max_position_embeddings=max_length + 8)
    if model_id == "xlm-roberta-base":
        # roberta reserves low position ids for padding offsets
        config = XLMRobertaConfig(**dict(common, max_position_embeddings=max_length + 16, pad_token_id=0))
        return XLMRobertaModel(config)
    config = BertConfig(**common, pad_token_id=0)
    return BertModel(config)


def build_encoder(model_id: str, max_length: int):
    """Return (encoder, tokenizer, provenance string)."""
    if not _hub_disabled():
        try:
            from transformers import AutoModel, AutoTokenizer

            encoder = AutoModel.from_pretrained(model_id)
            tokenizer = AutoTokenizer.from_pretrained(model_id)
            revision = getattr(encoder.config, "_commit_hash", None) or "unpinned"
            log.info("loaded %s from the model hub (revision %s)", model_id, revision)
            return encoder, HubTokenizerAdapter(tokenizer, max_length), f"hub:{revision}"
        except Exception as exc:
            log.warning(
                "model hub unavailable for %s (%s); using the tiny offline fallback",
                model_id,
                exc.__class__.__name__,
            )
    encoder = _tiny_encoder(model_id, max_length)
    tokenizer = HashingTokenizer(max_length=max_length)
    return encoder, tokenizer, "offline-tiny"


class MultiLabelClassifier(nn.Module):
    """Encoder + masked mean pooling + one feedforward layer of logits."""

    def __init__(self, encoder, n_labels: int):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.config.hidden_size, n_labels)

    @property
    def n_labels(self) -> int:
        return self.head.out_features

    def forward(self, input_ids, attention_mask):
        hidden = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state
        mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        return self.head(pooled)
