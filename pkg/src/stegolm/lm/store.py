"""STEGOLM v1 model container.

Layout (UTF-8 header lines, then a raw binary payload):

    STEGOLM v1
    backend: <ngram|lstm>
    vocab_hash: <hex sha256 of the vocabulary file>
    config: <one-line JSON: hyperparameters, plus training history for lstm>
    payload_bytes: <N>
    <N raw payload bytes>

The payload is backend-defined: a JSON count table for ngram, an npz archive
of float64 parameter arrays for lstm. Loading requires the vocabulary the
model was trained against; a hash mismatch is an error.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..corpus import Vocabulary
from ..errors import ModelFormatError, VocabMismatchError
from .base import LanguageModel
from .lstm import EpochStats, LstmHyperparams, LstmModel
from .ngram import NgramModel

MODEL_HEADER = b"STEGOLM v1"


def serialize_model(model: LanguageModel) -> bytes:
    if isinstance(model, NgramModel):
        config: dict = {}
        payload = model.to_payload()
    elif isinstance(model, LstmModel):
        config = {
            "hyperparams": {k: getattr(model.hp, k) for k in model.hp.__dataclass_fields__},
            "history": [
                {k: getattr(s, k) for k in s.__dataclass_fields__} for s in model.history
            ],
        }
        payload = model.to_payload()
    else:
        raise ModelFormatError(f"unknown model type: {type(model).__name__}")
    header = (
        f"backend: {model.backend}\n"
        f"vocab_hash: {model.vocab_hash}\n"
        f"config: {json.dumps(config, sort_keys=True)}\n"
        f"payload_bytes: {len(payload)}\n"
    ).encode("utf-8")
    return MODEL_HEADER + b"\n" + header + payload


def deserialize_model(data: bytes, vocab: Vocabulary) -> LanguageModel:
    fields: dict[str, str] = {}
    offset = 0
    for lineno in range(5):
        end = data.find(b"\n", offset)
        if end < 0:
            raise ModelFormatError("truncated model header")
        line = data[offset:end]
        offset = end + 1
        if lineno == 0:
            if line != MODEL_HEADER:
                raise ModelFormatError(f"missing {MODEL_HEADER.decode()!r} header")
            continue
        key, _, value = line.decode("utf-8").partition(": ")
        fields[key] = value
    try:
        payload_bytes = int(fields["payload_bytes"])
        backend = fields["backend"]
        vocab_hash = fields["vocab_hash"]
        config = json.loads(fields["config"])
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad model header: {exc}") from None
    if vocab_hash != vocab.content_hash():
        raise VocabMismatchError("model was trained against a different vocabulary")
    payload = data[offset:offset + payload_bytes]
    if len(payload) != payload_bytes:
        raise ModelFormatError("model payload shorter than declared")
    if backend == "ngram":
        return NgramModel.from_payload(vocab, payload)
    if backend == "lstm":
        try:
            hp = LstmHyperparams(**config["hyperparams"])
            history = [EpochStats(**s) for s in config.get("history", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"bad lstm config: {exc}") from None
        return LstmModel.from_payload(vocab, hp, payload, history)
    raise ModelFormatError(f"unknown backend tag: {backend!r}")


def save_model(model: LanguageModel, path: str | Path) -> None:
    Path(path).write_bytes(serialize_model(model))


def load_model(path: str | Path, vocab: Vocabulary) -> LanguageModel:
    return deserialize_model(Path(path).read_bytes(), vocab)
