"""Quality and efficiency measurements: perplexity and channel capacity.

Plain perplexity is exp of the mean per-word negative log-probability under
the model. The steganographic variant replaces each word probability with its
average over all possible bit blocks: every block's bin (plus the common set)
masks and renormalizes the distribution, and the word's masked probabilities
are averaged over the ``2**block_bits`` equally likely blocks. Tokens outside
every bin and outside the common set (the reserved sentinels) are skipped and
counted instead of contributing ``-inf``.

A single-bin key with no common tokens constrains nothing, so its stego
perplexity is by definition the plain perplexity (the masks are vacuous).

Capacity is bookkeeping: ``block_bits`` bits ride on every carrier token, so
a stream whose common-token fraction is p carries ``(1-p) * block_bits`` bits
per word.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .corpus import Vocabulary
from .errors import CorpusError, DecodeError
from .keying import StegoKey
from .lm.base import LanguageModel

_COMMON_SLOT = -2
_RESERVED_SLOT = -1


@dataclass(frozen=True)
class PerplexityReport:
    token_count: int
    mean_nll: float
    perplexity: float
    skipped_sentinels: int = 0
    infinite_positions: tuple[int, ...] = ()

    def to_text(self) -> str:
        lines = [
            f"token_count: {self.token_count}",
            f"mean_nll: {self.mean_nll:.6f} nats/word",
            f"perplexity: {self.perplexity:.4f}",
        ]
        if self.skipped_sentinels:
            lines.append(f"skipped_sentinels: {self.skipped_sentinels}")
        if self.infinite_positions:
            lines.append(
                "zero_probability_positions: "
                + ",".join(map(str, self.infinite_positions))
            )
        return "\n".join(lines)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["infinite_positions"] = list(self.infinite_positions)
        return json.dumps(doc, sort_keys=True)


@dataclass(frozen=True)
class CapacityReport:
    block_bits: int
    common_fraction: float
    bits_per_word: float
    bits_per_message: float | None = None
    token_count: int | None = None
    carrier_count: int | None = None
    common_count: int | None = None

    def to_text(self) -> str:
        lines = [
            f"block_bits: {self.block_bits}",
            f"common_fraction: {self.common_fraction:.4f}",
            f"capacity: {self.bits_per_word:.3f} bits/word",
        ]
        if self.bits_per_message is not None:
            lines.append(f"bits_per_message: {self.bits_per_message:.2f}")
        if self.token_count is not None:
            lines.append(f"token_count: {self.token_count}")
            lines.append(f"carrier_count: {self.carrier_count}")
            lines.append(f"common_count: {self.common_count}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _stream_ids(vocab: Vocabulary, tokens: Sequence[str]) -> list[int]:
    if not tokens:
        raise CorpusError("cannot evaluate an empty token stream")
    return [vocab.index_or_unk(t) for t in tokens]


def perplexity(model: LanguageModel, tokens: Sequence[str]) -> PerplexityReport:
    """exp of the mean negative log-probability over the stream."""
    ids = _stream_ids(model.vocab, tokens)
    ctx = model.initial_context()
    total = 0.0
    for idx in ids:
        prob = model.next_distribution(ctx)[idx]
        total += -math.log(prob) if prob > 0 else math.inf
        ctx = model.advance(ctx, idx)
    mean = total / len(ids)
    return PerplexityReport(len(ids), mean, math.exp(mean))


def is_vacuous(key: StegoKey) -> bool:
    """True for the degenerate single-bin, no-common key: it constrains nothing."""
    return key.block_bits == 0 and not key.common


def stego_distribution(probs: np.ndarray, key: StegoKey) -> np.ndarray:
    """Block-averaged probabilities: mean over bins of the masked, renormalized
    distribution. Reserved sentinels get 0; a vacuous key returns ``probs``."""
    if is_vacuous(key):
        return np.array(probs, dtype=np.float64, copy=True)
    lookup = key.lookup_array()
    carriers = lookup >= 0
    masses = np.bincount(lookup[carriers], weights=probs[carriers], minlength=key.num_bins)
    common_mass = float(probs[lookup == _COMMON_SLOT].sum())
    mask_mass = masses + common_mass
    inv = np.divide(1.0, mask_mass, out=np.zeros_like(mask_mass), where=mask_mass > 0)
    out = np.zeros_like(probs, dtype=np.float64)
    out[carriers] = probs[carriers] * inv[lookup[carriers]]
    common = lookup == _COMMON_SLOT
    if common.any():
        out[common] = probs[common] * inv.sum()
    return out / key.num_bins


def stego_word_prob(model: LanguageModel, ctx, key: StegoKey, word_index: int) -> float:
    """Average over all bit blocks of the word's masked probability."""
    model.check_index(word_index)
    return float(stego_distribution(model.next_distribution(ctx), key)[word_index])


def stego_perplexity(model: LanguageModel, key: StegoKey,
                     tokens: Sequence[str]) -> PerplexityReport:
    """Perplexity with the block-averaged word probability in place of the
    model probability; reserved sentinels are skipped and counted."""
    ids = _stream_ids(model.vocab, tokens)
    lookup = key.lookup_array()
    vacuous = is_vacuous(key)
    ctx = model.initial_context()
    total = 0.0
    scored = 0
    skipped = 0
    infinite: list[int] = []
    for position, idx in enumerate(ids):
        if not vacuous and lookup[idx] == _RESERVED_SLOT:
            skipped += 1
        else:
            prob = stego_word_prob(model, ctx, key, idx)
            if prob > 0:
                total += -math.log(prob)
            else:
                infinite.append(position)
            scored += 1
        ctx = model.advance(ctx, idx)
    if scored == 0:
        raise CorpusError("no scorable tokens in the stream (all reserved sentinels)")
    if infinite:
        return PerplexityReport(scored, math.inf, math.inf, skipped, tuple(infinite))
    mean = total / scored
    return PerplexityReport(scored, mean, math.exp(mean), skipped)


def capacity(block_bits: int, common_fraction: float,
             mean_message_length: float | None = None) -> CapacityReport:
    """Exact arithmetic: (1 - common_fraction) * block_bits bits per word."""
    if block_bits < 0:
        raise ValueError("block_bits must be non-negative")
    if not 0 <= common_fraction < 1:
        raise ValueError(f"common_fraction must lie in [0, 1), got {common_fraction}")
    bits_per_word = (1.0 - common_fraction) * block_bits
    bits_per_message = (
        bits_per_word * mean_message_length if mean_message_length is not None else None
    )
    return CapacityReport(block_bits, common_fraction, bits_per_word, bits_per_message)


def capacity_empirical(tokens: Sequence[str], key: StegoKey,
                       mean_message_length: float | None = None) -> CapacityReport:
    """Observed capacity of a stegotext stream: carriers carry block_bits each."""
    if not tokens:
        raise CorpusError("cannot measure capacity of an empty stream")
    lookup = key.lookup_array()
    carrier_count = 0
    common_count = 0
    for position, surface in enumerate(tokens):
        if surface not in key.vocab:
            raise DecodeError(f"token not in key vocabulary: {surface!r}", position)
        slot = lookup[key.vocab.index_of(surface)]
        if slot == _RESERVED_SLOT:
            raise DecodeError(f"undecodable token: {surface!r}", position)
        if slot == _COMMON_SLOT:
            common_count += 1
        else:
            carrier_count += 1
    total = len(tokens)
    fraction = common_count / total
    bits_per_word = key.block_bits * carrier_count / total
    bits_per_message = (
        bits_per_word * mean_message_length if mean_message_length is not None else None
    )
    return CapacityReport(
        key.block_bits, fraction, bits_per_word, bits_per_message,
        token_count=total, carrier_count=carrier_count, common_count=common_count,
    )
