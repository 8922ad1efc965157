"""Embedding and extraction: payload bits -> constrained text -> payload bits.

Encoding walks the payload one bit block at a time and asks the language
model for the next token with the distribution masked to the block's bin
(plus the common set, when the key has one). Common tokens are emitted for
fluency but consume no bits; a run of them is capped at
``GenPolicy.max_common_run`` and never repeats a token within the run, which
guarantees termination under greedy selection. Every emitted token, common or
carrier, advances the model context. Generation starts from the model's
initial state after consuming ``<eos>``.

Decoding needs no language model: drop common tokens, map each carrier token
to its bin, concatenate the bits. With RAW framing the payload boundary is
implicit (trailing bits that do not fill a block are never encoded); with
LENGTH framing a 32-bit big-endian bit count is prepended and the tail is
zero-padded to a block boundary, so the exact byte payload is recoverable.

Bit order is fixed: most significant bit first within each byte, and the
leftmost bit of a block is its most significant when indexing bins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .corpus import EOS_TOKEN, UNK_TOKEN, URL_TOKEN, USER_TOKEN
from .errors import DecodeError, EncodeError, KeyInvariantError, VocabMismatchError
from .keying import COMMON, BitBlock, StegoKey
from .lm.base import LanguageModel


class Framing(enum.Enum):
    RAW = "raw"
    LENGTH_PREFIXED = "length"


class Mode(enum.Enum):
    GREEDY = "greedy"
    SAMPLE = "sample"


@dataclass(frozen=True)
class Payload:
    """Secret bytes plus the framing rule used to delimit them."""

    data: bytes
    framing: Framing = Framing.RAW

    def bit_string(self) -> str:
        return bytes_to_bits(self.data)


@dataclass(frozen=True)
class GenPolicy:
    """How the next token is chosen among the allowed ones."""

    mode: Mode = Mode.SAMPLE
    temperature: float = 1.0
    seed: int = 0
    max_common_run: int = 5

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.max_common_run < 1:
            raise ValueError("max_common_run must be at least 1")


@dataclass(frozen=True)
class RenderOptions:
    """Presentation knobs for the surface string; decoding never sees it."""

    user_subs: tuple[str, ...] = ()
    url_subs: tuple[str, ...] = ()
    capitalize: bool = False

    def user_mock(self, occurrence: int) -> str:
        if occurrence < len(self.user_subs):
            return self.user_subs[occurrence]
        return f"@user{occurrence + 1:03d}"

    def url_mock(self, occurrence: int) -> str:
        if occurrence < len(self.url_subs):
            return self.url_subs[occurrence]
        return f"http://example.com/{occurrence + 1}"


@dataclass(frozen=True)
class Stegotext:
    """Generated token sequence plus its rendered surface form."""

    tokens: tuple[str, ...]
    carrier_count: int
    rendered: str


LENGTH_HEADER_BITS = 32
_NO_SPACE_BEFORE = set(".,!?;:")


def bytes_to_bits(data: bytes) -> str:
    """MSB-first bit string of a byte sequence."""
    return "".join(format(byte, "08b") for byte in data)


def bits_to_bytes(bits: str) -> bytes:
    """Inverse of bytes_to_bits; the length must be a multiple of 8."""
    if len(bits) % 8:
        raise ValueError(f"bit string length {len(bits)} is not a multiple of 8")
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


def payload_to_bits(payload: Payload, block_bits: int) -> str:
    """Frame the payload as the exact bit string handed to the block splitter."""
    bits = payload.bit_string()
    if payload.framing is Framing.RAW:
        return bits
    header = format(len(bits), f"0{LENGTH_HEADER_BITS}b")
    framed = header + bits
    if block_bits > 0 and len(framed) % block_bits:
        framed += "0" * (block_bits - len(framed) % block_bits)
    return framed


def split_blocks(bits: str, block_bits: int) -> list[BitBlock]:
    """Cut a bit string into blocks, dropping any trailing remainder."""
    if block_bits < 1:
        raise EncodeError("block_bits must be at least 1 to split payload bits")
    full = len(bits) // block_bits
    return [
        BitBlock.from_bits(bits[i * block_bits:(i + 1) * block_bits])
        for i in range(full)
    ]


def to_bit_blocks(payload: Payload, block_bits: int) -> list[BitBlock]:
    """MSB-first bit blocks of a framed payload (RAW drops the remainder)."""
    return split_blocks(payload_to_bits(payload, block_bits), block_bits)


def _session_rng(policy: GenPolicy) -> np.random.Generator:
    return np.random.default_rng(policy.seed)


def constrained_select(
    model: LanguageModel,
    ctx,
    key: StegoKey,
    block: BitBlock,
    policy: GenPolicy,
    *,
    rng: np.random.Generator | None = None,
    include_common: bool = True,
    banned: frozenset[int] | set[int] = frozenset(),
) -> int:
    """Pick the next token index from the block's bin (plus the common set).

    GREEDY takes the argmax of the masked distribution, ties to the lowest
    token index; SAMPLE draws from the masked distribution renormalized at
    ``policy.temperature``.
    """
    if block.width != key.block_bits:
        raise EncodeError(
            f"block width {block.width} does not match key block_bits {key.block_bits}"
        )
    allowed = list(key.bins[block.value])
    if include_common:
        allowed.extend(i for i in key.common if i not in banned)
        allowed.sort()
    probs = model.next_distribution(ctx)
    if len(probs) != len(key.vocab):
        raise VocabMismatchError(
            f"model emits {len(probs)} probabilities for |V|={len(key.vocab)}"
        )
    allowed_arr = np.asarray(allowed, dtype=np.int64)
    mass = probs[allowed_arr]
    total = mass.sum()
    if not total > 0:
        raise EncodeError("no probability mass on the allowed tokens")
    if policy.mode is Mode.GREEDY:
        return int(allowed_arr[int(np.argmax(mass))])
    if rng is None:
        rng = _session_rng(policy)
    weights = (mass / total) ** (1.0 / policy.temperature)
    weights /= weights.sum()
    return int(allowed_arr[rng.choice(len(allowed_arr), p=weights)])


def _start_context(model: LanguageModel):
    ctx = model.initial_context()
    return model.advance(ctx, model.vocab.index_of(EOS_TOKEN))


def encode_bits(
    bits: str,
    key: StegoKey,
    model: LanguageModel,
    policy: GenPolicy = GenPolicy(),
    render_options: RenderOptions = RenderOptions(),
) -> Stegotext:
    """Embed a raw bit string (trailing bits short of a block are dropped)."""
    if key.block_bits < 1:
        raise EncodeError("a single-bin key carries no bits; nothing can be embedded")
    if model.vocab_hash != key.vocab_hash:
        raise VocabMismatchError("model and key were built from different vocabularies")
    blocks = split_blocks(bits, key.block_bits)
    if not blocks:
        raise EncodeError(
            f"payload of {len(bits)} bits is shorter than one {key.block_bits}-bit block"
        )
    rng = _session_rng(policy)
    ctx = _start_context(model)
    tokens: list[str] = []
    carrier_count = 0
    for block in blocks:
        run = 0
        banned: set[int] = set()
        while True:
            allow_common = bool(key.common) and run < policy.max_common_run
            idx = constrained_select(
                model, ctx, key, block, policy,
                rng=rng, include_common=allow_common, banned=banned,
            )
            ctx = model.advance(ctx, idx)
            tokens.append(key.vocab.token(idx))
            if idx in key.common_set:
                run += 1
                banned.add(idx)
            else:
                carrier_count += 1
                break
    return Stegotext(
        tokens=tuple(tokens),
        carrier_count=carrier_count,
        rendered=render(tokens, render_options),
    )


def encode(
    payload: Payload,
    key: StegoKey,
    model: LanguageModel,
    policy: GenPolicy = GenPolicy(),
    render_options: RenderOptions = RenderOptions(),
) -> Stegotext:
    """Embed a byte payload under the payload's framing rule."""
    if key.block_bits < 1:
        raise EncodeError("a single-bin key carries no bits; nothing can be embedded")
    return encode_bits(payload_to_bits(payload, key.block_bits), key, model,
                       policy, render_options)


def generate(
    model: LanguageModel,
    n_tokens: int,
    policy: GenPolicy = GenPolicy(),
    *,
    exclude: tuple[str, ...] = (EOS_TOKEN,),
) -> list[str]:
    """Unconstrained generation (no key, no payload); sentinels are excluded."""
    vocab = model.vocab
    banned = {vocab.index_of(t) for t in set(exclude) | {UNK_TOKEN} if t in vocab}
    allowed = np.asarray([i for i in range(len(vocab)) if i not in banned], dtype=np.int64)
    rng = _session_rng(policy)
    ctx = _start_context(model)
    out: list[str] = []
    for _ in range(n_tokens):
        probs = model.next_distribution(ctx)
        mass = probs[allowed]
        if policy.mode is Mode.GREEDY:
            idx = int(allowed[int(np.argmax(mass))])
        else:
            weights = (mass / mass.sum()) ** (1.0 / policy.temperature)
            weights /= weights.sum()
            idx = int(allowed[rng.choice(len(allowed), p=weights)])
        ctx = model.advance(ctx, idx)
        out.append(vocab.token(idx))
    return out


def decode(tokens, key: StegoKey, framing: Framing = Framing.RAW) -> str:
    """Recover the embedded bit string from a token sequence (no model needed)."""
    pieces: list[str] = []
    for position, surface in enumerate(tokens):
        if surface not in key.vocab:
            raise DecodeError(f"token not in key vocabulary: {surface!r}", position)
        try:
            block = key.bin_of_index(key.vocab.index_of(surface))
        except KeyInvariantError:
            raise DecodeError(f"token carries no bin: {surface!r}", position) from None
        if block is COMMON:
            continue
        pieces.append(block.bits)
    bits = "".join(pieces)
    if framing is Framing.RAW:
        return bits
    if len(bits) < LENGTH_HEADER_BITS:
        raise DecodeError(
            f"only {len(bits)} bits decoded; the {LENGTH_HEADER_BITS}-bit length header is incomplete"
        )
    declared = int(bits[:LENGTH_HEADER_BITS], 2)
    if LENGTH_HEADER_BITS + declared > len(bits):
        raise DecodeError(
            f"header declares {declared} payload bits but only "
            f"{len(bits) - LENGTH_HEADER_BITS} are present"
        )
    return bits[LENGTH_HEADER_BITS:LENGTH_HEADER_BITS + declared]


def decode_payload(tokens, key: StegoKey) -> bytes:
    """Recover the exact byte payload of a LENGTH-framed encoding."""
    bits = decode(tokens, key, Framing.LENGTH_PREFIXED)
    if len(bits) % 8:
        raise DecodeError(f"declared payload of {len(bits)} bits is not byte-aligned")
    return bits_to_bytes(bits)


def render(tokens, options: RenderOptions = RenderOptions()) -> str:
    """Join tokens into a surface string.

    Punctuation in ``.,!?;:`` attaches to the previous word; ``<user>`` and
    ``<url>`` are substituted (supplied values first, deterministic mocks
    after); ``<eos>`` is a boundary marker and renders as nothing. Purely
    presentational: decoding consumes the token sequence, not this string.
    """
    words: list[str] = []
    users = urls = 0
    attachable = False  # punctuation never glues onto a substituted mention/URL
    for surface in tokens:
        if surface == EOS_TOKEN:
            continue
        substituted = False
        if surface == USER_TOKEN:
            surface = options.user_mock(users)
            users += 1
            substituted = True
        elif surface == URL_TOKEN:
            surface = options.url_mock(urls)
            urls += 1
            substituted = True
        if surface in _NO_SPACE_BEFORE and words and attachable:
            words[-1] += surface
        else:
            words.append(surface)
        attachable = not substituted
    if options.capitalize:
        sentence_start = True
        for i, word in enumerate(words):
            if sentence_start and word[0].isalpha():
                words[i] = word[0].upper() + word[1:]
                sentence_start = False
            if word[-1] in ".!?":
                sentence_start = True
    return " ".join(words)
