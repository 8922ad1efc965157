"""Shared-key generation: a seeded random partition of the vocabulary.

A key splits the carrier vocabulary (everything except ``<eos>`` and
``<unk>``) into ``2**block_bits`` bins, one bin per possible bit block, plus
an optional set of *common* tokens that belong to no bin and carry no bits.
Common tokens are always the most frequent tokens of the vocabulary; they are
removed from the carrier pool entirely so decoding stays unambiguous.

Both parties regenerate the identical key from (vocabulary, block_bits,
common_count, seed): the carrier pool is shuffled by a Fisher-Yates pass
driven by a splitmix64 generator (fixed for the life of the ``STEGOKEY v1``
format, independent of Python/numpy versions) and dealt round-robin into the
bins, so bin sizes never differ by more than one.

``block_bits = 0`` yields the degenerate single-bin key: generation is then
unconstrained and the key carries no payload (``codec.encode`` rejects it).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EOS_TOKEN, RESERVED_NONCARRIERS, UNK_TOKEN, Vocabulary
from .errors import KeyFormatError, KeyGenError, KeyInvariantError, VocabMismatchError

KEY_HEADER = "STEGOKEY v1"
MAX_BLOCK_BITS = 16


@dataclass(frozen=True)
class BitBlock:
    """A group of ``width`` payload bits; leftmost bit is most significant."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("bit block width must be non-negative")
        if not 0 <= self.value < (1 << self.width) and not (self.width == 0 and self.value == 0):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @property
    def bits(self) -> str:
        return format(self.value, f"0{self.width}b") if self.width else ""

    @classmethod
    def from_bits(cls, bits: str) -> "BitBlock":
        return cls(int(bits, 2) if bits else 0, len(bits))


class _CommonMarker:
    def __repr__(self) -> str:
        return "COMMON"


#: Returned by bin_of_token for tokens of the common set (they carry no bits).
COMMON = _CommonMarker()

_BIN_RESERVED = -1
_BIN_COMMON = -2


class _SplitMix64:
    """Tiny deterministic generator; its stream is part of the key format."""

    def __init__(self, seed: int):
        self._state = seed & 0xFFFFFFFFFFFFFFFF

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        # Rejection sampling keeps the draw unbiased.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class StegoKey:
    """Bit-block -> token-bin mapping shared by sender and receiver."""

    block_bits: int
    bins: tuple[tuple[int, ...], ...]
    common: tuple[int, ...]
    vocab_hash: str
    seed: int
    vocab: Vocabulary

    def __post_init__(self):
        lookup = self._build_lookup()
        object.__setattr__(self, "_bin_of", lookup)
        object.__setattr__(self, "_common_set", frozenset(self.common))
        object.__setattr__(self, "_lookup_array", None)

    def _build_lookup(self) -> list[int]:
        size = len(self.vocab)
        if len(self.bins) != 1 << self.block_bits:
            raise KeyInvariantError(
                f"expected {1 << self.block_bits} bins, found {len(self.bins)}"
            )
        lookup = [_BIN_RESERVED] * size
        reserved = {
            self.vocab.index_of(t) for t in RESERVED_NONCARRIERS if t in self.vocab
        }
        # <eos> may join the common set (lets generation end messages); <unk> never.
        unk_index = self.vocab.index_of(UNK_TOKEN) if UNK_TOKEN in self.vocab else None
        for idx in self.common:
            self._check_index(idx, size)
            if idx == unk_index:
                raise KeyInvariantError(f"{UNK_TOKEN} can never join the common set")
            if lookup[idx] != _BIN_RESERVED:
                raise KeyInvariantError(f"token assigned twice: {self.vocab.token(idx)!r}")
            lookup[idx] = _BIN_COMMON
        for bin_index, members in enumerate(self.bins):
            for idx in members:
                self._check_index(idx, size)
                if idx in reserved:
                    raise KeyInvariantError(
                        f"reserved sentinel in bin {bin_index}: {self.vocab.token(idx)!r}"
                    )
                if lookup[idx] != _BIN_RESERVED:
                    raise KeyInvariantError(f"token assigned twice: {self.vocab.token(idx)!r}")
                lookup[idx] = bin_index
        uncovered = [
            i for i, b in enumerate(lookup) if b == _BIN_RESERVED and i not in reserved
        ]
        if uncovered:
            raise KeyInvariantError(
                f"{len(uncovered)} carrier tokens missing from every bin, e.g. "
                f"{self.vocab.token(uncovered[0])!r}"
            )
        sizes = [len(members) for members in self.bins]
        if max(sizes) - min(sizes) > 1:
            raise KeyInvariantError(f"bin sizes differ by more than one: {sizes}")
        if self.vocab.content_hash() != self.vocab_hash:
            raise VocabMismatchError("key vocab_hash does not match the bound vocabulary")
        return lookup

    @staticmethod
    def _check_index(idx: int, size: int) -> None:
        if not 0 <= idx < size:
            raise KeyInvariantError(f"token index out of range: {idx}")

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    @property
    def common_set(self) -> frozenset[int]:
        return self._common_set

    def lookup_array(self) -> np.ndarray:
        """Per-index assignment as an int array: bin index, -2 common, -1 reserved."""
        if self._lookup_array is None:
            object.__setattr__(
                self, "_lookup_array", np.asarray(self._bin_of, dtype=np.int64)
            )
        return self._lookup_array

    def carrier_count(self) -> int:
        return sum(len(members) for members in self.bins)

    def bin_of_index(self, token_index: int) -> BitBlock | _CommonMarker:
        """Bit block of a carrier token, COMMON for common tokens, error otherwise."""
        if not 0 <= token_index < len(self.vocab):
            raise KeyInvariantError(f"token index out of range: {token_index}")
        slot = self._bin_of[token_index]
        if slot == _BIN_COMMON:
            return COMMON
        if slot == _BIN_RESERVED:
            raise KeyInvariantError(
                f"token carries no bin: {self.vocab.token(token_index)!r}"
            )
        return BitBlock(slot, self.block_bits)

    def bin_of_token(self, surface: str) -> BitBlock | _CommonMarker:
        return self.bin_of_index(self.vocab.index_of(surface))


def generate_key(
    vocab: Vocabulary,
    block_bits: int,
    common_count: int,
    seed: int,
    *,
    include_eos_common: bool = False,
    max_block_bits: int = MAX_BLOCK_BITS,
) -> StegoKey:
    """Deterministically derive a key from (vocab, block_bits, common_count, seed).

    The common set is the ``common_count`` most frequent non-sentinel tokens;
    ``include_eos_common`` additionally adds ``<eos>`` so generated messages
    may end naturally.
    """
    if block_bits < 0 or block_bits > max_block_bits:
        raise KeyGenError(f"block_bits must be in [0, {max_block_bits}], got {block_bits}")
    if common_count < 0:
        raise KeyGenError("common_count must be non-negative")
    num_bins = 1 << block_bits
    if common_count + num_bins > len(vocab):
        raise KeyGenError(
            f"common_count={common_count} plus {num_bins} bins exceeds |V|={len(vocab)}"
        )
    reserved = {vocab.index_of(t) for t in RESERVED_NONCARRIERS if t in vocab}
    eligible = [i for i in range(len(vocab)) if i not in reserved]
    if common_count > len(eligible):
        raise KeyGenError("not enough non-sentinel tokens for the requested common set")
    common = list(eligible[:common_count])
    if include_eos_common and EOS_TOKEN in vocab:
        common.append(vocab.index_of(EOS_TOKEN))
    carriers = eligible[common_count:]
    if len(carriers) < num_bins:
        raise KeyGenError(
            f"only {len(carriers)} carrier tokens left for {num_bins} bins"
        )
    _SplitMix64(seed).shuffle(carriers)
    bins: list[list[int]] = [[] for _ in range(num_bins)]
    for position, idx in enumerate(carriers):
        bins[position % num_bins].append(idx)
    return StegoKey(
        block_bits=block_bits,
        bins=tuple(tuple(sorted(members)) for members in bins),
        common=tuple(sorted(common)),
        vocab_hash=vocab.content_hash(),
        seed=seed,
        vocab=vocab,
    )


def serialize_key(key: StegoKey) -> bytes:
    lines = [
        KEY_HEADER,
        f"block_bits: {key.block_bits}",
        f"vocab_hash: {key.vocab_hash}",
        f"seed: {key.seed}",
        "common:" + "".join(f"\t{key.vocab.token(i)}" for i in key.common),
    ]
    for bin_index, members in enumerate(key.bins):
        label = format(bin_index, f"0{key.block_bits}b") if key.block_bits else "0"
        lines.append(f"bin {label}:" + "".join(f"\t{key.vocab.token(i)}" for i in members))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_header_line(line: str, prefix: str) -> str:
    if not line.startswith(prefix):
        raise KeyFormatError(f"expected {prefix!r} line, found {line!r}")
    return line[len(prefix):].strip()


def deserialize_key(data: bytes, vocab: Vocabulary) -> StegoKey:
    """Parse and validate a key file against the vocabulary it was built from."""
    lines = data.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 6:
        raise KeyFormatError("key file too short")
    if lines[0] != KEY_HEADER:
        raise KeyFormatError(f"missing {KEY_HEADER!r} header")
    try:
        block_bits = int(_parse_header_line(lines[1], "block_bits:"))
        vocab_hash = _parse_header_line(lines[2], "vocab_hash:")
        seed = int(_parse_header_line(lines[3], "seed:"))
    except ValueError as exc:
        raise KeyFormatError(f"bad header field: {exc}") from None
    if vocab_hash != vocab.content_hash():
        raise VocabMismatchError("key was generated from a different vocabulary")

    def surfaces_to_indices(line: str, prefix: str) -> tuple[int, ...]:
        rest = _parse_header_line(line, prefix)
        if not rest:
            return ()
        out = []
        for surface in rest.split("\t"):
            if surface not in vocab:
                raise KeyFormatError(f"key token not in vocabulary: {surface!r}")
            out.append(vocab.index_of(surface))
        return tuple(out)

    common = surfaces_to_indices(lines[4], "common:")
    expected_bins = 1 << block_bits if block_bits >= 0 else -1
    bin_lines = lines[5:]
    if block_bits < 0 or len(bin_lines) != expected_bins:
        raise KeyFormatError(
            f"expected {expected_bins} bin lines for block_bits={block_bits}, "
            f"found {len(bin_lines)}"
        )
    bins = []
    for bin_index, line in enumerate(bin_lines):
        label = format(bin_index, f"0{block_bits}b") if block_bits else "0"
        bins.append(surfaces_to_indices(line, f"bin {label}:"))
    return StegoKey(
        block_bits=block_bits,
        bins=tuple(bins),
        common=common,
        vocab_hash=vocab_hash,
        seed=seed,
        vocab=vocab,
    )


def save_key(key: StegoKey, path: str | Path) -> None:
    Path(path).write_bytes(serialize_key(key))


def load_key(path: str | Path, vocab: Vocabulary) -> StegoKey:
    return deserialize_key(Path(path).read_bytes(), vocab)
