"""Deterministic keyed derivation of tag positions and tag bits.

Both sides of the link derive, from the message codeword and a pre-shared
128-bit key, (a) the sorted set of positions that carry the embedded tag and
(b) the tag bitstream itself.  The two derivations are domain separated so
learning one reveals nothing about the other.

The mixing primitive is the SplitMix64 finalizer over 64-bit message chunks.
It is a fully specified non-cryptographic keyed PRF: simulations stay
reproducible bit-for-bit across implementations, and the statistical
properties the analysis relies on (marginal uniformity of positions,
unbiased tag bits, key avalanche) hold and are tested.  A deployment would
swap in a keyed cryptographic hash behind the same interface.

Position selection uses a partial Fisher-Yates draw (exactly ``n_e`` swaps),
so the number of PRF words consumed is fixed and golden vectors are simple.
All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
# ascii "pos-indx" / "tag-bits": domain separation constants
_DOMAIN_POS = _U64(0x706F732D696E6478)
_DOMAIN_TAG = _U64(0x7461672D62697473)

KEY_BYTES = 16


class KeyedIndexError(ValueError):
    """Invalid argument to a keyed derivation."""


@dataclass(frozen=True)
class SecretKey:
    """Opaque 128-bit pre-shared key, compared only for equality."""

    value: bytes

    def __post_init__(self):
        if len(self.value) != KEY_BYTES:
            raise KeyedIndexError(f"key must be {KEY_BYTES} bytes, got {len(self.value)}")

    @classmethod
    def from_hex(cls, text: str) -> "SecretKey":
        return cls(bytes.fromhex(text))

    @classmethod
    def from_int(cls, value: int) -> "SecretKey":
        return cls(int(value).to_bytes(KEY_BYTES, "little"))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SecretKey":
        return cls(rng.bytes(KEY_BYTES))

    def hex(self) -> str:
        return self.value.hex()

    def words(self) -> tuple[np.uint64, np.uint64]:
        lo = int.from_bytes(self.value[:8], "little")
        hi = int.from_bytes(self.value[8:], "little")
        return _U64(lo), _U64(hi)


@dataclass
class IndexSet:
    """Strictly increasing 0-based positions into a length-n message."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.n):
            raise KeyedIndexError("indices must be strictly increasing within [0, n)")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def first(self, count: int) -> np.ndarray:
        return self.indices[:count]

    def complement(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.indices] = False
        return np.nonzero(mask)[0]


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, element-wise over uint64 arrays (mod 2^64)."""
    with np.errstate(over="ignore"):
        z = z ^ (z >> _U64(30))
        z = z * _MIX1
        z = z ^ (z >> _U64(27))
        z = z * _MIX2
        return z ^ (z >> _U64(31))


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (B, n) bit matrix into (B, ceil(n/64)) uint64 chunks.

    Bit j of a chunk is message bit 64*c + j (LSB first); the tail chunk is
    zero padded.
    """
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    b, n = bits.shape
    pad = (-n) % 64
    if pad:
        bits = np.concatenate([bits, np.zeros((b, pad), dtype=np.uint8)], axis=1)
    weights = (_U64(1) << np.arange(64, dtype=np.uint64))
    chunks = bits.reshape(b, -1, 64).astype(np.uint64) * weights
    return chunks.sum(axis=2, dtype=np.uint64)


def _absorb(domain: np.uint64, key: SecretKey, msg_bits: np.ndarray) -> np.ndarray:
    """Derive one 64-bit seed per message row.

    Word sequence: key low word, key high word, message chunks, bit length.
    Each word is xored into the state together with a position-dependent
    offset and passed through the finalizer.
    """
    msg_bits = np.atleast_2d(np.asarray(msg_bits, dtype=np.uint8))
    b, n = msg_bits.shape
    k_lo, k_hi = key.words()
    chunks = _pack_bits(msg_bits)
    state = np.full(b, _mix(np.array(domain)), dtype=np.uint64)
    words = [np.full(b, k_lo, dtype=np.uint64), np.full(b, k_hi, dtype=np.uint64)]
    words.extend(chunks[:, c] for c in range(chunks.shape[1]))
    words.append(np.full(b, _U64(n), dtype=np.uint64))
    with np.errstate(over="ignore"):
        for i, w in enumerate(words):
            state = _mix(state ^ w ^ (_U64(i + 1) * _GOLDEN))
    return state


def _stream_word(seed: np.ndarray, counter: int) -> np.ndarray:
    """Counter-mode word expansion of a seed array."""
    with np.errstate(over="ignore"):
        return _mix(seed + _U64(counter + 1) * _GOLDEN)


def gen_pos_batch(msgs: np.ndarray, key: SecretKey, n_e: int) -> np.ndarray:
    """Vectorized gen_pos over a batch of messages; returns (B, n_e) sorted."""
    msgs = np.atleast_2d(np.asarray(msgs, dtype=np.uint8))
    b, n = msgs.shape
    if not 1 <= n_e <= n:
        raise KeyedIndexError(f"n_e must be in [1, {n}], got {n_e}")
    seeds = _absorb(_DOMAIN_POS, key, msgs)
    perm = np.broadcast_to(np.arange(n, dtype=np.int64), (b, n)).copy()
    rows = np.arange(b)
    for j in range(n_e):
        r = (_stream_word(seeds, j) % _U64(n - j)).astype(np.int64)
        other = j + r
        pj = perm[rows, j].copy()
        perm[rows, j] = perm[rows, other]
        perm[rows, other] = pj
    return np.sort(perm[:, :n_e], axis=1)


def gen_pos(msg: np.ndarray, key: SecretKey, n_e: int) -> IndexSet:
    """Keyed selection of n_e distinct tag positions in [0, n).

    Deterministic in (msg, key, n_e): the seed absorbs the key and the full
    message, and a partial Fisher-Yates draw picks the positions.  Output is
    sorted ascending.
    """
    msg = np.asarray(msg, dtype=np.uint8)
    idx = gen_pos_batch(msg[None, :], key, n_e)[0]
    return IndexSet(idx, len(msg))


def gen_tag_batch(msgs: np.ndarray, key: SecretKey, tag_len: int) -> np.ndarray:
    """Vectorized gen_tag over a batch of messages; returns (B, tag_len)."""
    msgs = np.atleast_2d(np.asarray(msgs, dtype=np.uint8))
    if tag_len < 1:
        raise KeyedIndexError(f"tag_len must be >= 1, got {tag_len}")
    seeds = _absorb(_DOMAIN_TAG, key, msgs)
    n_words = (tag_len + 63) // 64
    words = np.stack([_stream_word(seeds, j) for j in range(n_words)], axis=1)
    shifts = np.arange(64, dtype=np.uint64)
    bits = ((words[:, :, None] >> shifts) & _U64(1)).astype(np.uint8)
    return bits.reshape(len(seeds), 64 * n_words)[:, :tag_len]


def gen_tag(msg: np.ndarray, key: SecretKey, tag_len: int) -> np.ndarray:
    """Keyed tag bitstream of length tag_len, domain separated from gen_pos."""
    msg = np.asarray(msg, dtype=np.uint8)
    return gen_tag_batch(msg[None, :], key, tag_len)[0]


def format_golden_row(key: SecretKey, msg: np.ndarray, n_e: int, tag_len: int) -> str:
    """One row of the golden-vector file: ``key_hex msg_hash n_e : i... | tag_hex``."""
    msg = np.asarray(msg, dtype=np.uint8)
    msg_hash = int(_absorb(_U64(0), key, msg)[0])
    idx = gen_pos(msg, key, n_e)
    tag = gen_tag(msg, key, tag_len)
    tag_packed = np.packbits(tag, bitorder="little").tobytes()
    return (
        f"{key.hex()} {msg_hash:016x} {n_e} : "
        + " ".join(str(i) for i in idx.indices)
        + " | "
        + tag_packed.hex()
    )
