"""Bit-string search space and seeded random streams.

Bit strings are packed into Python ints: logical position ``i`` (1-based,
leftmost in the text form) lives in bit ``i - 1``.  The hot loops of the
simulators work on these raw ints; :class:`BitString` is the immutable
public wrapper.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BitString",
    "RngStream",
    "derive_stream",
    "hamming_distance",
    "popcount",
    "full_mask",
]

_MASK64 = (1 << 64) - 1
_KEY = struct.Struct("<QQQ")
_WORDS = struct.Struct("<8Q")
_TWO_M53 = 2.0**-53


def popcount(x: int) -> int:
    return x.bit_count() if hasattr(x, "bit_count") else bin(x).count("1")


def full_mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class BitString:
    """A point of {0,1}^n.

    ``bits`` is the packed value; bit ``i - 1`` holds position ``i``.
    """

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("BitString needs n >= 1")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits do not fit into n={self.n} positions")

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(len(text), bits)

    @classmethod
    def from_iterable(cls, values) -> "BitString":
        values = list(values)
        bits = 0
        for i, v in enumerate(values):
            if v not in (0, 1, True, False):
                raise ValueError(f"non-binary value {v!r} at position {i + 1}")
            if v:
                bits |= 1 << i
        return cls(len(values), bits)

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls(n, full_mask(n))

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    @classmethod
    def uniform(cls, n: int, rng: "RngStream") -> "BitString":
        return cls(n, rng.getrandbits(n))

    def ones_count(self) -> int:
        return popcount(self.bits)

    def flip(self, position: int) -> "BitString":
        """Return a copy with the 1-based ``position`` flipped."""
        if not 1 <= position <= self.n:
            raise IndexError(position)
        return BitString(self.n, self.bits ^ (1 << (position - 1)))

    def __getitem__(self, position: int) -> int:
        if not 1 <= position <= self.n:
            raise IndexError(position)
        return (self.bits >> (position - 1)) & 1

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return (((self.bits >> i) & 1) for i in range(self.n))

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))


def hamming_distance(x: BitString, y: BitString) -> int:
    """Number of positions in which ``x`` and ``y`` disagree."""
    if x.n != y.n:
        raise ValueError("dimension mismatch")
    return popcount(x.bits ^ y.bits)


class RngStream:
    """Deterministic random stream keyed by ``(master_seed, stream_index)``.

    Both generators below are counter-based and keyed by the pair, so
    stream ``i`` never depends on how many other streams were used before
    it.  The first :attr:`_HASH_BLOCKS` blocks of eight uniforms come from
    BLAKE2b over ``(seed, index, counter)``, which is cheap to start; after
    that the stream switches to Philox with the 128-bit key
    ``stream_index << 64 | master_seed`` and geometrically growing buffers,
    which is cheap per draw.  Short runs (the common case for tiny ``n``)
    never pay for building the Philox state.

    :meth:`numpy` returns a vectorised Philox generator on a counter range
    disjoint from the scalar one.  A stream must only be used by one task
    at a time.
    """

    __slots__ = (
        "master_seed", "stream_index", "_gen", "_buf", "_pos", "_block", "_hashed", "_np",
    )

    _HASH_BLOCKS = 4
    _MAX_BLOCK = 8192

    def __init__(self, master_seed: int, stream_index: int):
        if stream_index < 0:
            raise ValueError("stream_index must be >= 0")
        self.master_seed = int(master_seed) & _MASK64
        self.stream_index = int(stream_index) & _MASK64
        self._gen = None
        self._buf: list[float] = []
        self._pos = 0
        self._block = 64
        self._hashed = 0
        self._np = None

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    @property
    def key(self) -> int:
        return (self.stream_index << 64) | self.master_seed

    def _refill(self) -> None:
        self._pos = 0
        if self._hashed < self._HASH_BLOCKS:
            digest = hashlib.blake2b(
                _KEY.pack(self.master_seed, self.stream_index, self._hashed)
            ).digest()
            self._buf = [(v >> 11) * _TWO_M53 for v in _WORDS.unpack(digest)]
            self._hashed += 1
            return
        if self._gen is None:
            self._gen = np.random.Generator(np.random.Philox(key=self.key))
        self._buf = self._gen.random(self._block).tolist()
        if self._block < self._MAX_BLOCK:
            self._block *= 2

    def random(self) -> float:
        """Uniform draw from [0, 1)."""
        pos = self._pos
        if pos >= len(self._buf):
            self._refill()
            pos = 0
        self._pos = pos + 1
        return self._buf[pos]

    def randrange(self, n: int) -> int:
        """Uniform integer from [0, n)."""
        return int(self.random() * n)

    def getrandbits(self, k: int) -> int:
        out = 0
        shift = 0
        while shift < k:
            # each uniform is a multiple of 2**-53; keep 32 of its bits
            chunk = int(self.random() * 9007199254740992.0) >> 21
            out |= chunk << shift
            shift += 32
        return out & ((1 << k) - 1)

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = 1.0 - self.random()
        u2 = self.random()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def bit_mask(self, n: int, rate: float) -> int:
        """Mask of ``n`` bits, each set independently with probability ``rate``.

        Uses geometric gap sampling, so the cost is proportional to
        ``min(rate, 1 - rate) * n`` draws instead of ``n``.
        """
        if rate <= 0.0:
            return 0
        if rate >= 1.0:
            return (1 << n) - 1
        if rate > 0.5:
            return ((1 << n) - 1) ^ self.bit_mask(n, 1.0 - rate)
        log_q = math.log1p(-rate)
        mask = 0
        pos = -1
        while True:
            pos += 1 + int(math.log(1.0 - self.random()) / log_q)
            if pos >= n:
                return mask
            mask |= 1 << pos

    def child(self, index: int) -> "RngStream":
        """Derive an independent sub-stream (e.g. one per level of a sweep)."""
        seed = int(self.random() * 9007199254740992.0)
        return RngStream(seed, index)

    def numpy(self) -> np.random.Generator:
        """Vectorised generator on a counter range disjoint from the scalar buffer."""
        if self._np is None:
            self._np = np.random.Generator(
                np.random.Philox(key=self.key, counter=[0, 0, 0, 1 << 63])
            )
        return self._np


def derive_stream(master_seed: int, stream_index: int) -> RngStream:
    return RngStream(master_seed, stream_index)
