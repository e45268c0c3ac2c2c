"""Fixed-length binary genotypes and the k-bit-flip primitive.

BitString is an immutable value: length and contents are frozen at
construction, so instances can be shared freely across runs and threads.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .rng import RngStream


class BitString:
    """Immutable sequence of bits, each exactly 0 or 1, length >= 1."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int]):
        arr = np.array(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be a one-dimensional sequence")
        if arr.size < 1:
            raise ValueError("bit strings must have length >= 1")
        if not bool(np.all(arr <= 1)):
            raise ValueError("every element must be 0 or 1")
        arr.flags.writeable = False
        self._bits = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BitString":
        # Trusted fast path: takes ownership of a fresh 0/1 uint8 array.
        obj = object.__new__(cls)
        arr.flags.writeable = False
        obj._bits = arr
        return obj

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        """Parse the compact text form, e.g. "10110"."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        return cls._wrap(np.frombuffer(text.encode("ascii"), dtype=np.uint8).copy() - ord("0"))

    @property
    def bits(self) -> np.ndarray:
        """Read-only uint8 view of the bits, index 0 first."""
        return self._bits

    def __len__(self) -> int:
        return self._bits.size

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i])

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._bits.size == other._bits.size and bool(
            np.array_equal(self._bits, other._bits)
        )

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self._bits.tolist())

    def __repr__(self) -> str:
        return f"BitString({str(self)!r})"


def uniform_bitstring(n: int, rng: RngStream) -> BitString:
    """Sample a length-n string with each bit independently 1 with probability 1/2."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    bits = (rng.u64_array(n) >> np.uint64(63)).astype(np.uint8)
    return BitString._wrap(bits)


def sample_without_replacement(n: int, k: int, rng: RngStream) -> np.ndarray:
    """k distinct indices from [0, n), uniform over ordered k-tuples.

    Partial Fisher-Yates over an index array: O(n) memory, O(k) swaps, exact
    without-replacement semantics for every k up to n.  Large k draws its
    swap offsets as one vectorized block; the unbiased-rejection rule is the
    same either way, so every offset is exactly uniform on its range.
    """
    if not 0 <= k <= n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    idx = list(range(n))
    if k <= 16:
        for i in range(k):
            j = i + rng.randint_below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return np.asarray(idx[:k], dtype=np.int64)
    from .rng import MASK64

    bounds = np.uint64(n) - np.arange(k, dtype=np.uint64)  # n, n-1, ..., n-k+1
    words = rng.u64_array(k)
    # words > MASK64 - (2**64 % bound) marks the biased tail zone; a power-of-
    # two bound has an empty zone and the comparison is then never true.
    wraps = ((np.uint64(MASK64) % bounds) + np.uint64(1)) % bounds
    offsets = (words % bounds).tolist()
    for pos in np.nonzero(words > np.uint64(MASK64) - wraps)[0].tolist():
        offsets[pos] = rng.randint_below(int(bounds[pos]))
    for i in range(k):
        j = i + offsets[i]
        idx[i], idx[j] = idx[j], idx[i]
    return np.asarray(idx[:k], dtype=np.int64)


def flip_k(x: BitString, k: int, rng: RngStream) -> BitString:
    """Flip exactly k distinct positions of x, chosen uniformly at random.

    The result is always at Hamming distance k from x; k=0 returns x itself
    and k=n the bitwise complement.
    """
    n = len(x)
    if not 0 <= k <= n:
        raise ValueError(f"flip strength {k} outside [0, {n}]")
    if k == 0:
        return x
    positions = sample_without_replacement(n, k, rng)
    out = x.bits.copy()
    out[positions] ^= 1
    return BitString._wrap(out)


def hamming(x: BitString, y: BitString) -> int:
    """Number of positions where x and y differ; lengths must match."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return int(np.count_nonzero(x.bits != y.bits))
