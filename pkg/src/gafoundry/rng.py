"""Counter-based random streams with cross-platform bit reproducibility.

Every stochastic component draws from an :class:`RngStream` identified by a
``(master_seed, stream_id)`` pair.  The generator is SplitMix64: the state
walks a Weyl sequence (a fixed odd increment per draw) and each output is the
SplitMix64 finalizer of the state.  All state arithmetic is unsigned 64-bit
with wraparound, so the scalar (Python int) and vectorized (numpy uint64)
paths produce identical bits on every platform.

Stream derivation hashes the pair through finalizer rounds::

    origin(seed, stream) = mix64(mix64(seed) ^ mix64(stream ^ STREAM_SALT))

Distinct stream ids therefore start at pseudo-random, mutually uncorrelated
points of the Weyl orbit.  A stream is owned by exactly one run at a time;
parallel work gets one stream per run, never a shared one.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Weyl increment and finalizer multipliers of SplitMix64.
_WEYL = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Arbitrary odd salts separating the stream-id and child-id hashing domains.
_STREAM_SALT = 0x6A09E667F3BCC909
_CHILD_SALT = 0xB5297A4D3C2DA6D1

_INV_2POW53 = 2.0**-53


def _mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit unsigned integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """One reproducible random stream, addressed by (master_seed, stream_id).

    Identical pairs yield identical sequences; distinct stream ids yield
    statistically independent sequences.  The object is mutable (the state
    advances with every draw) and must not be shared between concurrent runs.
    """

    __slots__ = ("master_seed", "stream_id", "_state")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed & MASK64
        self.stream_id = stream_id & MASK64
        self._state = _mix64(
            _mix64(self.master_seed) ^ _mix64(self.stream_id ^ _STREAM_SALT)
        )

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def substream(self, child_id: int) -> "RngStream":
        """Derive an independent child stream.

        The child id is hashed together with this stream's id, so distinct
        (parent, child) pairs map to distinct streams under the same master
        seed.  Deriving does not advance this stream's state.
        """
        derived = _mix64(self.stream_id ^ _mix64((child_id & MASK64) ^ _CHILD_SALT))
        return RngStream(self.master_seed, derived)

    def next_u64(self) -> int:
        s = (self._state + _WEYL) & MASK64
        self._state = s
        return _mix64(s)

    def random(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * _INV_2POW53

    def randint_below(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection sampling."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        limit = MASK64 + 1 - ((MASK64 + 1) % bound)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def u64_array(self, count: int) -> np.ndarray:
        """Vectorized draw of `count` words, identical to `count` next_u64 calls."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(self._state) + steps * np.uint64(_WEYL)
        self._state = (self._state + count * _WEYL) & MASK64
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
        return z

    def random_array(self, count: int) -> np.ndarray:
        """Vectorized uniform floats in [0, 1), matching repeated random() calls."""
        return (self.u64_array(count) >> np.uint64(11)).astype(np.float64) * _INV_2POW53
