"""W-model pseudo-Boolean benchmark problems.

OneMax is made harder by three composable layers: neutrality (majority vote
over blocks of size mu), epistasis (a blockwise bijection that amplifies
single-bit changes to at least nu-1 output changes), and ruggedness (a
deterministic permutation of the fitness levels that keeps the optimum
fixed).  A 19-instance benchmark suite covers dimensions 16..256.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .bitstrings import BitString


def onemax(y: BitString) -> int:
    """Number of ones in y."""
    return int(y.bits.sum(dtype=np.int64))


def neutrality(x: BitString, mu: int) -> BitString:
    """Majority-vote reduction of size-mu blocks to single bits.

    Block i maps to 1 iff it holds at least mu/2 ones (ties count as
    majority).  Remainder bits that do not fill a block are copied verbatim,
    so the output length is floor(n/mu) + (n mod mu).
    """
    if mu < 1:
        raise ValueError(f"block size must be >= 1, got {mu}")
    if mu == 1:
        return x
    bits = x.bits
    n = bits.size
    full = n // mu
    head = bits[: full * mu].reshape(full, mu)
    ones = head.sum(axis=1, dtype=np.int64)
    reduced = (2 * ones >= mu).astype(np.uint8)
    if n - full * mu:
        reduced = np.concatenate([reduced, bits[full * mu :]])
    return BitString._wrap(reduced)


def epistasis(y: BitString, nu: int) -> BitString:
    """Blockwise bijective scrambling with parity feedback.

    Each size-nu block with parity S maps to z = S xor y per position, and
    additionally z[0] = S when nu is odd.  This is a bijection on the block
    and maps Hamming-1 neighbours to outputs at distance >= nu-1.  A trailing
    block shorter than nu is mapped with its own size; a single trailing bit
    is left unchanged.
    """
    if nu < 1:
        raise ValueError(f"block size must be >= 1, got {nu}")
    if nu == 1:
        return y
    bits = y.bits
    m = bits.size
    full = m // nu
    rem = m - full * nu
    out = np.empty(m, dtype=np.uint8)
    if full:
        blocks = bits[: full * nu].reshape(full, nu)
        parity = (blocks.sum(axis=1, dtype=np.int64) & 1).astype(np.uint8)
        z = blocks ^ parity[:, None]
        if nu % 2:
            z[:, 0] = parity
        out[: full * nu] = z.ravel()
    if rem == 1:
        out[full * nu :] = bits[full * nu :]
    elif rem:
        tail = bits[full * nu :]
        p = np.uint8(int(tail.sum(dtype=np.int64)) & 1)
        zt = tail ^ p
        if rem % 2:
            zt[0] = p
        out[full * nu :] = zt
    return BitString._wrap(out)


# Top-sweep depth of the transposition sequence: how many of the highest
# levels the near-optimum phase may pull downward before the remaining
# strength switches to scrambling the scale from the bottom up.
_SWEEP_DEPTH = 6


def _pair_sequence(m: int):
    # Phase 1: classes {., b} for the top _SWEEP_DEPTH values of b, nearest
    # the optimum first, a descending within a class.  Phase 2: the remaining
    # classes from the bottom of the scale upward.
    deep = max(m - 1 - _SWEEP_DEPTH, 0)
    for b in range(m - 1, deep, -1):
        for a in range(b - 1, -1, -1):
            yield a, b
    for b in range(1, deep + 1):
        for a in range(b - 1, -1, -1):
            yield a, b


def ruggedness_permutation(gamma: int, v_max: int) -> np.ndarray:
    """Permutation of the fitness levels [0..v_max] at strength gamma.

    The unordered pairs {a, b} of [0..v_max-1] are enumerated in a fixed
    canonical order (first pair {v_max-2, v_max-1}) and the first gamma of
    them are applied as transpositions, in order, to the identity table.
    Level v_max never participates, so the optimum is a fixed point, and
    gamma=0 is the identity.

    The order perturbs the levels nearest the optimum first; after a bounded
    sweep depth the remaining transpositions scramble the scale from the
    bottom upward.  The cap keeps near-optimal values from descending onto
    trivially reachable levels, so instances get harder as gamma grows
    instead of acquiring shortcuts.
    """
    capacity = v_max * (v_max - 1) // 2
    if not 0 <= gamma <= capacity:
        raise ValueError(f"gamma {gamma} outside [0, {capacity}] for v_max {v_max}")
    table = np.arange(v_max + 1, dtype=np.int64)
    done = 0
    for a, b in _pair_sequence(v_max):
        if done == gamma:
            break
        table[a], table[b] = table[b], table[a]
        done += 1
    return table


def ruggedness(v: int, gamma: int, v_max: int) -> int:
    """Permuted fitness level for raw level v in [0..v_max]."""
    if not 0 <= v <= v_max:
        raise ValueError(f"fitness level {v} outside [0, {v_max}]")
    return int(ruggedness_permutation(gamma, v_max)[v])


@dataclass(frozen=True)
class WModelInstance:
    """One benchmark problem: dimension plus layer parameters.

    v_max = floor(n / neutrality_mu) is the maximum fitness, attained e.g. by
    the all-ones string.  Instances are immutable and evaluate() is pure, so
    a single instance can serve unlimited parallel callers.
    """

    fid: int
    n: int
    neutrality_mu: int
    epistasis_nu: int
    ruggedness_gamma: int
    v_max: int = -1

    def __post_init__(self):
        if self.n < 1 or self.neutrality_mu < 1 or self.epistasis_nu < 1:
            raise ValueError("dimension and block sizes must be >= 1")
        if self.ruggedness_gamma < 0:
            raise ValueError("ruggedness strength must be >= 0")
        expected_vmax = self.n // self.neutrality_mu
        if self.v_max == -1:
            object.__setattr__(self, "v_max", expected_vmax)
        elif self.v_max != expected_vmax:
            raise ValueError(
                f"v_max {self.v_max} inconsistent with floor({self.n}/{self.neutrality_mu})"
            )
        if self.epistasis_nu > self.reduced_length:
            raise ValueError(
                f"epistasis block {self.epistasis_nu} exceeds reduced length {self.reduced_length}"
            )
        cap = self.v_max * (self.v_max - 1) // 2
        if self.ruggedness_gamma > cap:
            raise ValueError(f"gamma {self.ruggedness_gamma} exceeds capacity {cap}")

    @property
    def reduced_length(self) -> int:
        """Length after neutrality: floor(n/mu) + (n mod mu)."""
        return self.n // self.neutrality_mu + self.n % self.neutrality_mu

    @cached_property
    def _rugged_table(self) -> np.ndarray:
        return ruggedness_permutation(self.ruggedness_gamma, self.v_max)

    def evaluate(self, x: BitString) -> int:
        """Fitness of x: ruggedness(onemax(epistasis(neutrality(x)))).

        Larger is better; the result is always in [0, v_max].
        """
        if len(x) != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {len(x)}")
        return self._evaluate_bits(x.bits)

    def _evaluate_bits(self, bits: np.ndarray) -> int:
        # Fused layer chain that only tracks ones-counts; per block with
        # parity S the scrambled block holds `s` ones when S=0 and `size-s`
        # (plus the parity bit for odd sizes) when S=1, so the bit vector of
        # the epistasis output never needs to be materialized.
        mu = self.neutrality_mu
        if mu == 1:
            y = bits
        else:
            full = bits.size // mu
            sums = np.add.reduce(bits[: full * mu].reshape(full, mu), axis=1, dtype=np.int64)
            y = 2 * sums >= mu
            if bits.size - full * mu:
                y = np.concatenate([y, bits[full * mu :] != 0])
        nu = self.epistasis_nu
        m = y.size
        if nu == 1:
            v = int(np.add.reduce(y, dtype=np.int64))
        else:
            full = m // nu
            rem = m - full * nu
            v = 0
            if full:
                blocks = y[: full * nu].reshape(full, nu)
                s = np.add.reduce(blocks, axis=1, dtype=np.int64)
                parity = s & 1
                if nu % 2:
                    rest = s - blocks[:, 0]
                    ones = parity + np.where(parity == 1, (nu - 1) - rest, rest)
                else:
                    ones = np.where(parity == 1, nu - s, s)
                v = int(np.add.reduce(ones))
            if rem == 1:
                v += int(y[m - 1])
            elif rem:
                tail = y[full * nu :]
                s_t = int(np.add.reduce(tail, dtype=np.int64))
                parity = s_t & 1
                if rem % 2:
                    rest = s_t - int(tail[0])
                    v += parity + ((rem - 1) - rest if parity else rest)
                else:
                    v += rem - s_t if parity else s_t
        # When mu does not divide n the copied remainder bits can push the
        # ones-count past v_max; cap before the fitness-level permutation.
        if v > self.v_max:
            v = self.v_max
        return int(self._rugged_table[v])


# Benchmark suite: (fid, dim, neutrality_mu, epistasis_nu, ruggedness_gamma).
_SUITE_ROWS = (
    (1, 20, 2, 6, 10),
    (2, 20, 2, 6, 18),
    (3, 16, 1, 5, 72),
    (4, 48, 3, 9, 72),
    (5, 25, 1, 23, 90),
    (6, 32, 1, 2, 397),
    (7, 128, 4, 11, 0),
    (8, 128, 4, 14, 0),
    (9, 128, 4, 8, 128),
    (10, 50, 1, 36, 245),
    (11, 100, 2, 21, 256),
    (12, 150, 3, 16, 613),
    (13, 128, 2, 32, 256),
    (14, 192, 3, 21, 16),
    (15, 192, 3, 21, 256),
    (16, 192, 3, 21, 403),
    (17, 256, 4, 52, 2),
    (18, 75, 1, 60, 16),
    (19, 150, 2, 32, 4),
)

INSTANCES_CSV_HEADER = "fid,dim,neutrality_mu,epistasis_nu,ruggedness_gamma,v_max"


@lru_cache(maxsize=1)
def instances() -> tuple[WModelInstance, ...]:
    """The 19 benchmark instances, ordered by fid."""
    return tuple(WModelInstance(fid, n, mu, nu, gamma) for fid, n, mu, nu, gamma in _SUITE_ROWS)


def instance(fid: int) -> WModelInstance:
    """Look up one suite instance by fid in [1..19]."""
    if not 1 <= fid <= len(_SUITE_ROWS):
        raise ValueError(f"fid {fid} outside [1, {len(_SUITE_ROWS)}]")
    return instances()[fid - 1]


def instances_csv(suite: tuple[WModelInstance, ...] | None = None) -> str:
    """Serialize a suite (default: the built-in one) as CSV text."""
    rows = [INSTANCES_CSV_HEADER]
    for inst in suite or instances():
        rows.append(
            f"{inst.fid},{inst.n},{inst.neutrality_mu},{inst.epistasis_nu},"
            f"{inst.ruggedness_gamma},{inst.v_max}"
        )
    return "\n".join(rows) + "\n"


def parse_instances_csv(text: str) -> list[WModelInstance]:
    """Parse instances from CSV in the instances_csv format.

    The v_max column is validated against floor(dim / neutrality_mu).
    """
    reader = io.StringIO(text)
    header = reader.readline().strip()
    if header != INSTANCES_CSV_HEADER:
        raise ValueError(f"unexpected header: {header!r}")
    out = []
    for lineno, line in enumerate(reader, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            fid, n, mu, nu, gamma, v_max = (int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        out.append(WModelInstance(fid, n, mu, nu, gamma, v_max))
    return out
