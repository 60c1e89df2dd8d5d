"""Splittable deterministic randomness.

Every sampler in the package consumes 64-bit states that are pure functions
of (seed, trial, position).  Results are therefore reproducible bit-for-bit,
and trials can be generated independently, in any order, across processes.

Labels are 64-bit unsigned integers interpreted as dyadic rationals in
[0, 1).  Comparisons between labels break the (probability ~2^-64) ties with
a secondary vertex key, so the effective label order is always total.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# substream tags used by the lazy tree machinery
LABEL_TAG = 0x01
PERC_TAG = 0x02
OFFSPRING_TAG = 0x03
CHILD_TAG = 0x100


def mix64(z: int) -> int:
    """SplitMix64 finalizer, a bijective 64-bit mixer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fold(state: int, data: int) -> int:
    """Derive a child state from a state and an integer tag."""
    return mix64((state ^ mix64((data + GOLDEN) & MASK64)) & MASK64)


def trial_state(seed: int, trial: int) -> int:
    """64-bit state for one Monte Carlo trial of a run keyed by `seed`."""
    return fold(fold(0x5EED5EED5EED5EED, seed), trial)


def state_rng(state: int) -> np.random.Generator:
    """NumPy generator keyed by a 64-bit state."""
    return np.random.default_rng(state & MASK64)


def uniform_labels(rng: np.random.Generator, n: int) -> np.ndarray:
    """n labels drawn uniformly from {0, ..., 2^64 - 1}."""
    return rng.integers(0, 1 << 64, size=n, dtype=np.uint64)


def label_unit(label):
    """Map 64-bit labels (scalar or array) to dyadic rationals in [0, 1)."""
    if isinstance(label, np.ndarray):
        return label.astype(np.float64) * 2.0**-64
    return int(label) * 2.0**-64


def percolation_cut(p: float) -> int:
    """Integer threshold t with P(label < t) = p, up to 2^-64 quantisation."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"percolation density must lie in [0, 1], got {p}")
    return int(round(p * 2.0**64))


def first_success_round(label: int, p: float) -> int:
    """Index >= 1 of the first success in a Bernoulli(p) round sequence.

    The round is a deterministic function of the single 64-bit label via the
    geometric inverse CDF, so P(round = i) = (1-p)^(i-1) * p exactly.
    """
    if p >= 1.0:
        return 1
    if p <= 0.0:
        return 1 << 62
    u = label * 2.0**-64
    if u < p:
        return 1
    return 1 + int(math.log1p(-u) / math.log1p(-p))


def poisson_from_unit(u: float, lam: float) -> int:
    """Poisson(lam) sample from one uniform in [0, 1) via inverse CDF.

    Exact up to float accumulation; intended for lam up to a few hundred
    (e^-lam must not underflow).
    """
    if lam > 600.0:
        raise ValueError("inverse-CDF Poisson sampling supports lam <= 600")
    pmf = math.exp(-lam)
    cdf = pmf
    j = 0
    cap = int(lam + 12.0 * math.sqrt(lam) + 30.0)
    while u >= cdf and j < cap:
        j += 1
        pmf *= lam / j
        cdf += pmf
    return j


_NP_M1 = np.uint64(0xBF58476D1CE4E5B9)
_NP_M2 = np.uint64(0x94D049BB133111EB)


def mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorised SplitMix64 finalizer over a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _NP_M1
    z ^= z >> np.uint64(27)
    z *= _NP_M2
    z ^= z >> np.uint64(31)
    return z
