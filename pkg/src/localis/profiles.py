"""Exact combinatorics of k-tuples of independent sets.

A k-tuple of vertex subsets induces three linked objects over the subset
lattice of [k] (subsets are dense bitmask-indexed arrays of length 2^k):

  density profile  rho(T) = |intersection of the sets indexed by T| / n,
  partition measure pi(T) = mass of vertices lying in exactly the sets in T,
  edge profile     M(T, T') = fraction of directed edges from cell T to T'.

rho and pi are Moebius duals; M is symmetric, marginalises to pi, and
vanishes on intersecting index pairs (no edge joins two cells sharing an
independent set).  This module provides the transforms, the entropies and
their maximum-entropy bound, the exact expected-count formulas for the
configuration model and the Erdos-Renyi model, their asymptotic rate
decomposition, and exhaustive brute-force oracles for tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graphs import MultiGraph, enumerate_config_graphs


class ProfileError(ValueError):
    """A profile violated one of its structural constraints."""


_NEG_TOL = 1e-12
_MAX_K = 20  # dense 2^k lattices; memory cap


def _check_k(k: int) -> None:
    if not 1 <= k <= _MAX_K:
        raise ProfileError(f"k must lie in 1..{_MAX_K}, got {k}")


def _popcounts(k: int) -> np.ndarray:
    return np.array([bin(m).count("1") for m in range(1 << k)], dtype=np.int64)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityProfile:
    """rho(T) for all T, with rho(empty) = 1 and rho non-increasing under
    superset inclusion."""

    k: int
    rho: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        rho = np.asarray(self.rho, dtype=np.float64)
        object.__setattr__(self, "rho", rho)
        if rho.shape != (1 << self.k,):
            raise ProfileError(f"rho must have 2^{self.k} entries")
        if abs(rho[0] - 1.0) > 1e-12:
            raise ProfileError("rho(empty) must equal 1")
        if np.any(rho < -_NEG_TOL) or np.any(rho > 1 + 1e-12):
            raise ProfileError("rho values must lie in [0, 1]")
        for mask in range(1 << self.k):
            for b in range(self.k):
                if not mask >> b & 1 and rho[mask | 1 << b] > rho[mask] + 1e-12:
                    raise ProfileError(
                        f"rho not monotone under superset at T={mask:#b}"
                    )

    def to_json_dict(self) -> dict:
        return {"k": self.k, "rho": {str(m): float(v) for m, v in enumerate(self.rho)}}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DensityProfile":
        k = int(data["k"])
        rho = np.zeros(1 << k)
        for key, val in data["rho"].items():
            rho[int(key)] = float(val)
        return cls(k, rho)

    @classmethod
    def symmetric(cls, k: int, by_cardinality, scale: float = 1.0) -> "DensityProfile":
        """Profile with rho(T) = scale * value[|T|] for nonempty T."""
        vals = list(by_cardinality)
        if len(vals) != k:
            raise ProfileError("need one value per cardinality 1..k")
        rho = np.empty(1 << k)
        pc = _popcounts(k)
        rho[0] = 1.0
        for m in range(1, 1 << k):
            rho[m] = scale * vals[pc[m] - 1]
        return cls(k, rho)


@dataclass(frozen=True)
class PartitionMeasure:
    """pi(T) >= 0 summing to 1 over the 2^k cells."""

    k: int
    pi: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        pi = np.asarray(self.pi, dtype=np.float64)
        object.__setattr__(self, "pi", pi)
        if pi.shape != (1 << self.k,):
            raise ProfileError(f"pi must have 2^{self.k} entries")
        if np.any(pi < -_NEG_TOL):
            raise ProfileError("negative partition mass")
        if abs(pi.sum() - 1.0) > 1e-9:
            raise ProfileError("pi must sum to 1")

    def weights(self) -> np.ndarray:
        """w(T) = sum of pi over cells disjoint from T (= subset sum over the
        complement); w(empty) = 1."""
        k = self.k
        z = self.pi.copy()
        for b in range(k):
            bit = 1 << b
            for m in range(1 << k):
                if m & bit:
                    z[m] += z[m ^ bit]
        full = (1 << k) - 1
        return z[[full ^ m for m in range(1 << k)]]


@dataclass(frozen=True)
class EdgeProfile:
    """Symmetric M(T, T') >= 0 summing to 1 over ordered cell pairs, with
    M(T, T') = 0 whenever T and T' intersect; rows marginalise to pi.

    When tied to a finite instance, `counts` holds the integer matrix
    n*d*M with even diagonal.
    """

    k: int
    M: np.ndarray
    counts: np.ndarray | None = None
    n: int | None = None
    d: int | None = None

    def __post_init__(self):
        _check_k(self.k)
        M = np.asarray(self.M, dtype=np.float64)
        object.__setattr__(self, "M", M)
        size = 1 << self.k
        if M.shape != (size, size):
            raise ProfileError(f"M must be {size}x{size}")
        if np.any(M < -_NEG_TOL):
            raise ProfileError("negative edge-profile entry")
        if abs(M.sum() - 1.0) > 1e-9:
            raise ProfileError("M must sum to 1")
        if np.max(np.abs(M - M.T)) > 1e-12:
            raise ProfileError("M must be symmetric")
        for a in range(size):
            for b in range(size):
                if a & b and M[a, b] > _NEG_TOL:
                    raise ProfileError(
                        f"support violated: M({a:#b},{b:#b}) > 0 with intersecting index sets"
                    )

    def marginal(self) -> PartitionMeasure:
        return PartitionMeasure(self.k, self.M.sum(axis=1))

    @classmethod
    def from_counts(cls, k: int, counts: np.ndarray, n: int, d: int) -> "EdgeProfile":
        counts = np.asarray(counts, dtype=np.int64)
        total = n * d
        if counts.sum() != total:
            raise ProfileError("edge counts must sum to n*d")
        for a in range(1 << k):
            if counts[a, a] % 2:
                raise ProfileError(f"diagonal count at T={a:#b} must be even")
        return cls(k, counts / total, counts=counts, n=n, d=d)


# ---------------------------------------------------------------------------
# Moebius transforms on the subset lattice
# ---------------------------------------------------------------------------


def rho_to_pi(profile: DensityProfile) -> PartitionMeasure:
    """pi(T) = sum over supersets T' of (-1)^|T'\\T| rho(T') (inclusion-exclusion).

    Rejects inputs whose transform has a negative cell: such a rho corresponds
    to no tuple of sets.
    """
    k = profile.k
    a = profile.rho.copy()
    for b in range(k):
        bit = 1 << b
        for m in range(1 << k):
            if not m & bit:
                a[m] -= a[m | bit]
    if np.any(a < -_NEG_TOL):
        worst = int(np.argmin(a))
        raise ProfileError(
            f"inconsistent density profile: pi({worst:#b}) = {a[worst]:.3e} < 0"
        )
    return PartitionMeasure(k, np.maximum(a, 0.0))


def pi_to_rho(measure: PartitionMeasure) -> DensityProfile:
    """rho(T) = sum of pi over supersets of T (inverse of rho_to_pi)."""
    k = measure.k
    a = measure.pi.copy()
    for b in range(k):
        bit = 1 << b
        for m in range(1 << k):
            if not m & bit:
                a[m] += a[m | bit]
    return DensityProfile(k, a)


def alpha_to_beta(alpha) -> np.ndarray:
    """Cardinality-indexed Moebius transform for symmetric profiles:
    beta_j = sum_{i >= j} (-1)^(i-j) C(k-j, i-j) alpha_i, j = 1..k."""
    alpha = list(alpha)
    k = len(alpha)
    return np.array(
        [
            sum(
                (-1) ** (i - j) * math.comb(k - j, i - j) * alpha[i - 1]
                for i in range(j, k + 1)
            )
            for j in range(1, k + 1)
        ]
    )


def beta_to_alpha(beta) -> np.ndarray:
    """Inverse transform: alpha_j = sum_{i >= j} C(k-j, i-j) beta_i."""
    beta = list(beta)
    k = len(beta)
    return np.array(
        [
            sum(math.comb(k - j, i - j) * beta[i - 1] for i in range(j, k + 1))
            for j in range(1, k + 1)
        ]
    )


def beta_on_subsets(beta, k: int) -> np.ndarray:
    """Expand cardinality-indexed beta values to the full subset lattice
    (entry 0, the empty set, is set to 0)."""
    beta = list(beta)
    out = np.zeros(1 << k)
    pc = _popcounts(k)
    for m in range(1, 1 << k):
        out[m] = beta[pc[m] - 1]
    return out


# ---------------------------------------------------------------------------
# Scalar identities
# ---------------------------------------------------------------------------


def s_k(x: float, k: int) -> float:
    """Partial geometric series 1 + (1-x) + ... + (1-x)^(k-1), the stable form
    of (1 - (1-x)^k) / x; s_k(0) = k and s_k(1) = 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    q = 1.0 - x
    total, power = 0.0, 1.0
    for _ in range(k):
        total += power
        power *= q
    return total


def binom_sum(alpha) -> float:
    """sum_{i=1..k} (-1)^(i-1) C(k, i) alpha_i (2 - alpha_i)."""
    alpha = list(alpha)
    k = len(alpha)
    return math.fsum(
        (-1) ** (i - 1) * math.comb(k, i) * alpha[i - 1] * (2.0 - alpha[i - 1])
        for i in range(1, k + 1)
    )


# ---------------------------------------------------------------------------
# Entropies and the maximum-entropy bound
# ---------------------------------------------------------------------------


def _h(x: float) -> float:
    return -x * math.log(x) if x > 0.0 else 0.0


@dataclass(frozen=True)
class EntropyReport:
    h_pi: float
    h_m: float | None
    h_hat: float


def entropies(obj) -> EntropyReport:
    """Natural-log entropies H(pi), H(M) and the weighted term
    Hhat(pi) = sum_T pi(T) log w(T) (<= 0; -inf when some massive cell has
    weight 0).  Accepts a PartitionMeasure or an EdgeProfile."""
    if isinstance(obj, EdgeProfile):
        measure = obj.marginal()
        h_m = math.fsum(_h(v) for v in obj.M.flat)
    elif isinstance(obj, PartitionMeasure):
        measure = obj
        h_m = None
    else:
        raise TypeError("entropies expects a PartitionMeasure or EdgeProfile")
    h_pi = math.fsum(_h(v) for v in measure.pi)
    w = measure.weights()
    h_hat = 0.0
    for pv, wv in zip(measure.pi, w):
        if pv > 0.0:
            if wv <= 0.0:
                h_hat = float("-inf")
                break
            h_hat += pv * math.log(wv)
    return EntropyReport(h_pi, h_m, h_hat)


def max_entropy_check(profile: EdgeProfile) -> float:
    """Residual 2 H(pi) + Hhat(pi) - H(M), non-negative for every valid edge
    profile (Jensen); raises on an invalid profile, asserts >= -1e-12."""
    rep = entropies(profile)
    residual = 2.0 * rep.h_pi + rep.h_hat - rep.h_m
    if residual < -_NEG_TOL:
        raise AssertionError(f"maximum-entropy bound violated: residual {residual:.3e}")
    return residual


def rate_bound(measure: PartitionMeasure, d: int) -> float:
    """Exponential growth rate bound H(pi) + (d/2) Hhat(pi) for the expected
    number of k-tuples with the given cell masses on d-regular pairings.

    Hhat <= 0, so the second term only ever shrinks the rate; combining the
    maximum-entropy bound with the exact count gives
    (d/2) H(M) - (d-1) H(pi) <= rate_bound for every compatible M.
    """
    rep = entropies(measure)
    return rep.h_pi + 0.5 * d * rep.h_hat


def asymptotic_rate(alpha, k: int, d: int, c_k: float | None = None):
    """Leading term binom_sum(alpha) * log(d)^2 / (2d) of the rate bound for a
    symmetric profile at scale log(d)/d, and the remainder.

    Returns (leading, gap) with gap = rate_bound - leading; asserts
    gap <= c_k * log(d)/d (constants calibrated empirically).
    """
    alpha = list(alpha)
    if len(alpha) != k:
        raise ValueError("need one alpha per cardinality 1..k")
    if any(a < -1e-12 for a in alpha) or any(
        alpha[i] < alpha[i + 1] - 1e-12 for i in range(k - 1)
    ):
        raise ValueError("alpha must be non-negative and non-increasing")
    scale = math.log(d) / d
    profile = DensityProfile.symmetric(k, alpha, scale)
    measure = rho_to_pi(profile)
    leading = binom_sum(alpha) * math.log(d) ** 2 / (2.0 * d)
    gap = rate_bound(measure, d) - leading
    if c_k is None:
        c_k = DEFAULT_GAP_CONSTANTS.get(k)
    if c_k is not None and gap > c_k * scale:
        raise AssertionError(
            f"rate gap {gap:.3e} exceeds {c_k} * log(d)/d = {c_k * scale:.3e}"
        )
    return leading, gap


# Calibrated on alpha families alpha_i = a * q^(i-1), a in [0, 2], q in [0, 1],
# over d in {1e3, 1e4, 1e5, 1e6} (observed maxima 0.12, 0.43, 1.0, 2.1, 3.9,
# 6.7), with a factor-2+ margin; see the profile test module.
DEFAULT_GAP_CONSTANTS = {1: 0.5, 2: 1.5, 3: 3.0, 4: 6.0, 5: 12.0, 6: 16.0}


# ---------------------------------------------------------------------------
# Exact expected counts (configuration model)
# ---------------------------------------------------------------------------


def _log_factorial(m: int) -> float:
    return math.lgamma(m + 1)


def _log_double_factorial_odd(m: int) -> float:
    """log (m-1)!! for even m >= 0, via (m-1)!! = m! / (2^(m/2) (m/2)!)."""
    if m % 2:
        raise ValueError("m must be even")
    if m == 0:
        return 0.0
    half = m // 2
    return _log_factorial(m) - half * math.log(2.0) - _log_factorial(half)


def _integral(x: float, what: str) -> int:
    r = round(x)
    if abs(x - r) > 1e-9:
        raise ProfileError(f"{what} = {x} is not integral")
    return int(r)


def log_expected_Z(profile: DensityProfile, edge_profile: EdgeProfile, n: int, d: int) -> float:
    """Exact log expected number of ordered partitions with the given cell
    sizes and edge counts under a uniform pairing of the n*d half-edges.

    The count multiplies the vertex multinomial, the per-cell half-edge
    multinomials, the cross-cell matchings and the within-cell pairings, and
    divides by (nd-1)!!.  All factors are evaluated in log space through
    lgamma; no Stirling approximation is used.
    """
    k = profile.k
    if edge_profile.k != k:
        raise ProfileError("profile and edge profile must share k")
    measure = rho_to_pi(profile)
    size = 1 << k
    cells = [_integral(n * measure.pi[m], f"n*pi({m:#b})") for m in range(size)]
    if sum(cells) != n:
        raise ProfileError("cell sizes must sum to n")
    counts = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        for b in range(size):
            counts[a, b] = _integral(
                n * d * edge_profile.M[a, b], f"n*d*M({a:#b},{b:#b})"
            )
            if a & b and counts[a, b]:
                raise ProfileError(f"support violated at ({a:#b},{b:#b})")
    for a in range(size):
        if counts[a].sum() != d * cells[a]:
            raise ProfileError(
                f"row marginal mismatch at T={a:#b}: "
                f"{counts[a].sum()} half-edges vs {d * cells[a]}"
            )
        if counts[a, a] % 2:
            raise ProfileError(f"n*d*M(T,T) odd at T={a:#b}")

    log_val = _log_factorial(n) - math.fsum(_log_factorial(c) for c in cells)
    for a in range(size):
        log_val += _log_factorial(d * cells[a])
        log_val -= math.fsum(_log_factorial(int(c)) for c in counts[a])
    log_val += 0.5 * math.fsum(
        _log_factorial(int(counts[a, b]))
        for a in range(size)
        for b in range(size)
        if a != b
    )
    log_val += math.fsum(
        _log_double_factorial_odd(int(counts[a, a])) for a in range(size)
    )
    log_val -= _log_double_factorial_odd(n * d)
    return log_val


def compatible_edge_profiles(
    profile: DensityProfile, n: int, d: int
) -> Iterator[EdgeProfile]:
    """Enumerate every integer edge-count matrix compatible with the profile:
    symmetric, supported on disjoint index pairs, rows summing to the cell
    half-edge budgets, even diagonal.  Depth-first with row-budget pruning."""
    k = profile.k
    measure = rho_to_pi(profile)
    size = 1 << k
    cells = [_integral(n * measure.pi[m], f"n*pi({m:#b})") for m in range(size)]
    budgets = [d * c for c in cells]
    off_pairs = [
        (a, b)
        for a in range(size)
        for b in range(a + 1, size)
        if not a & b
    ]

    counts = np.zeros((size, size), dtype=np.int64)
    remaining = list(budgets)

    def feasible(idx: int) -> bool:
        # every non-empty cell must be able to place its leftover budget into
        # the pairs not yet assigned; the empty cell can absorb any leftover
        # on its own diagonal
        cap = [0] * size
        for a, b in off_pairs[idx:]:
            cap[a] += remaining[b]
            cap[b] += remaining[a]
        return all(remaining[m] <= cap[m] for m in range(1, size))

    def rec(idx: int):
        if idx == len(off_pairs):
            leftover = remaining[0]
            if leftover % 2 == 0 and all(
                r == 0 for m, r in enumerate(remaining) if m != 0
            ):
                counts[0, 0] = leftover
                yield EdgeProfile.from_counts(k, counts.copy(), n, d)
                counts[0, 0] = 0
            return
        a, b = off_pairs[idx]
        top = min(remaining[a], remaining[b])
        for y in range(top + 1):
            counts[a, b] = counts[b, a] = y
            remaining[a] -= y
            remaining[b] -= y
            if feasible(idx + 1):
                yield from rec(idx + 1)
            remaining[a] += y
            remaining[b] += y
        counts[a, b] = counts[b, a] = 0

    yield from rec(0)


def expected_Z_total(profile: DensityProfile, n: int, d: int) -> float:
    """Sum of exp(log_expected_Z) over all compatible edge profiles: the exact
    expected number of k-tuples with the given density profile under the
    uniform pairing model."""
    return math.fsum(
        math.exp(log_expected_Z(profile, ep, n, d))
        for ep in compatible_edge_profiles(profile, n, d)
    )


# ---------------------------------------------------------------------------
# Erdos-Renyi expected count
# ---------------------------------------------------------------------------


def er_log_expected_Z(profile: DensityProfile, n: int, lam: float) -> float:
    """Log of the Erdos-Renyi expected-count bound: the cell multinomial times
    (1 - lam/n) to the number of pairs forced to be non-adjacent,
    sum_T C(cell_T, 2) + sum over unordered intersecting cell pairs of the
    product of cell sizes.  Exact (an equality) for k = 1."""
    if lam >= n:
        raise ProfileError("need lam < n")
    k = profile.k
    measure = rho_to_pi(profile)
    size = 1 << k
    cells = [_integral(n * measure.pi[m], f"n*pi({m:#b})") for m in range(size)]
    if sum(cells) != n:
        raise ProfileError("cell sizes must sum to n")
    forced = 0
    for m in range(1, size):
        forced += cells[m] * (cells[m] - 1) // 2
    for a in range(1, size):
        for b in range(a + 1, size):
            if a & b:
                forced += cells[a] * cells[b]
    log_multinomial = _log_factorial(n) - math.fsum(_log_factorial(c) for c in cells)
    return log_multinomial + forced * math.log1p(-lam / n)


def intersection_edge_count(sets, n: int):
    """Both sides of the forced-pair identity for an explicit k-tuple.

    Left: direct enumeration of unordered vertex pairs whose membership
    signatures intersect.  Right: the cell-size expression
    sum_T C(|cell_T|, 2) + sum over unordered intersecting cell pairs of
    |cell_T| |cell_T'|.  Returns (lhs, rhs); they agree for every tuple.
    """
    k = len(sets)
    sig = [0] * n
    for i, s in enumerate(sets):
        for v in s:
            sig[v] |= 1 << i
    lhs = sum(
        1
        for u in range(n)
        for v in range(u + 1, n)
        if sig[u] & sig[v]
    )
    cells = [0] * (1 << k)
    for v in range(n):
        cells[sig[v]] += 1
    rhs = sum(c * (c - 1) // 2 for m, c in enumerate(cells) if m)
    for a in range(1, 1 << k):
        for b in range(a + 1, 1 << k):
            if a & b:
                rhs += cells[a] * cells[b]
    return lhs, rhs


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------


def _adjacency_masks(g: MultiGraph) -> list:
    masks = [0] * g.n
    for u, v in g.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u  # a loop sets the vertex's own bit
    return masks


def independent_subsets(g: MultiGraph) -> list:
    """Bitmasks of all independent vertex subsets (exhaustive, n <= 20)."""
    if g.n > 20:
        raise ProfileError("exhaustive enumeration limited to n <= 20")
    masks = _adjacency_masks(g)
    out = []
    for m in range(1 << g.n):
        sub = m
        ok = True
        while sub:
            v = (sub & -sub).bit_length() - 1
            if masks[v] & m:
                ok = False
                break
            sub &= sub - 1
        if ok:
            out.append(m)
    return out


def brute_force_Z(graphs, profile: DensityProfile) -> int:
    """Number of k-tuples of independent sets with exactly the given profile.

    `graphs` is one MultiGraph (all sets independent in it) or a list of k
    graphs (set i independent in graph i).  Exhaustive; guarded to n <= 14
    and k <= 2.
    """
    k = profile.k
    gs = graphs if isinstance(graphs, (list, tuple)) else [graphs] * k
    if len(gs) != k:
        raise ProfileError("need one graph per tuple slot")
    n = gs[0].n
    if any(g.n != n for g in gs):
        raise ProfileError("graphs must share a vertex set")
    if n > 14 or k > 2:
        raise ProfileError("brute force guarded to n <= 14 and k <= 2")
    targets = [
        _integral(n * profile.rho[m], f"n*rho({m:#b})") for m in range(1 << k)
    ]
    pools = [independent_subsets(g) for g in gs]
    if k == 1:
        return sum(1 for m in pools[0] if bin(m).count("1") == targets[1])
    count = 0
    for m1 in pools[0]:
        c1 = bin(m1).count("1")
        if c1 != targets[1]:
            continue
        for m2 in pools[1]:
            if bin(m2).count("1") == targets[2] and bin(m1 & m2).count("1") == targets[3]:
                count += 1
    return count


def mean_brute_force_Z(profile: DensityProfile, n: int, d: int) -> float:
    """Average of brute_force_Z over every configuration-model pairing: the
    enumeration oracle matching expected_Z_total."""
    total = 0
    outcomes = 0
    for g in enumerate_config_graphs(n, d):
        total += brute_force_Z(g, profile)
        outcomes += 1
    return total / outcomes


# ---------------------------------------------------------------------------
# Profiles from explicit tuples, and the Jensen-equality construction
# ---------------------------------------------------------------------------


def profile_from_sets(g: MultiGraph, sets):
    """Empirical (DensityProfile, PartitionMeasure, EdgeProfile) of a k-tuple
    of independent sets in g.  The edge profile counts directed edges between
    membership cells (a loop contributes two endpoints to its cell)."""
    k = len(sets)
    n = g.n
    sig = np.zeros(n, dtype=np.int64)
    for i, s in enumerate(sets):
        for v in s:
            sig[v] |= 1 << i
    rho = np.empty(1 << k)
    rho[0] = 1.0
    for m in range(1, 1 << k):
        rho[m] = np.count_nonzero(sig & m == m) / n
    cells = np.bincount(sig, minlength=1 << k)
    counts = np.zeros((1 << k, 1 << k), dtype=np.int64)
    for u, v in g.edges:
        counts[sig[u], sig[v]] += 1
        counts[sig[v], sig[u]] += 1
    total = counts.sum()
    profile = DensityProfile(k, rho)
    measure = PartitionMeasure(k, cells / n)
    edge_profile = EdgeProfile(k, counts / total, counts=counts, n=n, d=None)
    return profile, measure, edge_profile


def jensen_equality_profile(k: int):
    """A (PartitionMeasure, EdgeProfile) pair attaining the maximum-entropy
    bound with equality.

    For k = 1 the mass sits on the empty cell (residual exactly 0).  For
    k >= 2 the mass is uniform on the k singleton cells and M is uniform on
    ordered pairs of distinct singletons, for which H(M) = 2 H(pi) + Hhat(pi).
    """
    size = 1 << k
    if k == 1:
        pi = np.zeros(size)
        pi[0] = 1.0
        M = np.zeros((size, size))
        M[0, 0] = 1.0
        return PartitionMeasure(k, pi), EdgeProfile(k, M)
    pi = np.zeros(size)
    M = np.zeros((size, size))
    singles = [1 << i for i in range(k)]
    for s in singles:
        pi[s] = 1.0 / k
    for a in singles:
        for b in singles:
            if a != b:
                M[a, b] = 1.0 / (k * (k - 1))
    return PartitionMeasure(k, pi), EdgeProfile(k, M)
