"""Coupled families of independent sets and their intersection statistics.

One coupling trial fixes a host structure, a base labelling X0 and a
Bernoulli-p vertex subset S, then builds k correlated copies: copy i uses
fresh labels Xi on S and X0 elsewhere (for the Erdos-Renyi host, the induced
subgraph on S is additionally resampled per copy).  Estimated are the
prefix-intersection densities, the full density profile over copy subsets,
and the stability: the conditional probability that the root keeps its
inclusion bit when S is re-randomised, given it was included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .factors import Factor, apply_factor, neighborhood
from .graphs import (
    ConfigModelHost,
    ErdosRenyiHost,
    LazyTree,
    MultiGraph,
    PGWTreeHost,
    RegularTreeHost,
    TreeLabels,
    non_tree_ball_mask,
    sample_config_model,
    sample_er,
)
from .parallel import mean_stderr, run_trials
from .profiles import DensityProfile, binom_sum
from .rng import fold, percolation_cut, state_rng, trial_state, uniform_labels


class ConditioningError(RuntimeError):
    """The conditioning event was never observed (no accepted outer trial)."""


@dataclass
class CouplingConfig:
    """Parameters of one coupled-family experiment."""

    p: float
    k: int
    factor: Factor
    host: object
    trials: int
    inner_trials: int = 400
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.trials < 1 or self.inner_trials < 1:
            raise ValueError("trials and inner_trials must be >= 1")


def host_scale(host) -> float:
    """Normalisation (log d)/d resp. (log lam)/lam used for alpha values."""
    if isinstance(host, RegularTreeHost):
        return math.log(host.d) / host.d
    if isinstance(host, ConfigModelHost):
        return math.log(host.d) / host.d
    if isinstance(host, PGWTreeHost):
        return math.log(host.lam) / host.lam
    if isinstance(host, ErdosRenyiHost):
        return math.log(host.lam) / host.lam
    raise TypeError(f"unsupported host: {host!r}")


@dataclass
class IntersectionEstimate:
    """Per-cardinality densities of the prefix intersections I1 .. I1&..&Ii.

    Raw densities are stored; normalised alpha values are computed on demand
    by dividing out the host scale.
    """

    k: int
    trials: int
    means: np.ndarray
    stderrs: np.ndarray
    scale: float
    p: float
    prefix_rows: np.ndarray = field(repr=False, default=None)

    def density(self, i: int) -> tuple:
        return float(self.means[i - 1]), float(self.stderrs[i - 1])

    def alpha(self, i: int) -> float:
        return float(self.means[i - 1]) / self.scale

    def alphas(self, upto: int | None = None) -> list:
        upto = self.k if upto is None else upto
        return [self.alpha(i) for i in range(1, upto + 1)]


@dataclass
class ProfileSamples:
    """Per-trial density profiles rho(T) over all copy subsets T."""

    k: int
    rows: np.ndarray  # (trials, 2^k)

    def mean_profile(self) -> DensityProfile:
        return DensityProfile(self.k, self.rows.mean(axis=0))

    def subset_mean(self, mask: int) -> tuple:
        return mean_stderr(self.rows[:, mask])


@dataclass
class StabilityEstimate:
    """Nested Monte Carlo estimates of the stability moments E*[Q^m]."""

    outer_trials: int
    accepted: int
    inner_trials: int
    moments: dict
    density: tuple  # acceptance rate of the conditioning event, with stderr
    q_values: np.ndarray = field(repr=False, default=None)

    def moment(self, m) -> tuple:
        return self.moments[m]


def percolate(n: int, p: float, seed) -> np.ndarray:
    """Bernoulli-p subset of range(n); returns the sorted selected ids."""
    percolation_cut(p)  # validates p
    rng = np.random.default_rng(seed)
    return np.flatnonzero(rng.random(n) < p)


# ---------------------------------------------------------------------------
# Tree host
# ---------------------------------------------------------------------------


def _tree_host(host):
    if isinstance(host, (RegularTreeHost, PGWTreeHost)):
        return host
    raise TypeError(f"expected a tree host, got {host!r}")


def coupled_tree_intersections(cfg: CouplingConfig, copy_streams=None) -> IntersectionEstimate:
    """Prefix-intersection densities of k coupled copies on sampled trees.

    Per trial: sample a tree at the factor's radius, draw X0 and the subset S
    once, evaluate the root bit of every copy, and record the running prefix
    products.  copy_streams permutes which fresh-label stream each copy uses
    (an exchangeability knob; the default is 1..k).
    """
    host = _tree_host(cfg.host)
    f = cfg.factor
    streams = list(copy_streams) if copy_streams is not None else list(range(1, cfg.k + 1))
    if len(streams) != cfg.k:
        raise ValueError("copy_streams must have length k")

    def one(t: int):
        tree = LazyTree(host, f.radius, trial_state(cfg.seed, t))
        bits = [f.rule(TreeLabels(tree, copy=s, p=cfg.p)) for s in streams]
        return np.cumprod(bits).astype(np.float64)

    rows = run_trials(one, cfg.trials, cfg.workers)
    means = rows.mean(axis=0)
    ses = np.array([mean_stderr(rows[:, i])[1] for i in range(cfg.k)])
    return IntersectionEstimate(
        cfg.k, cfg.trials, means, ses, host_scale(host), cfg.p, prefix_rows=rows
    )


# ---------------------------------------------------------------------------
# Configuration-model host
# ---------------------------------------------------------------------------


def _project_bits(f: Factor, g: MultiGraph, ok: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Copy projection given a precomputed tree-neighbourhood mask."""
    bits = np.zeros(g.n, dtype=bool)
    for v in np.flatnonzero(ok):
        nb = neighborhood(g, int(v), f.radius, labels)
        bits[v] = bool(apply_factor(f, nb))
    return bits


def _profile_row(copy_bits: np.ndarray, n: int, k: int) -> np.ndarray:
    """rho(T) for all T as a dense bitmask-indexed row; rho(empty) = 1."""
    row = np.empty(1 << k, dtype=np.float64)
    row[0] = 1.0
    for mask in range(1, 1 << k):
        inter = np.ones(n, dtype=bool)
        for i in range(k):
            if mask >> i & 1:
                inter &= copy_bits[i]
        row[mask] = inter.sum() / n
    return row


def coupled_graph_intersections(cfg: CouplingConfig, copy_streams=None):
    """Coupled copies on configuration-model graphs.

    Per trial: sample the graph, X0, S and fresh labels, project every copy,
    and record the full density profile over copy subsets plus the non-tree
    vertex fraction of the graph.

    Returns (IntersectionEstimate, ProfileSamples, mean non-tree fraction).
    """
    host = cfg.host
    if not isinstance(host, ConfigModelHost):
        raise TypeError(f"expected ConfigModelHost, got {host!r}")
    f, k, n = cfg.factor, cfg.k, host.n
    streams = list(copy_streams) if copy_streams is not None else list(range(1, k + 1))

    def one(t: int):
        st = trial_state(cfg.seed, t)
        g = sample_config_model(n, host.d, fold(st, 1))
        rng = state_rng(fold(st, 2))
        x0 = uniform_labels(rng, n)
        in_s = rng.random(n) < cfg.p
        fresh = {s: uniform_labels(rng, n) for s in range(1, k + 1)}
        ok = ~non_tree_ball_mask(g, f.radius + 1)
        copy_bits = []
        for s in streams:
            labels = np.where(in_s, fresh[s], x0)
            copy_bits.append(_project_bits(f, g, ok, labels))
        row = _profile_row(copy_bits, n, k)
        return np.concatenate([row, [1.0 - ok.mean()]])

    rows = run_trials(one, cfg.trials, cfg.workers)
    profiles = ProfileSamples(k, rows[:, : 1 << k])
    prefix_cols = [(1 << i) - 1 for i in range(1, k + 1)]
    prefix = rows[:, prefix_cols]
    means = prefix.mean(axis=0)
    ses = np.array([mean_stderr(prefix[:, i])[1] for i in range(k)])
    est = IntersectionEstimate(
        k, cfg.trials, means, ses, host_scale(host), cfg.p, prefix_rows=prefix
    )
    return est, profiles, float(rows[:, -1].mean())


# ---------------------------------------------------------------------------
# Erdos-Renyi host
# ---------------------------------------------------------------------------


def er_resample_graphs(g: MultiGraph, S, lam: float, k: int, seed) -> list:
    """k copies of g with the induced subgraph on S independently resampled.

    Every copy keeps all edges of g not inside SxS; pairs within SxS are
    re-drawn independently per copy with probability lam/n, so each copy is
    again Erdos-Renyi(n, lam/n) marginally.
    """
    n = g.n
    S = np.asarray(sorted(int(v) for v in S), dtype=np.int64)
    in_s = np.zeros(n, dtype=bool)
    in_s[S] = True
    kept = [(u, v) for u, v in g.edges if not (in_s[u] and in_s[v])]
    out = []
    base = trial_state(seed, 0x5E5A)
    m = S.size
    iu, iv = np.triu_indices(m, k=1) if m >= 2 else (np.array([], int), np.array([], int))
    for i in range(k):
        rng = state_rng(fold(base, i))
        mask = rng.random(iu.size) < lam / n
        fresh = [(int(S[a]), int(S[b])) for a, b in zip(iu[mask], iv[mask])]
        out.append(
            MultiGraph(n, sorted(kept + fresh), model="er", params={"lambda": lam})
        )
    return out


def coupled_er_intersections(cfg: CouplingConfig, copy_streams=None):
    """Coupled copies on Erdos-Renyi graphs.

    Per trial: sample g, S and labellings; build per-copy resampled graphs
    with independent induced subgraphs on S; project the factor (vertices
    with a non-tree (radius+1)-neighbourhood map to 0) and record profiles.

    Returns (IntersectionEstimate, ProfileSamples).
    """
    host = cfg.host
    if not isinstance(host, ErdosRenyiHost):
        raise TypeError(f"expected ErdosRenyiHost, got {host!r}")
    f, k, n = cfg.factor, cfg.k, host.n
    streams = list(copy_streams) if copy_streams is not None else list(range(1, k + 1))

    def one(t: int):
        st = trial_state(cfg.seed, t)
        g = sample_er(n, host.lam, fold(st, 1))
        rng = state_rng(fold(st, 2))
        x0 = uniform_labels(rng, n)
        in_s = rng.random(n) < cfg.p
        S = np.flatnonzero(in_s)
        fresh = {s: uniform_labels(rng, n) for s in range(1, k + 1)}
        copies = er_resample_graphs(g, S, host.lam, k, fold(st, 3))
        copy_bits = []
        for s in streams:
            gi = copies[s - 1]
            labels = np.where(in_s, fresh[s], x0)
            ok = ~non_tree_ball_mask(gi, f.radius + 1)
            copy_bits.append(_project_bits(f, gi, ok, labels))
        return _profile_row(copy_bits, n, k)

    rows = run_trials(one, cfg.trials, cfg.workers)
    profiles = ProfileSamples(k, rows)
    prefix_cols = [(1 << i) - 1 for i in range(1, k + 1)]
    prefix = rows[:, prefix_cols]
    means = prefix.mean(axis=0)
    ses = np.array([mean_stderr(prefix[:, i])[1] for i in range(k)])
    est = IntersectionEstimate(
        k, cfg.trials, means, ses, host_scale(host), cfg.p, prefix_rows=prefix
    )
    return est, profiles


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------


def _jackknife_moment(count: int, n: int, m: float) -> float:
    """Estimate Q^m from a Binomial(n, Q) success count.

    Plug-in (count/n)^m inflated by O(m^2/n); the leave-one-out jackknife
    removes the O(1/n) term and is exactly unbiased for integer m <= 2.
    """
    q = count / n
    if m == 0:
        return 1.0
    if m == 1 or n < 2:
        return q**m if m != 1 else q
    loo_one = ((count - 1) / (n - 1)) ** m if count > 0 else 0.0
    loo_zero = (count / (n - 1)) ** m
    loo_mean = (count / n) * loo_one + ((n - count) / n) * loo_zero
    return n * q**m - (n - 1) * loo_mean


def estimate_stability(cfg: CouplingConfig, moments=None) -> StabilityEstimate:
    """Nested Monte Carlo stability moments.

    Outer loop: sample (host structure, X0, S); accept the trial when the
    root's inclusion bit under X0 is 1 (rejection implements the
    conditioning).  Inner loop: re-randomise labels on S (and, for the
    Erdos-Renyi host, edges inside SxS) inner_trials times; the inner success
    fraction is one Q sample.  Moment estimates are jackknife-corrected.

    Raises ConditioningError when no outer trial is accepted.
    """
    if moments is None:
        moments = list(range(cfg.k))
    one = _stability_trial_fn(cfg)
    rows = run_trials(one, cfg.trials, cfg.workers)
    accepted = rows[:, 0] == 1.0
    n_acc = int(accepted.sum())
    if n_acc == 0:
        raise ConditioningError(
            "conditioning event not observed: the factor never included the root"
        )
    counts = rows[accepted, 1].astype(np.int64)
    q_values = counts / cfg.inner_trials
    out = {}
    for m in moments:
        g = np.array([_jackknife_moment(int(c), cfg.inner_trials, m) for c in counts])
        out[m] = mean_stderr(g)
    density = mean_stderr(rows[:, 0])
    return StabilityEstimate(
        cfg.trials, n_acc, cfg.inner_trials, out, density, q_values=q_values
    )


def _stability_trial_fn(cfg: CouplingConfig):
    f = cfg.factor
    host = cfg.host
    if isinstance(host, (RegularTreeHost, PGWTreeHost)):

        def one(t: int):
            tree = LazyTree(host, f.radius, trial_state(cfg.seed, t))
            if f.rule(TreeLabels(tree, copy=0, p=cfg.p)) != 1:
                return [0.0, -1.0]
            cnt = sum(
                f.rule(TreeLabels(tree, copy=j, p=cfg.p))
                for j in range(1, cfg.inner_trials + 1)
            )
            return [1.0, float(cnt)]

        return one

    if isinstance(host, ConfigModelHost):

        def one(t: int):
            st = trial_state(cfg.seed, t)
            g = sample_config_model(host.n, host.d, fold(st, 1))
            rng = state_rng(fold(st, 2))
            x0 = uniform_labels(rng, host.n)
            in_s = rng.random(host.n) < cfg.p
            root = int(rng.integers(host.n))
            if not _graph_root_bit(f, g, root, x0):
                return [0.0, -1.0]
            cnt = 0
            for j in range(1, cfg.inner_trials + 1):
                fresh = uniform_labels(state_rng(fold(st, 0x1000 + j)), host.n)
                labels = np.where(in_s, fresh, x0)
                cnt += _graph_root_bit(f, g, root, labels)
            return [1.0, float(cnt)]

        return one

    if isinstance(host, ErdosRenyiHost):

        def one(t: int):
            st = trial_state(cfg.seed, t)
            g = sample_er(host.n, host.lam, fold(st, 1))
            rng = state_rng(fold(st, 2))
            x0 = uniform_labels(rng, host.n)
            in_s = rng.random(host.n) < cfg.p
            S = np.flatnonzero(in_s)
            root = int(rng.integers(host.n))
            if not _graph_root_bit(f, g, root, x0):
                return [0.0, -1.0]
            cnt = 0
            for j in range(1, cfg.inner_trials + 1):
                fresh = uniform_labels(state_rng(fold(st, 0x1000 + j)), host.n)
                labels = np.where(in_s, fresh, x0)
                gj = er_resample_graphs(g, S, host.lam, 1, fold(st, 0x2000 + j))[0]
                cnt += _graph_root_bit(f, gj, root, labels)
            return [1.0, float(cnt)]

        return one

    raise TypeError(f"unsupported host: {host!r}")


def _graph_root_bit(f: Factor, g: MultiGraph, root: int, labels: np.ndarray) -> int:
    from .graphs import ball_is_tree

    if not ball_is_tree(g, root, f.radius + 1):
        return 0
    nb = neighborhood(g, root, f.radius, labels)
    return apply_factor(f, nb)


# ---------------------------------------------------------------------------
# Scans and moment targeting
# ---------------------------------------------------------------------------


def run_intersections(cfg: CouplingConfig, copy_streams=None) -> IntersectionEstimate:
    """Dispatch the coupled-intersection estimator by host kind."""
    if isinstance(cfg.host, (RegularTreeHost, PGWTreeHost)):
        return coupled_tree_intersections(cfg, copy_streams)
    if isinstance(cfg.host, ConfigModelHost):
        return coupled_graph_intersections(cfg, copy_streams)[0]
    if isinstance(cfg.host, ErdosRenyiHost):
        return coupled_er_intersections(cfg, copy_streams)[0]
    raise TypeError(f"unsupported host: {cfg.host!r}")


@dataclass
class ScanRow:
    p: float
    intersections: IntersectionEstimate
    stability: StabilityEstimate
    binom_stats: dict


@dataclass
class ScanResult:
    rows: list
    max_jumps: dict

    def max_adjacent_jump(self) -> float:
        return max(self.max_jumps.values()) if self.max_jumps else 0.0


def scan_p(cfg: CouplingConfig, grid) -> ScanResult:
    """Run the couplings at each p in the grid with common trial counts and
    report the largest adjacent jump per statistic (a smoothness proxy)."""
    grid = [float(p) for p in grid]
    if any(not 0.0 <= p <= 1.0 for p in grid):
        raise ValueError("grid values must lie in [0, 1]")
    rows = []
    for p in grid:
        cfg_p = replace(cfg, p=p)
        inter = run_intersections(cfg_p)
        stab = estimate_stability(cfg_p)
        stats = {}
        if cfg.k >= 2:
            stats["binom_k2"] = binom_sum(inter.alphas(2))
        if cfg.k >= 3:
            stats["binom_k3"] = binom_sum(inter.alphas(3))
        rows.append(ScanRow(p, inter, stab, stats))
    jumps = {}
    for i in range(1, cfg.k + 1):
        vals = [r.intersections.density(i)[0] for r in rows]
        jumps[f"intersection_{i}"] = max(
            (abs(b - a) for a, b in zip(vals, vals[1:])), default=0.0
        )
    return ScanResult(rows, jumps)


def find_p_for_moment(
    cfg: CouplingConfig, u: float, target: float, coarse: int = 6, max_iter: int = 24
):
    """Find p* with E*[Q^u](p*) = target, up to 3x the Monte Carlo error.

    Scans a coarse grid, brackets a sign change of (estimate - target), and
    bisects; no monotonicity in p is assumed.  Raises ConditioningError with
    a "no crossing" message when the target is outside the attained range.
    """
    if u <= 0:
        raise ValueError("u must be > 0")

    cache = {}

    def eval_at(p: float):
        if p not in cache:
            est = estimate_stability(replace(cfg, p=p), moments=[u])
            cache[p] = est.moments[u]
        return cache[p]

    grid = list(np.linspace(0.0, 1.0, coarse))
    vals = [eval_at(p) for p in grid]
    lo_end, hi_end = vals[-1][0], vals[0][0]
    lo_bound = min(lo_end, hi_end) - 3 * max(vals[0][1], vals[-1][1])
    hi_bound = max(lo_end, hi_end) + 3 * max(vals[0][1], vals[-1][1])
    if not lo_bound <= target <= hi_bound:
        raise ConditioningError(
            f"no crossing in [0, 1]: target {target} outside attained range "
            f"[{lo_bound:.6g}, {hi_bound:.6g}]"
        )
    for p, (m, se) in zip(grid, vals):
        if abs(m - target) <= 3 * se:
            return p, m, se
    bracket = None
    for (pa, (ma, _)), (pb, (mb, _)) in zip(
        list(zip(grid, vals)), list(zip(grid, vals))[1:]
    ):
        if (ma - target) * (mb - target) <= 0:
            bracket = (pa, ma, pb, mb)
            break
    if bracket is None:
        raise ConditioningError("no crossing in [0, 1]: no sign change on the grid")
    pa, ma, pb, mb = bracket
    best = None
    for _ in range(max_iter):
        pm = 0.5 * (pa + pb)
        m, se = eval_at(pm)
        best = (pm, m, se)
        if abs(m - target) <= 3 * se or (pb - pa) < 1.0 / 512:
            return best
        if (ma - target) * (m - target) <= 0:
            pb, mb = pm, m
        else:
            pa, ma = pm, m
    return best
