"""Local decision rules and their application to trees and finite graphs.

A factor is a deterministic rule reading a rooted labelled neighbourhood of
bounded radius and returning a {0, 1} inclusion bit.  Rules are written
against a minimal rooted-view protocol (root, neighbors(v), label(v),
order_key(v)), so one implementation serves materialised neighbourhoods and
lazily generated trees alike.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graphs import (
    LazyTree,
    MultiGraph,
    PGWTreeHost,
    RegularTreeHost,
    TreeLabels,
    neighborhood,
    non_tree_ball_mask,
)
from .parallel import mean_stderr, run_trials
from .rng import first_success_round, trial_state


@dataclass(frozen=True)
class Factor:
    """Deterministic rule mapping a rooted labelled neighbourhood to {0, 1}.

    The rule reads only vertices within `radius` of the root and is invariant
    under vertex-id relabelling; ids enter only as tie-breaks for the
    measure-zero event of equal labels.
    """

    kind: str
    radius: int
    params: dict = field(default_factory=dict)
    rule: Callable = None


def factor_spec(f: Factor) -> dict:
    """JSON-serialisable descriptor {kind, radius, params}."""
    return {"kind": f.kind, "radius": f.radius, "params": dict(f.params)}


def factor_from_spec(spec: dict) -> Factor:
    kind = spec["kind"]
    params = spec.get("params", {})
    if kind == "lauer-wormald":
        return lauer_wormald(params["p"], params["k"])
    if kind == "greedy-threshold":
        return threshold_factor()
    if kind == "const":
        return constant_factor(params["bit"])
    raise ValueError(f"unknown factor kind: {kind!r}")


def constant_factor(bit: int) -> Factor:
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return Factor("const", 0, {"bit": bit}, rule=lambda view: bit)


def _threshold_rule(view) -> int:
    root = view.root
    key = (view.label(root), view.order_key(root))
    for u in view.neighbors(root):
        if (view.label(u), view.order_key(u)) <= key:
            return 0
    return 1


def threshold_factor() -> Factor:
    """Radius-1 rule: include the root iff its label is the strict minimum of
    its closed 1-neighbourhood.  Density 1/(d+1) on the d-regular tree."""
    return Factor("greedy-threshold", 1, {}, rule=_threshold_rule)


# ---------------------------------------------------------------------------
# The percolation-round construction (Lauer-Wormald)
# ---------------------------------------------------------------------------


def _lw_rule(p: float, k: int) -> Callable:
    """Rule for the k-round Bernoulli(p) construction.

    Each vertex derives a first-success round T ~ Geometric(p) from its label.
    A vertex joins the growing set at round T(v) unless a neighbour joined at
    a strictly earlier round (joining removes the closed neighbourhood from
    later rounds).  The output set keeps joined vertices with no joined
    neighbour, which drops both endpoints of any same-round adjacent pair.

    Evaluation is lazy: a neighbour needs resolving only while first-success
    rounds strictly decrease, so the explored region stays small even for
    large k.
    """

    def rule(view) -> int:
        rounds = {}
        joins = {}

        def first_round(v):
            r = rounds.get(v)
            if r is None:
                r = first_success_round(view.label(v), p)
                rounds[v] = r
            return r

        def resolve(v0):
            stack = [v0]
            while stack:
                v = stack[-1]
                if v in joins:
                    stack.pop()
                    continue
                rv = first_round(v)
                if rv > k:
                    joins[v] = False
                    stack.pop()
                    continue
                nbrs = view.neighbors(v)
                pending = [w for w in nbrs if first_round(w) < rv and w not in joins]
                if pending:
                    stack.extend(pending)
                    continue
                joins[v] = not any(
                    first_round(w) < rv and joins[w] for w in nbrs
                )
                stack.pop()
            return joins[v0]

        root = view.root
        if not resolve(root):
            return 0
        for u in view.neighbors(root):
            if resolve(u):
                return 0
        return 1

    return rule


def lauer_wormald(p: float, k: int) -> Factor:
    """Factor of radius k+1 running k rounds of Bernoulli(p) percolation with
    removal of selected closed neighbourhoods and same-round conflict
    exclusion."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got {p}")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    return Factor("lauer-wormald", k + 1, {"p": p, "k": k}, rule=_lw_rule(p, k))


# ---------------------------------------------------------------------------
# Applying factors
# ---------------------------------------------------------------------------


class _TruncatedView:
    """Restrict a materialised rooted view to a smaller radius."""

    __slots__ = ("base", "radius")

    def __init__(self, base, radius: int):
        self.base = base
        self.radius = radius

    @property
    def root(self):
        return self.base.root

    def neighbors(self, v):
        depths = self.base.depths
        return [w for w in self.base.neighbors(v) if depths[w] <= self.radius]

    def label(self, v):
        return self.base.label(v)

    def order_key(self, v):
        return self.base.order_key(v)


def apply_factor(f: Factor, nb) -> int:
    """Evaluate f on nb truncated to f.radius.  Pure and deterministic."""
    radius = getattr(nb, "radius", None)
    if radius is not None and radius < f.radius:
        raise ValueError(
            f"neighbourhood radius {radius} is smaller than factor radius {f.radius}"
        )
    view = nb
    if radius is not None and radius > f.radius:
        view = _TruncatedView(nb, f.radius)
    bit = f.rule(view)
    if bit not in (0, 1):
        raise RuntimeError(f"factor rule returned {bit!r}, expected 0 or 1")
    return int(bit)


BetaBracket = namedtuple("BetaBracket", ["value", "lower", "upper"])


def beta_formula(d: int) -> BetaBracket:
    """Closed-form limiting density (1 - (d-1)^(-2/(d-2))) / 2 of the
    percolation-round construction on the d-regular tree, with its elementary
    bracketing bounds log(d-1)/(d-2) - 2*(log(d-1)/(d-2))^2 and log(d-1)/(d-2).
    """
    if d < 3:
        raise ValueError("need d >= 3")
    value = (1.0 - (d - 1) ** (-2.0 / (d - 2))) / 2.0
    base = math.log(d - 1) / (d - 2)
    lower = base - 2.0 * base * base
    upper = base
    if not (lower <= value <= upper):
        raise AssertionError("bracketing bounds violated; check inputs")
    return BetaBracket(value, lower, upper)


# ---------------------------------------------------------------------------
# Projection onto finite graphs
# ---------------------------------------------------------------------------


@dataclass
class IndependentSetSample:
    """Per-vertex inclusion bits over a host graph."""

    graph: MultiGraph
    bits: np.ndarray

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def violations(self) -> list:
        """Edges with both endpoints included (a loop reports its vertex twice)."""
        bits = self.bits
        return [(u, v) for u, v in self.graph.edges if bits[u] and bits[v]]


def project_to_graph(f: Factor, g: MultiGraph, labels: np.ndarray) -> IndependentSetSample:
    """Project a tree factor onto a finite graph.

    A vertex gets the factor's decision when its (radius+1)-neighbourhood is a
    tree, and 0 otherwise; the output is checked to be an independent set.
    """
    labels = np.asarray(labels, dtype=np.uint64)
    if labels.shape != (g.n,):
        raise ValueError(f"labels must have shape ({g.n},)")
    bits = np.zeros(g.n, dtype=bool)
    bad = non_tree_ball_mask(g, f.radius + 1)
    for v in np.flatnonzero(~bad):
        nb = neighborhood(g, int(v), f.radius, labels)
        bits[v] = bool(apply_factor(f, nb))
    sample = IndependentSetSample(g, bits)
    viol = sample.violations()
    if viol:
        raise RuntimeError(f"projection produced adjacent members: {viol[:3]}")
    return sample


# ---------------------------------------------------------------------------
# Monte Carlo density on trees
# ---------------------------------------------------------------------------

DensityEstimate = namedtuple("DensityEstimate", ["mean", "stderr", "trials"])


def estimate_tree_density(
    f: Factor, host, trials: int, seed: int = 0, workers: int = 1
) -> DensityEstimate:
    """Monte Carlo mean and standard error of the factor's root bit over fresh
    sampled trees with fresh labels.

    Args:
        host: RegularTreeHost(d) or PGWTreeHost(lam); trees are generated at
            radius exactly f.radius (the rule never reads beyond it).
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    if not isinstance(host, (RegularTreeHost, PGWTreeHost)):
        raise TypeError(f"unsupported host: {host!r}")

    def one(t: int):
        tree = LazyTree(host, f.radius, trial_state(seed, t))
        return [float(f.rule(TreeLabels(tree)))]

    rows = run_trials(one, trials, workers)
    mean, stderr = mean_stderr(rows[:, 0])
    return DensityEstimate(mean, stderr, trials)
