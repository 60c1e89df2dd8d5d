import math

import numpy as np
import pytest

from localis.coupling import (
    ConditioningError,
    CouplingConfig,
    coupled_er_intersections,
    coupled_graph_intersections,
    coupled_tree_intersections,
    er_resample_graphs,
    estimate_stability,
    find_p_for_moment,
    percolate,
    scan_p,
)
from localis.factors import constant_factor, estimate_tree_density, threshold_factor
from localis.graphs import (
    ConfigModelHost,
    ErdosRenyiHost,
    RegularTreeHost,
    sample_er,
)
from localis.profiles import binom_sum

from conftest import assert_within_sigma, binomial_se

F = threshold_factor()
T3 = RegularTreeHost(3)


def tree_cfg(p, k=3, trials=20_000, seed=0, inner=200):
    return CouplingConfig(p=p, k=k, factor=F, host=T3, trials=trials,
                          inner_trials=inner, seed=seed)


# ---------------------------------------------------------------------------
# percolate
# ---------------------------------------------------------------------------


def test_percolate_endpoints():
    assert percolate(100, 0.0, 1).size == 0
    assert np.array_equal(percolate(100, 1.0, 1), np.arange(100))


def test_percolate_binomial():
    n, p = 100_000, 0.3
    frac = percolate(n, p, 7).size / n
    assert_within_sigma(frac, p, binomial_se(p, n), context="percolate")


# ---------------------------------------------------------------------------
# tree coupling
# ---------------------------------------------------------------------------


def test_tree_coupling_p0_identical_copies():
    est = coupled_tree_intersections(tree_cfg(0.0, trials=5000, seed=1))
    rows = est.prefix_rows
    assert np.array_equal(rows[:, 0], rows[:, 1])
    assert np.array_equal(rows[:, 0], rows[:, 2])
    assert est.means[0] == est.means[2]


def test_tree_coupling_p1_independent_copies():
    est = coupled_tree_intersections(tree_cfg(1.0, trials=100_000, seed=2))
    m1, se1 = est.density(1)
    for i in (2, 3):
        mi, sei = est.density(i)
        # density of the i-wise intersection is the single density to the i-th power
        se_rhs = i * m1 ** (i - 1) * se1
        assert_within_sigma(mi, m1**i, sei, se_rhs, context=f"p=1 prefix {i}")


def test_tree_coupling_k1_matches_density():
    cfg = tree_cfg(0.37, k=1, trials=40_000, seed=3)
    est = coupled_tree_intersections(cfg)
    ref = estimate_tree_density(F, T3, 40_000, seed=4)
    assert_within_sigma(
        est.means[0], ref.mean, est.stderrs[0], ref.stderr, context="k=1 vs density"
    )


def test_tree_coupling_prefix_monotone_per_trial():
    est = coupled_tree_intersections(tree_cfg(0.5, trials=3000, seed=5))
    rows = est.prefix_rows
    assert np.all(np.diff(rows, axis=1) <= 0)


def test_tree_coupling_exchangeable_streams():
    cfg = tree_cfg(0.5, trials=60_000, seed=6)
    fwd = coupled_tree_intersections(cfg)
    rev = coupled_tree_intersections(cfg, copy_streams=[3, 2, 1])
    for i in (1, 2, 3):
        assert_within_sigma(
            fwd.means[i - 1], rev.means[i - 1],
            fwd.stderrs[i - 1], rev.stderrs[i - 1],
            context=f"exchangeability i={i}",
        )


def test_binom_stats_at_endpoints():
    # closed endpoint values: at p=0 the k=2 statistic is a1(2-a1) >= 0,
    # at p=1 it is 2 a1 (2 - a1) - a2 (2 - a2) with a2 = a1^2 * scale
    for p, seed in ((0.0, 7), (1.0, 8)):
        est = coupled_tree_intersections(tree_cfg(p, k=2, trials=30_000, seed=seed))
        stat = binom_sum(est.alphas(2))
        assert stat >= -1e-9, f"k=2 binomial statistic negative at p={p}"
    est = coupled_tree_intersections(tree_cfg(0.0, k=3, trials=30_000, seed=9))
    assert binom_sum(est.alphas(3)) >= -1e-9


# ---------------------------------------------------------------------------
# configuration-model coupling
# ---------------------------------------------------------------------------


def test_graph_coupling_profiles():
    cfg = CouplingConfig(p=0.5, k=2, factor=F, host=ConfigModelHost(300, 3),
                         trials=80, seed=10)
    est, profiles, bfrac = coupled_graph_intersections(cfg)
    # p=0 copies equal is covered below; here: exchangeability across equal-size T
    rows = profiles.rows
    diff = rows[:, 0b01] - rows[:, 0b10]
    se = float(np.std(diff, ddof=1) / math.sqrt(len(diff)))
    assert abs(diff.mean()) <= 3 * se + 1e-12
    # projection loss bracket: tree density * (1 - B/n) <= mean <= tree density
    tree_density = 0.25
    m1, se1 = est.density(1)
    assert tree_density * (1 - bfrac) - 3 * se1 <= m1 <= tree_density + 3 * se1


def test_graph_coupling_p0_equal_copies():
    cfg = CouplingConfig(p=0.0, k=2, factor=F, host=ConfigModelHost(120, 3),
                         trials=40, seed=11)
    est, profiles, _ = coupled_graph_intersections(cfg)
    rows = profiles.rows
    assert np.array_equal(rows[:, 0b01], rows[:, 0b11])
    assert np.array_equal(rows[:, 0b10], rows[:, 0b11])


# ---------------------------------------------------------------------------
# Erdos-Renyi coupling
# ---------------------------------------------------------------------------


def test_er_resample_p0_identity():
    g = sample_er(80, 2.0, 12)
    copies = er_resample_graphs(g, np.array([], dtype=int), 2.0, 2, 13)
    assert copies[0].edges == g.edges
    assert copies[1].edges == g.edges


def test_er_resample_full_independence():
    # S = [n], k = 2: presence of a fixed pair across copies is uncorrelated
    n, lam, trials = 30, 3.0, 10_000
    rng = np.random.default_rng(14)
    a = np.empty(trials)
    b = np.empty(trials)
    target = (0, 1)
    for t in range(trials):
        g = sample_er(n, lam, rng)
        c1, c2 = er_resample_graphs(g, np.arange(n), lam, 2, int(rng.integers(1 << 30)))
        a[t] = target in c1.edges
        b[t] = target in c2.edges
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) <= 3.0 / math.sqrt(trials)


def test_er_resample_marginal_moments():
    n, lam, trials = 50, 2.0, 4000
    rng = np.random.default_rng(15)
    counts = np.empty(trials)
    for t in range(trials):
        g = sample_er(n, lam, rng)
        S = percolate(n, 0.6, int(rng.integers(1 << 30)))
        counts[t] = len(er_resample_graphs(g, S, lam, 1, int(rng.integers(1 << 30)))[0].edges)
    pairs = n * (n - 1) // 2
    p = lam / n
    assert_within_sigma(
        counts.mean(), pairs * p, math.sqrt(pairs * p * (1 - p) / trials),
        context="er resample marginal",
    )


def test_er_coupling_p0_and_monotone():
    cfg = CouplingConfig(p=0.0, k=3, factor=F, host=ErdosRenyiHost(120, 2.0),
                         trials=40, seed=16)
    est, profiles = coupled_er_intersections(cfg)
    rows = profiles.rows
    assert np.array_equal(rows[:, 0b001], rows[:, 0b111])
    cfg2 = CouplingConfig(p=0.6, k=3, factor=F, host=ErdosRenyiHost(120, 2.0),
                          trials=40, seed=17)
    est2, profiles2 = coupled_er_intersections(cfg2)
    prefix = est2.prefix_rows
    assert np.all(np.diff(prefix, axis=1) <= 1e-12)


def test_er_coupling_p1_product():
    cfg = CouplingConfig(p=1.0, k=2, factor=F, host=ErdosRenyiHost(150, 2.0),
                         trials=200, seed=18)
    est, _ = coupled_er_intersections(cfg)
    m1, se1 = est.density(1)
    m2, se2 = est.density(2)
    assert_within_sigma(m2, m1 * m1, se2, 2 * m1 * se1, context="er p=1 product")


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------


def test_stability_p0_constant_one():
    est = estimate_stability(tree_cfg(0.0, trials=400, inner=50, seed=19))
    assert np.all(est.q_values == 1.0)
    for m, (val, _) in est.moments.items():
        assert val == 1.0


def test_stability_p1_density_moments():
    cfg = tree_cfg(1.0, trials=4000, inner=400, seed=20)
    est = estimate_stability(cfg)
    dens = 0.25
    for m in (1, 2):
        val, se = est.moments[m]
        # inner-trial binomial noise contributes O(1/inner) on top of se
        assert_within_sigma(val, dens**m, se, 2.0 / cfg.inner_trials,
                            context=f"p=1 moment {m}")


def test_stability_moment_consistency():
    # E*[Q^(i-1)] * density tracks the i-wise intersection density
    p = 0.5
    stab = estimate_stability(tree_cfg(p, trials=10_000, inner=300, seed=21))
    inter = coupled_tree_intersections(tree_cfg(p, trials=80_000, seed=22))
    dens, dens_se = stab.density
    for i in (1, 2, 3):
        m, se_m = stab.moments[i - 1]
        lhs = m * dens
        rhs, rhs_se = inter.density(i)
        assert_within_sigma(
            lhs, rhs, se_m * dens, m * dens_se, rhs_se,
            context=f"moment consistency i={i}",
        )


def test_stability_conditioning_failure():
    cfg = CouplingConfig(p=0.5, k=2, factor=constant_factor(0), host=T3,
                         trials=30, inner_trials=10, seed=23)
    with pytest.raises(ConditioningError):
        estimate_stability(cfg)


def test_stability_er_host_runs():
    cfg = CouplingConfig(p=0.5, k=2, factor=F, host=ErdosRenyiHost(60, 2.0),
                         trials=120, inner_trials=50, seed=24)
    est = estimate_stability(cfg)
    assert est.accepted > 0
    assert est.moments[0][0] == 1.0
    assert 0.0 <= est.moments[1][0] <= 1.0


def test_stability_config_host_runs():
    cfg = CouplingConfig(p=0.5, k=2, factor=F, host=ConfigModelHost(60, 3),
                         trials=120, inner_trials=50, seed=25)
    est = estimate_stability(cfg)
    assert est.accepted > 0


def test_stability_workers_deterministic():
    cfg = tree_cfg(0.4, trials=600, inner=60, seed=26)
    a = estimate_stability(cfg)
    cfg8 = tree_cfg(0.4, trials=600, inner=60, seed=26)
    cfg8.workers = 4
    b = estimate_stability(cfg8)
    assert a.moments == b.moments


# ---------------------------------------------------------------------------
# scans and p targeting
# ---------------------------------------------------------------------------


def test_scan_p_endpoints_and_shape():
    cfg = tree_cfg(0.0, trials=4000, inner=100, seed=27)
    result = scan_p(cfg, [0.0, 0.5, 1.0])
    assert len(result.rows) == 3
    row0 = result.rows[0]
    assert row0.intersections.means[0] == row0.intersections.means[2]
    assert row0.stability.moments[2][0] == 1.0
    row1 = result.rows[-1]
    m1 = row1.intersections.means[0]
    assert_within_sigma(
        row1.intersections.means[1], m1 * m1,
        row1.intersections.stderrs[1], 2 * m1 * row1.intersections.stderrs[0],
        context="scan p=1 endpoint",
    )
    assert "binom_k2" in row0.binom_stats and "binom_k3" in row0.binom_stats


def test_scan_refinement_shrinks_jumps():
    cfg = tree_cfg(0.0, k=2, trials=20_000, inner=50, seed=28)
    coarse = scan_p(cfg, [0.0, 0.5, 1.0])
    fine = scan_p(cfg, [0.0, 0.25, 0.5, 0.75, 1.0])
    noise = 6 * max(r.intersections.stderrs.max() for r in fine.rows)
    assert fine.max_adjacent_jump() <= coarse.max_adjacent_jump() / 2 + noise


def test_find_p_trivial_targets():
    cfg = tree_cfg(0.5, k=2, trials=1500, inner=150, seed=29)
    p0, est0, _ = find_p_for_moment(cfg, 1.0, 1.0)
    assert p0 == 0.0 and est0 == 1.0
    # at p=1 the moment is the plain density, 1/4 for this factor on T_3
    p1, est1, se1 = find_p_for_moment(cfg, 1.0, 0.25)
    assert p1 >= 0.8
    assert abs(est1 - 0.25) <= 3 * se1


def test_find_p_intermediate():
    cfg = tree_cfg(0.5, k=2, trials=2000, inner=200, seed=30)
    p_star, est, se = find_p_for_moment(cfg, 1.0, 0.6)
    assert 0.0 < p_star < 1.0
    assert abs(est - 0.6) <= 3 * se


def test_find_p_no_crossing():
    cfg = tree_cfg(0.5, k=2, trials=400, inner=50, seed=31)
    with pytest.raises(ConditioningError):
        find_p_for_moment(cfg, 1.0, 2.5)
