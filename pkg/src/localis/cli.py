"""Command-line front-end: reproducible experiments with CSV/JSON artifacts.

Subcommands: density, scan-p, stability, bounds, oracle-check, pgw-transfer,
replay.  Every run writes <out>.manifest.json recording the resolved
parameters; `localis replay <manifest>` reruns the command and reproduces the
output files byte-for-byte.

Exit codes: 0 ok, 2 usage error, 3 numerical guard (inconsistent profile,
unobserved conditioning event, failed oracle check).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .coupling import ConditioningError, CouplingConfig, estimate_stability, scan_p
from .factors import (
    estimate_tree_density,
    factor_from_spec,
    factor_spec,
    project_to_graph,
)
from .graphs import (
    ConfigModelHost,
    ErdosRenyiHost,
    PGWTreeHost,
    RegularTreeHost,
    sample_config_model,
    sample_er,
)
from .io import fmt, load_manifest, write_csv, write_json, write_manifest
from .parallel import mean_stderr, run_trials
from .profiles import (
    DensityProfile,
    ProfileError,
    asymptotic_rate,
    binom_sum,
    entropies,
    expected_Z_total,
    mean_brute_force_Z,
    rate_bound,
    rho_to_pi,
)
from .pgw_transfer import schedule_tail_bound, transfer_density
from .rng import fold, state_rng, trial_state, uniform_labels

COUPLING_HEADER = [
    "host", "factor_kind", "d_or_lam", "n", "p", "k", "i",
    "mean", "stderr", "trials", "seed",
]
BOUND_HEADER = ["n", "d_or_lam", "k", "description", "value"]


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Spec parsing
# ---------------------------------------------------------------------------


def _build_factor(params: dict):
    kind = params["factor"]
    if kind == "lw":
        if params.get("lw_p") is None or params.get("lw_k") is None:
            raise UsageError("factor 'lw' requires --lw-p and --lw-k")
        spec = {"kind": "lauer-wormald",
                "params": {"p": params["lw_p"], "k": params["lw_k"]}}
    elif kind == "threshold":
        spec = {"kind": "greedy-threshold", "params": {}}
    elif kind in ("const0", "const1"):
        spec = {"kind": "const", "params": {"bit": int(kind[-1])}}
    else:
        raise UsageError(f"unknown factor: {kind!r}")
    return factor_from_spec(spec)


def _build_host(params: dict):
    host = params["host"]
    if host == "regular-tree":
        if params.get("d") is None:
            raise UsageError("host 'regular-tree' requires --d")
        return RegularTreeHost(params["d"])
    if host == "pgw":
        if params.get("lam") is None:
            raise UsageError("host 'pgw' requires --lam")
        return PGWTreeHost(params["lam"])
    if host == "config-model":
        if params.get("n") is None or params.get("d") is None:
            raise UsageError("host 'config-model' requires --n and --d")
        return ConfigModelHost(params["n"], params["d"])
    if host == "er":
        if params.get("n") is None or params.get("lam") is None:
            raise UsageError("host 'er' requires --n and --lam")
        return ErdosRenyiHost(params["n"], params["lam"])
    raise UsageError(f"unknown host: {host!r}")


def _host_columns(host):
    if isinstance(host, RegularTreeHost):
        return "regular-tree", host.d, 0
    if isinstance(host, PGWTreeHost):
        return "pgw", host.lam, 0
    if isinstance(host, ConfigModelHost):
        return "config-model", host.d, host.n
    return "er", host.lam, host.n


def _emit(params: dict, path: str, header: list, rows: list) -> str:
    if params.get("format", "csv") == "json":
        payload = [dict(zip(header, row)) for row in rows]
        write_json(path, payload)
    else:
        write_csv(path, header, rows)
    return path


# ---------------------------------------------------------------------------
# Commands (each takes resolved params, returns (outputs, trials))
# ---------------------------------------------------------------------------


def cmd_density(params: dict):
    factor = _build_factor(params)
    host = _build_host(params)
    trials, seed, workers = params["trials"], params["seed"], params["workers"]
    if isinstance(host, (RegularTreeHost, PGWTreeHost)):
        est = estimate_tree_density(factor, host, trials, seed, workers)
        mean, stderr = est.mean, est.stderr
    else:
        def one(t: int):
            st = trial_state(seed, t)
            if isinstance(host, ConfigModelHost):
                g = sample_config_model(host.n, host.d, fold(st, 1))
            else:
                g = sample_er(host.n, host.lam, fold(st, 1))
            labels = uniform_labels(state_rng(fold(st, 2)), host.n)
            sample = project_to_graph(factor, g, labels)
            return [sample.bits.mean()]

        rows = run_trials(one, trials, workers)
        mean, stderr = mean_stderr(rows[:, 0])
    row = [
        factor.kind,
        json.dumps(factor_spec(factor)["params"], sort_keys=True).replace(",", ";"),
        trials,
        mean,
        stderr,
        seed,
    ]
    out = params["out"]
    _emit(params, out, ["kind", "params", "trials", "mean", "stderr", "seed"], [row])
    return [out], trials


def _coupling_config(params: dict, p: float) -> CouplingConfig:
    return CouplingConfig(
        p=p,
        k=params["k"],
        factor=_build_factor(params),
        host=_build_host(params),
        trials=params["trials"],
        inner_trials=params["inner_trials"],
        seed=params["seed"],
        workers=params["workers"],
    )


def cmd_scan_p(params: dict):
    grid = [float(x) for x in params["grid"].split(",") if x != ""]
    if not grid or any(not 0.0 <= p <= 1.0 for p in grid):
        raise UsageError("grid must be a comma list of values in [0, 1]")
    cfg = _coupling_config(params, grid[0])
    result = scan_p(cfg, grid)
    hostname, d_or_lam, n = _host_columns(cfg.host)
    inter_rows, stab_rows, binom_rows = [], [], []
    for row in result.rows:
        for i in range(1, cfg.k + 1):
            m, se = row.intersections.density(i)
            inter_rows.append(
                [hostname, cfg.factor.kind, d_or_lam, n, row.p, cfg.k, i,
                 m, se, cfg.trials, cfg.seed]
            )
            m, se = row.stability.moment(i - 1)
            stab_rows.append(
                [hostname, cfg.factor.kind, d_or_lam, n, row.p, cfg.k, i,
                 m, se, cfg.trials, cfg.seed]
            )
        for name, val in sorted(row.binom_stats.items()):
            binom_rows.append([n, d_or_lam, cfg.k, f"{name}@p={fmt(row.p)}", val])
    binom_rows.append(
        [n, d_or_lam, cfg.k, "max_adjacent_jump", result.max_adjacent_jump()]
    )
    out = params["out"]
    outputs = [
        _emit(params, out + ".intersections.csv", COUPLING_HEADER, inter_rows),
        _emit(params, out + ".stability.csv", COUPLING_HEADER, stab_rows),
        _emit(params, out + ".binom.csv", BOUND_HEADER, binom_rows),
    ]
    return outputs, params["trials"]


def cmd_stability(params: dict):
    p = params["p"]
    if not 0.0 <= p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    cfg = _coupling_config(params, p)
    est = estimate_stability(cfg)
    hostname, d_or_lam, n = _host_columns(cfg.host)
    rows = []
    for i in range(1, cfg.k + 1):
        m, se = est.moment(i - 1)
        rows.append(
            [hostname, cfg.factor.kind, d_or_lam, n, p, cfg.k, i,
             m, se, cfg.trials, cfg.seed]
        )
    out = params["out"]
    _emit(params, out, COUPLING_HEADER, rows)
    return [out], params["trials"]


def cmd_bounds(params: dict):
    alpha = [float(x) for x in params["alpha"].split(",") if x != ""]
    if not alpha:
        raise UsageError("--alpha must be a comma list of values")
    k = len(alpha)
    d = params.get("d")
    if d is None:
        raise UsageError("bounds requires --d")
    scale = math.log(d) / d
    profile = DensityProfile.symmetric(k, alpha, scale)
    measure = rho_to_pi(profile)
    rep = entropies(measure)
    leading, gap = asymptotic_rate(alpha, k, d)
    report = {
        "k": k,
        "d": d,
        "alpha": alpha,
        "binom_sum": binom_sum(alpha),
        "H_pi": rep.h_pi,
        "H_hat": rep.h_hat,
        "rate_bound": rate_bound(measure, d),
        "leading_term": leading,
        "gap": gap,
    }
    if params.get("self_test"):
        dp = DensityProfile(1, np.array([1.0, 0.5]))
        exact = expected_Z_total(dp, 2, 2)
        brute = mean_brute_force_Z(dp, 2, 2)
        report["self_test"] = {
            "n": 2, "d": 2, "formula": exact, "enumeration": brute,
            "relative_error": abs(exact - brute) / brute,
        }
        if report["self_test"]["relative_error"] > 1e-9:
            raise ProfileError("bounds self-test failed the oracle comparison")
    out = params["out"]
    write_json(out, report)
    return [out], None


def cmd_oracle_check(params: dict):
    n, d = params["n"], params["d"]
    if n is None or d is None:
        raise UsageError("oracle-check requires --n and --d")
    if n * d % 2:
        raise UsageError("n*d must be even")
    tol = params["tol"]
    rows = []
    worst = 0.0
    for m in range(n + 1):
        profile = DensityProfile(1, np.array([1.0, m / n]))
        exact = expected_Z_total(profile, n, d)
        brute = mean_brute_force_Z(profile, n, d)
        rel = abs(exact - brute) / max(1.0, abs(brute))
        worst = max(worst, rel)
        rows.append([n, d, 1, f"set_size={m}:formula_vs_enumeration", rel])
    rows.append([n, d, 1, "worst_relative_error", worst])
    out = params["out"]
    _emit(params, out, BOUND_HEADER, rows)
    if worst > tol:
        raise ProfileError(
            f"oracle check failed: worst relative error {worst:.3e} > {tol:.1e}"
        )
    return [out], None


def cmd_pgw_transfer(params: dict):
    lam = params["lam"]
    if lam is None or lam <= 0:
        raise UsageError("pgw-transfer requires --lam > 0")
    if params.get("schedule_u") is not None:
        u = params["schedule_u"]
        if not 0.5 < u < 1.0:
            raise UsageError("--schedule-u must lie strictly between 1/2 and 1")
        schedule_tail_bound(100, u)  # validates the same window
        d = math.ceil(lam + lam**u)
    elif params.get("d") is not None:
        d = params["d"]
    else:
        raise UsageError("pgw-transfer requires --d or --schedule-u")
    factor = _build_factor(params)
    rep = transfer_density(
        factor, lam, d, params["trials"], params["seed"], params["workers"]
    )
    if params.get("check_event_mc"):
        z = abs(rep.p_event_mc - rep.p_event_exact) / max(rep.stderr_event, 1e-12)
        if z > 3.0:
            raise ProfileError(
                f"exact event probability {rep.p_event_exact:.6f} disagrees with "
                f"Monte Carlo {rep.p_event_mc:.6f} (z = {z:.2f})"
            )
    header = ["lambda", "d", "trials", "density_J", "stderr", "density_I",
              "P_E_exact", "lower", "upper", "seed"]
    row = [lam, d, rep.trials, rep.density_j, rep.stderr_j, rep.density_i,
           rep.p_event_exact, rep.lower, rep.upper, params["seed"]]
    out = params["out"]
    _emit(params, out, header, [row])
    return [out], params["trials"]


def cmd_replay(params: dict):
    manifest = load_manifest(params["manifest"])
    command = manifest["command"]
    replay_params = dict(manifest["params"])
    if params.get("out"):
        replay_params["out"] = params["out"]
    fn = COMMANDS[command]
    outputs, trials = fn(replay_params)
    write_manifest(
        replay_params["out"], command, replay_params, outputs, __version__,
        0.0, trials,
    )
    return outputs, trials


COMMANDS = {
    "density": cmd_density,
    "scan-p": cmd_scan_p,
    "stability": cmd_stability,
    "bounds": cmd_bounds,
    "oracle-check": cmd_oracle_check,
    "pgw-transfer": cmd_pgw_transfer,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp, trials_default=10000):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=trials_default)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")


def _add_factor(sp):
    sp.add_argument("--factor", choices=["lw", "threshold", "const0", "const1"],
                    default="threshold")
    sp.add_argument("--lw-p", type=float, dest="lw_p")
    sp.add_argument("--lw-k", type=int, dest="lw_k")


def _add_host(sp):
    sp.add_argument("--host",
                    choices=["regular-tree", "pgw", "config-model", "er"],
                    default="regular-tree")
    sp.add_argument("--d", type=int)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--n", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localis",
        description="Local-algorithm independent set simulation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("density", help="Monte Carlo density of a factor")
    _add_factor(sp); _add_host(sp); _add_common(sp)

    sp = sub.add_parser("scan-p", help="couplings over a grid of p values")
    _add_factor(sp); _add_host(sp); _add_common(sp, 2000)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--inner-trials", type=int, dest="inner_trials", default=200)
    sp.add_argument("--grid", default="0,0.25,0.5,0.75,1")

    sp = sub.add_parser("stability", help="nested stability moments at one p")
    _add_factor(sp); _add_host(sp); _add_common(sp, 2000)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--inner-trials", type=int, dest="inner_trials", default=400)
    sp.add_argument("--p", type=float, required=True)

    sp = sub.add_parser("bounds", help="entropy rate bound report for alpha values")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--self-test", action="store_true", dest="self_test")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("oracle-check",
                        help="exact-count formula vs full pairing enumeration")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("pgw-transfer", help="three-stage density transfer report")
    _add_factor(sp); _add_common(sp, 20000)
    sp.add_argument("--lam", type=float, required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--schedule-u", type=float, dest="schedule_u")
    sp.add_argument("--check-event-mc", action="store_true", dest="check_event_mc")

    sp = sub.add_parser("replay", help="re-run a recorded manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k != "command"}
    command = args.command
    started = time.time()
    try:
        outputs, trials = COMMANDS.get(command, cmd_replay)(params)
    except (ProfileError, ConditioningError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if command != "replay":
        write_manifest(
            params["out"], command, params, outputs, __version__,
            time.time() - started, trials,
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
