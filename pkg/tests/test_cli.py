import json
import math

from localis.cli import main
from localis.io import load_manifest


def run(args):
    return main(args)


def read(path):
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------


def test_density_command_and_replay(tmp_path):
    out = str(tmp_path / "dens.csv")
    code = run(["density", "--factor", "threshold", "--host", "regular-tree",
                "--d", "3", "--trials", "3000", "--seed", "5", "--out", out])
    assert code == 0
    lines = read(out).strip().splitlines()
    assert lines[0] == "kind,params,trials,mean,stderr,seed"
    fields = lines[1].split(",")
    mean = float(fields[3])
    assert 0.2 < mean < 0.3
    manifest = load_manifest(out + ".manifest.json")
    assert manifest["command"] == "density" and manifest["seed"] == 5
    out2 = str(tmp_path / "dens2.csv")
    assert run(["replay", out + ".manifest.json", "--out", out2]) == 0
    assert read(out) == read(out2)


def test_density_const0(tmp_path):
    out = str(tmp_path / "c0.csv")
    assert run(["density", "--factor", "const0", "--host", "regular-tree",
                "--d", "3", "--trials", "50", "--seed", "1", "--out", out]) == 0
    fields = read(out).strip().splitlines()[1].split(",")
    assert float(fields[3]) == 0.0


def test_density_graph_host(tmp_path):
    out = str(tmp_path / "g.csv")
    assert run(["density", "--factor", "threshold", "--host", "config-model",
                "--n", "60", "--d", "3", "--trials", "20", "--seed", "2",
                "--out", out]) == 0
    fields = read(out).strip().splitlines()[1].split(",")
    assert 0.0 < float(fields[3]) < 0.456


def test_density_usage_error(tmp_path):
    out = str(tmp_path / "x.csv")
    code = run(["density", "--factor", "lw", "--host", "regular-tree",
                "--d", "3", "--trials", "10", "--out", out])
    assert code == 2  # lw requires --lw-p and --lw-k


# ---------------------------------------------------------------------------
# scan-p and stability
# ---------------------------------------------------------------------------


def test_scan_p_outputs(tmp_path):
    out = str(tmp_path / "scan")
    code = run(["scan-p", "--factor", "threshold", "--host", "regular-tree",
                "--d", "3", "--k", "3", "--grid", "0,1",
                "--trials", "2000", "--inner-trials", "50",
                "--seed", "3", "--out", out])
    assert code == 0
    inter = read(out + ".intersections.csv").strip().splitlines()
    assert inter[0].startswith("host,factor_kind,d_or_lam,n,p,k,i,mean")
    assert len(inter) == 1 + 2 * 3  # |grid| * k rows
    stab = read(out + ".stability.csv").strip().splitlines()
    assert len(stab) == 1 + 2 * 3
    binom = read(out + ".binom.csv").strip().splitlines()
    # k2 and k3 statistics per grid point, plus the smoothness report
    assert len(binom) == 1 + 2 * 2 + 1
    # the emitted k=2 statistic matches its definition recomputed offline
    rows = [line.split(",") for line in inter[1:]]
    p0 = [r for r in rows if float(r[4]) == 0.0]
    scale = math.log(3) / 3
    a1, a2 = float(p0[0][7]) / scale, float(p0[1][7]) / scale
    expected = 2 * a1 * (2 - a1) - a2 * (2 - a2)
    b0 = [line.split(",") for line in binom[1:] if "binom_k2@p=0" in line][0]
    assert abs(float(b0[4]) - expected) < 1e-12
    manifest = load_manifest(out + ".manifest.json")
    assert len(manifest["outputs"]) == 3


def test_scan_p_replay_identical(tmp_path):
    out = str(tmp_path / "scan")
    args = ["scan-p", "--factor", "threshold", "--host", "regular-tree",
            "--d", "3", "--k", "2", "--grid", "0,0.5",
            "--trials", "500", "--inner-trials", "30", "--seed", "4",
            "--out", out]
    assert run(args) == 0
    originals = {
        suffix: read(out + suffix)
        for suffix in (".intersections.csv", ".stability.csv", ".binom.csv")
    }
    out2 = str(tmp_path / "scan2")
    assert run(["replay", out + ".manifest.json", "--out", out2]) == 0
    for suffix, text in originals.items():
        assert read(out2 + suffix) == text


def test_stability_command(tmp_path):
    out = str(tmp_path / "stab.csv")
    assert run(["stability", "--factor", "threshold", "--host", "regular-tree",
                "--d", "3", "--k", "3", "--p", "0", "--trials", "400",
                "--inner-trials", "40", "--seed", "5", "--out", out]) == 0
    lines = read(out).strip().splitlines()
    assert len(lines) == 4
    for line in lines[1:]:
        assert float(line.split(",")[7]) == 1.0  # all moments 1 at p=0


def test_stability_conditioning_guard(tmp_path):
    out = str(tmp_path / "stab.csv")
    code = run(["stability", "--factor", "const0", "--host", "regular-tree",
                "--d", "3", "--k", "2", "--p", "0.5", "--trials", "20",
                "--inner-trials", "10", "--seed", "6", "--out", out])
    assert code == 3


# ---------------------------------------------------------------------------
# bounds and oracle-check
# ---------------------------------------------------------------------------


def test_bounds_report(tmp_path):
    out = str(tmp_path / "bounds.json")
    assert run(["bounds", "--alpha", "1,1", "--d", "1000", "--self-test",
                "--out", out]) == 0
    report = json.loads(read(out))
    assert abs(report["leading_term"] - math.log(1000) ** 2 / 2000) < 1e-15
    assert report["self_test"]["relative_error"] < 1e-9


def test_bounds_malformed_profile_guard(tmp_path):
    out = str(tmp_path / "bounds.json")
    # increasing alpha violates monotonicity of the density profile
    code = run(["bounds", "--alpha", "0.2,1.5", "--d", "1000", "--out", out])
    assert code == 3


def test_oracle_check_passes(tmp_path):
    out = str(tmp_path / "oc.csv")
    assert run(["oracle-check", "--n", "4", "--d", "3", "--out", out]) == 0
    lines = read(out).strip().splitlines()
    worst = float(lines[-1].split(",")[-1])
    assert worst <= 1e-9


def test_oracle_check_guard_on_impossible_tolerance(tmp_path):
    out = str(tmp_path / "oc.csv")
    code = run(["oracle-check", "--n", "4", "--d", "3", "--tol", "0",
                "--out", out])
    assert code == 3


# ---------------------------------------------------------------------------
# pgw-transfer
# ---------------------------------------------------------------------------


def test_pgw_transfer_schedule(tmp_path):
    out = str(tmp_path / "pgw.csv")
    assert run(["pgw-transfer", "--factor", "threshold", "--lam", "10",
                "--schedule-u", "0.75", "--trials", "4000",
                "--check-event-mc", "--seed", "7", "--out", out]) == 0
    lines = read(out).strip().splitlines()
    header = lines[0].split(",")
    assert header == ["lambda", "d", "trials", "density_J", "stderr",
                      "density_I", "P_E_exact", "lower", "upper", "seed"]
    row = dict(zip(header, lines[1].split(",")))
    assert int(row["d"]) == math.ceil(10 + 10**0.75)
    dj, lo, hi, se = (float(row[k]) for k in ("density_J", "lower", "upper", "stderr"))
    assert lo - 3 * se <= dj <= hi + 3 * se


def test_pgw_transfer_schedule_window_guard(tmp_path):
    out = str(tmp_path / "pgw.csv")
    for bad in ("0.5", "1.0", "0.2"):
        code = run(["pgw-transfer", "--factor", "threshold", "--lam", "10",
                    "--schedule-u", bad, "--trials", "10", "--out", out])
        assert code == 2


def test_pgw_transfer_requires_d_or_schedule(tmp_path):
    out = str(tmp_path / "pgw.csv")
    code = run(["pgw-transfer", "--factor", "threshold", "--lam", "10",
                "--trials", "10", "--out", out])
    assert code == 2


# ---------------------------------------------------------------------------
# output hygiene
# ---------------------------------------------------------------------------


def test_all_numeric_columns_finite(tmp_path):
    out = str(tmp_path / "scan")
    run(["scan-p", "--factor", "threshold", "--host", "regular-tree",
         "--d", "3", "--k", "2", "--grid", "0,0.5,1", "--trials", "500",
         "--inner-trials", "30", "--seed", "8", "--out", out])
    for suffix in (".intersections.csv", ".stability.csv", ".binom.csv"):
        for line in read(out + suffix).strip().splitlines()[1:]:
            for field in line.split(","):
                try:
                    value = float(field)
                except ValueError:
                    continue
                assert math.isfinite(value)


def test_json_format(tmp_path):
    out = str(tmp_path / "dens.json")
    assert run(["density", "--factor", "threshold", "--host", "regular-tree",
                "--d", "3", "--trials", "200", "--seed", "9",
                "--format", "json", "--out", out]) == 0
    payload = json.loads(read(out))
    assert isinstance(payload, list) and payload[0]["trials"] == 200
