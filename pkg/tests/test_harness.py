import csv
import io
import math
import subprocess
import sys
from math import comb

import pytest

from advrsr.dataset import fixture_axis_split, save_dataset
from advrsr.errors import ConfigError, NonMonotoneWarning
from advrsr.harness import loads_config
from advrsr.harness.cli import main
from advrsr.harness.report import half_crossing, report_phase_transition
from advrsr.harness.sweep import (
    SUMMARY_COLUMNS,
    TRIAL_COLUMNS,
    mix_seed,
    run_sweep,
    run_trial,
    splitmix64,
    summarize,
    summary_csv,
    sweep,
    trials_csv,
)

SMALL = """
[experiment]
base_seed = 3
trials_per_cell = 3

[model]
name = adversarial_line
D = 6
d = 2
N_in = 30
snr_factor = 0.5, 2

[estimator.spca]
[estimator.sggd]
max_iter = 200
[estimator.ransac]
"""


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------- config


def test_config_parses_axes_and_estimators():
    cfg = loads_config(SMALL)
    assert cfg.model == "adversarial_line"
    assert cfg.model_params["snr_factor"] == [0.5, 2]
    assert [n for n, _ in cfg.estimators] == ["spca", "sggd", "ransac"]
    assert cfg.estimators[1][1] == {"max_iter": 200}
    assert len(cfg.cells()) == 2 and cfg.axes == ["snr_factor"]


@pytest.mark.parametrize("text, needle", [
    ("[model]\nname = nope\nD=3\nd=1\n[estimator.spca]\n", "unknown model"),
    ("[model]\nname = haystack\nD=3\nd=1\n[estimator.spca]\n", "missing field"),
    ("[model]\nname = haystack\nD=3\nd=1\nN=5\nfoo=1\n[estimator.spca]\n", "foo"),
    ("[model]\nname = haystack\nD=3\nd=1\nN=5\n[estimator.sggd]\nbogus=2\n", "estimator.sggd"),
    ("[model]\nname = haystack\nD=3\nd=1\nN=5\nN_out=1\nsnr=2\n[estimator.spca]\n", "only one"),
    ("[model]\nname = haystack\nD=3\nd=1\nN=5\n", "no [estimator"),
    ("[experiment]\ntrials_per_cell = 0\n[model]\nname = haystack\nD=3\nd=1\nN=5\n[estimator.spca]\n",
     "trials_per_cell"),
    ("[model]\nname = haystack\nD=3\nD=4\n", "line"),
])
def test_config_errors_carry_context(text, needle):
    with pytest.raises(ConfigError) as exc:
        loads_config(text, "cfg.ini")
    assert "cfg.ini" in str(exc.value) and needle in str(exc.value)


# ---------------------------------------------------------------- seeds and trials


def test_splitmix64_reference_values():
    # first outputs of the reference generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert 0 <= mix_seed(2**70, 3, 4) < 2**64


def test_mix_seed_distinct_and_stable():
    seeds = {mix_seed(7, c, t) for c in range(20) for t in range(50)}
    assert len(seeds) == 1000
    assert mix_seed(7, 1, 2) == mix_seed(7, 1, 2) != mix_seed(7, 2, 1)


def test_run_trial_bit_identical():
    cell = {"D": 8, "d": 2, "N_in": 40, "snr_factor": 1.5, "magnitude": 1e9}
    a = run_trial("adversarial_line", cell, "sggd", {"max_iter": 300}, seed=11)
    b = run_trial("adversarial_line", cell, "sggd", {"max_iter": 300}, seed=11)
    assert a.row() == b.row()


@pytest.mark.parametrize("est", ["spca", "sggd", "ransac"])
def test_haystack_without_outliers_recovered(est):
    cell = {"D": 10, "d": 3, "N": 40, "N_out": 0}
    r = run_trial("haystack", cell, est, {}, seed=5)
    assert r.status == "ok" and r.recovered
    assert math.isinf(r.snr)


def test_errors_are_recorded_not_raised():
    cell = {"D": 3, "d": 5, "N": 10, "N_out": 2}
    r = run_trial("haystack", cell, "sggd", {}, seed=1)
    assert r.status.startswith("error:") and not r.recovered


def test_adversarial_rate_rises_across_threshold():
    cfg = loads_config(SMALL.replace("trials_per_cell = 3", "trials_per_cell = 20")
                       .replace("[estimator.spca]\n", "").replace("[estimator.ransac]\n", ""))
    rows = summarize(run_sweep(cfg, workers=1), cfg)
    low, high = (r["recovery_rate"] for r in rows)
    assert high > low
    assert high >= 0.95


# ---------------------------------------------------------------- sweep files


def test_sweep_bytes_reproducible_and_parallel_equal(tmp_path):
    cfg = loads_config(SMALL)
    a = sweep(cfg, workers=1, output_dir=tmp_path / "a")
    b = sweep(cfg, workers=1, output_dir=tmp_path / "b")
    c = sweep(cfg, workers=3, output_dir=tmp_path / "c")
    for kind in ("trials", "summary"):
        assert a[kind].read_bytes() == b[kind].read_bytes() == c[kind].read_bytes()
    header = a["trials"].read_text().splitlines()[0]
    assert header == ",".join(TRIAL_COLUMNS)
    assert a["summary"].read_text().splitlines()[0] == ",".join(SUMMARY_COLUMNS)
    assert "wall_time_ms" not in header
    rows = read_csv(a["trials"].read_text())
    assert len(rows) == 2 * 3 * 3
    assert [(int(r["cell"]), int(r["trial"])) for r in rows] == sorted(
        (int(r["cell"]), int(r["trial"])) for r in rows)


def test_summary_rate_is_mean_of_trials():
    cfg = loads_config(SMALL)
    results = run_sweep(cfg, workers=1)
    trials = read_csv(trials_csv(results))
    for row in read_csv(summary_csv(summarize(results, cfg))):
        rec = [int(t["recovered"]) for t in trials
               if t["cell"] == row["cell"] and t["estimator"] == row["estimator"]]
        assert float(row["recovery_rate"]) == sum(rec) / len(rec)


def test_floats_have_17_digits_and_inf_snr():
    cfg = loads_config("""
[experiment]
trials_per_cell = 1
[model]
name = haystack
D = 5
d = 2
N = 20
N_out = 0, 4
[estimator.spca]
""")
    results = run_sweep(cfg, workers=1)
    rows = read_csv(trials_csv(results))
    assert rows[0]["snr"] == "inf"
    assert float(rows[1]["snr"]) == 16 / 4
    summ = read_csv(summary_csv(summarize(results, cfg)))
    assert summ[0]["snr"] == "inf"
    k = rows[1]["kappa_d"]
    assert float(k) == results[1].kappa_d  # round-trips exactly


def test_ransac_mean_iterations_match_geometric_model():
    # stopping needs consensus above m = N/2, so the grid keeps alpha > 1/2
    cfg = loads_config("""
[experiment]
trials_per_cell = 60
[model]
name = haystack
D = 6
d = 3
N = 200
N_out = 20, 40, 60
[estimator.ransac]
tau = 0
""")
    for row in summarize(run_sweep(cfg, workers=1), cfg):
        n_in = int(round(row["N_in"]))
        predicted = comb(200, 3) / comb(n_in, 3)
        assert 0.5 * predicted <= row["mean_iterations"] <= 2 * predicted
        assert row["recovery_rate"] == 1.0


def test_haystack_sweep_at_twice_the_bound():
    cfg = loads_config("""
[experiment]
trials_per_cell = 20
[model]
name = haystack
D = 100
d = 2
N = 200
snr_factor = 2
[estimator.sggd]
""")
    (row,) = summarize(run_sweep(cfg, workers=1), cfg)
    assert row["recovery_rate"] >= 0.95


# ---------------------------------------------------------------- report


def test_half_crossing():
    assert half_crossing([1, 2, 4], [1.0, 1.0, 1.0]) == (None, "< 1")
    assert half_crossing([1, 2, 4], [0.0, 0.1, 0.2]) == (None, "> 4")
    x, label = half_crossing([1, 2, 4], [0.0, 0.25, 0.75])
    assert x == pytest.approx(3.0) and label == "3"


def _write_summary(path, rates, xs=(1, 2, 3)):
    rows = []
    for i, (x, r) in enumerate(zip(xs, rates)):
        rows.append({c: "" for c in SUMMARY_COLUMNS} | {
            "cell": i, "estimator": "sggd", "axes": f"snr_factor={x}", "snr": x,
            "recovery_rate": r, "sggd_threshold": 2.5, "info_bound": 1.1, "haystack_bound": "nan"})
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def test_report_interpolates_and_writes_csv(tmp_path):
    p = tmp_path / "summary.csv"
    _write_summary(p, [0.0, 0.4, 0.8])
    text, crossings, paths = report_phase_transition(p)
    assert crossings[0].crossing == pytest.approx(2.25)
    assert "2.25" in text and "sggd_threshold=2.5" in text
    assert paths[0].read_text().splitlines()[0] == "snr,recovery_rate"
    assert len(paths[0].read_text().splitlines()) == 4


def test_report_warns_on_non_monotone(tmp_path):
    p = tmp_path / "summary.csv"
    _write_summary(p, [0.2, 0.9, 0.6])
    with pytest.warns(NonMonotoneWarning):
        _, crossings, _ = report_phase_transition(p)
    assert not crossings[0].monotone


def test_report_reads_sweep_axis(tmp_path):
    p = tmp_path / "summary.csv"
    _write_summary(p, [0.0, 0.5, 1.0], xs=(0.5, 1, 2))
    _, crossings, paths = report_phase_transition(p, x_col="snr_factor")
    assert crossings[0].xs == [0.5, 1.0, 2.0] and crossings[0].crossing == pytest.approx(1.0)
    assert paths[0].read_text().startswith("snr_factor,recovery_rate")
    with pytest.raises(KeyError):
        report_phase_transition(p, x_col="magnitude")


def test_report_all_recovered(tmp_path):
    p = tmp_path / "summary.csv"
    _write_summary(p, [1.0, 1.0, 1.0])
    text, _, _ = report_phase_transition(p)
    assert "< 1" in text


# ---------------------------------------------------------------- cli


def test_cli_gen_fit_oracle_diag(tmp_path, capsys):
    ds_path = tmp_path / "ds.txt"
    assert main(["gen", "adversarial_line", "-o", str(ds_path), "--set", "D=6", "--set", "d=2",
                 "--set", "N_in=20", "--set", "snr_factor=2", "--seed", "4"]) == 0
    assert main(["fit", str(ds_path), "-e", "sggd", "--trace", str(tmp_path / "t.csv")]) == 0
    out = capsys.readouterr().out.strip().splitlines()[-1]
    kv = dict(item.split("=", 1) for item in out.split())
    assert kv["estimator"] == "sggd" and float(kv["theta1"]) < 1e-6
    assert (tmp_path / "t.csv").exists()
    assert main(["diag", str(ds_path), "--csv", str(tmp_path / "d.csv")]) == 0
    assert main(["diag", str(ds_path), "--csv", str(tmp_path / "d.csv")]) == 0
    assert len((tmp_path / "d.csv").read_text().splitlines()) == 3

    fx = tmp_path / "e33.txt"
    assert main(["gen", "axis_split", "-o", str(fx), "--set", "d=2", "--set", "D=3",
                 "--set", "N_in=10", "--set", "N_out=5"]) == 0
    capsys.readouterr()
    assert main(["oracle", str(fx)]) == 0
    out = capsys.readouterr().out
    assert "status=tie" in out and "well_defined=tie" in out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["gen", "haystack", "-o", str(tmp_path / "x"), "--set", "D=3", "--set", "bad=1"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    big = fixture_axis_split(2, 3, 30, 0)
    save_dataset(big, tmp_path / "big.txt")
    assert main(["oracle", str(tmp_path / "big.txt")]) == 2
    assert main(["fit", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nname = nope\n")
    assert main(["sweep", str(bad)]) == 1
    capsys.readouterr()


def test_cli_sweep_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(SMALL)
    out = tmp_path / "run"
    assert main(["sweep", str(cfg), "--seed", "9", "--workers", "1", "--output-dir", str(out)]) == 0
    assert main(["report", str(out / "summary.csv")]) == 0
    text = capsys.readouterr().out
    assert "sggd" in text and "csv=" in text
    assert (out / "timing.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "advrsr", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "sweep" in r.stdout
