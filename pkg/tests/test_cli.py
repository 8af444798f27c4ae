import csv
import io
import json

import numpy as np
import pytest

from coistop.cli import EXIT_INPUT, EXIT_OK, HarnessConfig, main, run_frames
from coistop.curves import dump_curve, load_curve
from coistop.indicators import Mne
from coistop.report import read_frame_csv, rerank
from coistop.synth import CurveModel, generate


def write_curve(path, curve, fmt="csv"):
    path.write_text(dump_curve(curve, fmt))
    return path


def synth_batch(directory, count=15, n=200):
    directory.mkdir(parents=True, exist_ok=True)
    for seed in range(count):
        m = CurveModel(n, onset=40 + 7 * seed, ramp=0.05, noise_amp=0.8, seed=seed)
        write_curve(directory / f"k{seed:02d}.csv", generate(m, f"k{seed:02d}"))
    return directory


def v_curve():
    val = [50.0 + abs(e - 30) for e in range(1, 101)]
    train = [40.0 - 0.3 * e for e in range(1, 101)]
    from coistop.curves import ErrorCurve
    return ErrorCurve("v", train, val)


class TestIngest:
    def test_ok(self, tmp_path, capsys):
        p = write_curve(tmp_path / "a.csv", v_curve())
        assert main(["ingest", str(p)]) == EXIT_OK
        assert "ok" in capsys.readouterr().out

    def test_negative_error(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("1,3.0,2.0\n2,-1.0,2.0\n")
        assert main(["ingest", str(p)]) == EXIT_INPUT
        assert "row 2" in capsys.readouterr().out

    def test_empty(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        assert main(["ingest", str(p)]) == EXIT_INPUT

    def test_jsonl_and_missing(self, tmp_path, capsys):
        p = write_curve(tmp_path / "a.jsonl", v_curve(), "jsonl")
        assert main(["ingest", str(p)]) == EXIT_OK
        assert main(["ingest", str(tmp_path / "nope.csv")]) == EXIT_INPUT


class TestEval:
    def test_trace_csv(self, tmp_path, capsys):
        p = write_curve(tmp_path / "v.csv", v_curve())
        assert main(["eval", str(p), "--indicator", "gl:5.0"]) == EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 100
        assert rows[29]["value"] == "0.0" and rows[29]["fires"] == "0"
        # epoch 33: val 53, min 50 -> 6 percent
        assert float(rows[32]["value"]) == pytest.approx(6.0) and rows[32]["fires"] == "1"

    def test_strip_rule_undefined_cells(self, tmp_path, capsys):
        p = write_curve(tmp_path / "v.csv", v_curve())
        assert main(["eval", str(p), "--indicator", "p:5:1.0", "--out", str(tmp_path / "o")]) == 0
        text = (tmp_path / "o" / "v__p_5_1.0.csv").read_text()
        assert text.splitlines()[1] == "1,,0,0"

    def test_requires_params_and_pool(self, tmp_path):
        p = write_curve(tmp_path / "v.csv", v_curve())
        assert main(["eval", str(p), "--indicator", "gl"]) == EXIT_INPUT
        assert main(["eval", str(p), "--indicator", "coi:5:0.7"]) == EXIT_INPUT
        assert main(["eval", str(p), "--indicator", "coi:5:0.7",
                     "--pool", "gl:1.0,og:0.5"]) == EXIT_OK


class TestFrame:
    def test_mne_only_hand_substitution(self, tmp_path, capsys):
        p = write_curve(tmp_path / "v.csv", v_curve())
        out = tmp_path / "f"
        assert main(["frame", str(p), "--horizon", "100", "--indicator", "mne:40",
                     "--indicator", "mne:20", "--out", str(out)]) == EXIT_OK
        rows = list(csv.DictReader(io.StringIO((out / "v.csv").read_text())))
        base = rows[0]
        assert base["indicator"] == "oracle" and base["stop_epoch"] == "30"
        # baseline cost 0.5*30 + 0.5*50 = 40; mne[40]: 0.5*40 + 0.5*60 = 50;
        # mne[20]: 0.5*20 + 0.5*60 = 40 -> MCDB = 10
        by = {r["indicator"]: r for r in rows[1:]}
        assert float(by["mne:40"]["phi"]) == (50 - 40 + 10) / 10 - 1
        assert float(by["mne:20"]["phi"]) == 0.0
        assert by["mne:20"]["rank"] == "1"

    def test_out_of_range_row(self, tmp_path):
        p = write_curve(tmp_path / "v.csv", v_curve())
        out = tmp_path / "f"
        assert main(["frame", str(p), "--horizon", "100", "--indicator", "gl:500.0",
                     "--out", str(out)]) == EXIT_OK
        row = read_frame_csv((out / "v.csv").read_text())[0]
        assert row["out_of_range"] and row["stop_epoch"] == 100 and row["phi"] == 1.0

    def test_short_curve_isolated(self, tmp_path, capsys):
        d = tmp_path / "c"
        d.mkdir()
        write_curve(d / "long.csv", v_curve())
        write_curve(d / "short.csv", v_curve().truncate(50))
        out = tmp_path / "f"
        assert main(["frame", str(d), "--horizon", "80", "--indicator", "mne:40",
                     "--out", str(out)]) == EXIT_INPUT
        assert (out / "long.csv").exists() and not (out / "short.csv").exists()
        assert "short" in capsys.readouterr().err

    def test_aggregate_quartiles(self, tmp_path):
        d = synth_batch(tmp_path / "c")
        out = tmp_path / "f"
        assert main(["frame", str(d), "--horizon", "200", "--indicator", "gl:2.0",
                     "--indicator", "og:1.0", "--indicator", "mne:100",
                     "--out", str(out)]) == EXIT_OK
        agg = json.loads((out / "aggregate.json").read_text())
        assert len(agg["frames"]) == 15
        for name, entry in agg["indicators"].items():
            frames = [read_frame_csv((out / f"k{i:02d}.csv").read_text()) for i in range(15)]
            phis = sorted(r["phi"] for rows in frames for r in rows if r["indicator"] == name)
            assert len(phis) == 15
            s = entry["summary"]
            # inclusive quartiles of 15 values: positions 3.5, 7 and 10.5 (0-based)
            expected = (phis[0], phis[3] + 0.5 * (phis[4] - phis[3]), phis[7],
                        phis[10] + 0.5 * (phis[11] - phis[10]), phis[14])
            got = (s["min"], s["q1"], s["median"], s["q3"], s["max"])
            assert got == pytest.approx(expected, abs=1e-12)
            assert entry["mean"] == pytest.approx(np.mean(phis), abs=1e-12)
            assert entry["variance"] == pytest.approx(np.var(phis), abs=1e-12)

    def test_tuned_families(self, tmp_path):
        d = synth_batch(tmp_path / "c", count=2)
        out = tmp_path / "f"
        assert main(["frame", str(d), "--horizon", "200", "--out", str(out)]) == EXIT_OK
        rows = read_frame_csv((out / "k00.csv").read_text())
        assert sorted(r["indicator"] for r in rows) == sorted(
            ["mne", "gl", "p", "pq", "up", "hnr", "og", "coi"])

    def test_jobs_parity(self, tmp_path):
        d = synth_batch(tmp_path / "c", count=4)
        args = ["--horizon", "200", "--indicator", "gl", "--indicator", "coi"]
        assert main(["frame", str(d), *args, "--out", str(tmp_path / "a")]) == 0
        assert main(["frame", str(d), *args, "--jobs", "3", "--out", str(tmp_path / "b")]) == 0
        for f in sorted((tmp_path / "a").iterdir()):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_run_frames_order(self, tmp_path):
        d = synth_batch(tmp_path / "c", count=3)
        files = sorted(str(p) for p in d.iterdir())[::-1]
        reports, errors = run_frames(HarnessConfig(files, horizon=200, indicators=["mne:10"]))
        assert not errors and [r.kernel_id for r in reports] == ["k00", "k01", "k02"]


class TestRank:
    def test_single_frame(self, tmp_path, capsys):
        p = write_curve(tmp_path / "v.csv", v_curve())
        out = tmp_path / "f"
        main(["frame", str(p), "--horizon", "100", "--indicator", "mne:30",
              "--indicator", "mne:90", "--out", str(out)])
        assert main(["rank", str(out), "--out", str(out)]) == EXIT_OK
        rows = {r["indicator"]: r for r in csv.DictReader(io.StringIO(
            (out / "rank.csv").read_text()))}
        assert float(rows["mne:30"]["rank_1"]) == 100.0
        assert float(rows["mne:90"]["rank_2"]) == 100.0
        # the directory now holds rank.csv too; reranking skips it
        assert main(["rank", str(out)]) == EXIT_OK

    def test_partition_and_roundtrip(self, tmp_path):
        d = synth_batch(tmp_path / "c")
        out = tmp_path / "f"
        main(["frame", str(d), "--horizon", "200", "--indicator", "gl:1.0",
              "--indicator", "gl:3.0", "--indicator", "og:0.5", "--indicator", "up:5:5",
              "--out", str(out)])
        assert main(["rank", str(out), "--out", str(out)]) == EXIT_OK
        for row in csv.DictReader(io.StringIO((out / "rank.csv").read_text())):
            total = sum(float(v) for k, v in row.items() if k not in ("indicator", "frames"))
            assert total == pytest.approx(100.0, abs=1e-9)
        cfg = HarnessConfig([str(p) for p in sorted(d.iterdir())], horizon=200,
                            indicators=["gl:1.0", "gl:3.0", "og:0.5", "up:5:5"])
        reports, _ = run_frames(cfg)
        for rep in reports:
            rows = read_frame_csv((out / f"{rep.kernel_id}.csv").read_text())
            assert rerank(rows) == {s.name: s.rank for s in rep.scores}
            assert {r["indicator"]: r["phi"] for r in rows} == {s.name: s.phi
                                                               for s in rep.scores}

    def test_bad_input(self, tmp_path):
        bad = tmp_path / "x.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["rank", str(bad)]) == EXIT_INPUT
        assert main(["rank", str(tmp_path / "empty_dir_missing")]) == EXIT_INPUT


class TestTuneCmd:
    def test_outputs(self, tmp_path, capsys):
        p = write_curve(tmp_path / "v.csv", v_curve())
        out = tmp_path / "t"
        assert main(["tune", str(p), "--horizon", "100", "--indicator", "mne",
                     "--out", str(out)]) == EXIT_OK
        doc = json.loads((out / "v__mne_best.json").read_text())
        # mne:10 costs 0.5*10 + 0.5*70 = 40, tying the baseline; earliest entry wins
        assert doc["best"] == "mne:10" and doc["objective"] == 0.0
        assert doc["baseline_stop"] == 30
        assert len((out / "v__mne_sweep.csv").read_text().splitlines()) == 11

    def test_coi_needs_pool(self, tmp_path):
        p = write_curve(tmp_path / "v.csv", v_curve())
        assert main(["tune", str(p), "--horizon", "100", "--indicator", "coi"]) == EXIT_INPUT


class TestSynthCmd:
    def test_single_and_batch(self, tmp_path, capsys):
        assert main(["synth", "--n", "20", "--seed", "3", "--noise-amp", "1"]) == EXIT_OK
        curve = load_curve(capsys.readouterr().out)
        assert curve == generate(CurveModel(20, onset=20, noise_amp=1.0, seed=3), "curve")
        out = tmp_path / "s"
        assert main(["synth", "--n", "20", "--count", "3", "--format", "jsonl",
                     "--out", str(out)]) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "synth-0.jsonl", "synth-1.jsonl", "synth-2.jsonl"]

    def test_invalid(self):
        assert main(["synth", "--n", "10", "--onset", "11"]) == EXIT_INPUT
        assert main(["synth", "--n", "10", "--count", "0"]) == EXIT_INPUT
