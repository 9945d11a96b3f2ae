import json

import pytest

from fencedetect import cli


def _synth(tmp_path, name="wave", seed=1, events=("4.5:0.8",), extra=()):
    wave = tmp_path / f"{name}.f64"
    truth = tmp_path / f"{name}.truth.csv"
    argv = ["synth", "--duration", "10", "--noise-std", "0.01",
            "--drift-depth", "0.05", "--seed", str(seed),
            "--out", str(wave), "--truth", str(truth)]
    for ev in events:
        argv += ["--event", ev]
    argv += list(extra)
    assert cli.main(argv) == 0
    return wave, truth


def _detect(wave, out, extra=()):
    argv = ["detect", "--input", str(wave), "--format", "raw-f64le",
            "--out", str(out)] + list(extra)
    assert cli.main(argv) == 0
    return out


def _event_lines(path):
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    return [l for l in lines if "sample_index" in l]


def test_synth_is_deterministic(tmp_path):
    w1, t1 = _synth(tmp_path, "one", seed=42)
    w2, t2 = _synth(tmp_path, "two", seed=42)
    assert w1.read_bytes() == w2.read_bytes()
    assert t1.read_bytes() == t2.read_bytes()


def test_synth_zero_duration_fails(tmp_path, capsys):
    rc = cli.main(["synth", "--duration", "0",
                   "--out", str(tmp_path / "w.f64"),
                   "--truth", str(tmp_path / "t.csv")])
    assert rc != 0
    assert "error:" in capsys.readouterr().err


def test_synth_missing_duration_fails(tmp_path, capsys):
    rc = cli.main(["synth", "--out", str(tmp_path / "w.f64"),
                   "--truth", str(tmp_path / "t.csv")])
    assert rc != 0
    assert "duration" in capsys.readouterr().err


def test_synth_writes_one_truth_row_per_event(tmp_path):
    _, truth = _synth(tmp_path, events=("1.0:0.5", "2.0:-0.5"))
    assert len(truth.read_text().splitlines()) == 2


def test_detect_zero_event_stream_writes_header_only(tmp_path):
    wave, _ = _synth(tmp_path, events=(),
                     extra=("--noise-std", "0", "--drift-depth", "0"))
    out = _detect(wave, tmp_path / "events.jsonl")
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    assert "config" in json.loads(lines[0])
    assert _event_lines(out) == []


def test_detect_finds_the_synth_event(tmp_path):
    wave, truth = _synth(tmp_path)
    out = _detect(wave, tmp_path / "events.jsonl")
    events = _event_lines(out)
    assert len(events) == 1
    assert abs(events[0]["time_s"] - 4.5) < 6016 / 6000


def test_detect_unreadable_input_fails(tmp_path, capsys):
    rc = cli.main(["detect", "--input", str(tmp_path / "nope.csv")])
    assert rc != 0
    assert "error:" in capsys.readouterr().err


def test_flags_and_config_file_agree(tmp_path):
    wave, _ = _synth(tmp_path)
    out = tmp_path / "events.jsonl"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# detector settings\n"
        "format = raw-f64le\n"
        "k = 0.5\n"
        "window = 6016\n"
        "step = 6016\n"
        "std_window = 4\n"
    )
    assert cli.main(["detect", "--input", str(wave), "--config", str(cfg),
                     "--out", str(out)]) == 0
    from_config = out.read_bytes()
    assert cli.main(["detect", "--input", str(wave), "--format", "raw-f64le",
                     "--k", "0.5", "--window", "6016", "--step", "6016",
                     "--std-window", "4", "--out", str(out)]) == 0
    assert out.read_bytes() == from_config


def test_unknown_config_key_rejected(tmp_path, capsys):
    wave, _ = _synth(tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("fence_k = 0.5\n")
    rc = cli.main(["detect", "--input", str(wave), "--config", str(cfg)])
    assert rc != 0
    assert "unknown config key" in capsys.readouterr().err


def test_detect_runs_are_byte_identical(tmp_path):
    wave, _ = _synth(tmp_path)
    out = tmp_path / "events.jsonl"
    _detect(wave, out)
    first = out.read_bytes()
    _detect(wave, out)
    assert out.read_bytes() == first


def test_eval_perfect_run(tmp_path, capsys):
    wave, truth = _synth(tmp_path)
    events = _detect(wave, tmp_path / "events.jsonl",
                     extra=("--verdicts", str(tmp_path / "verdicts.jsonl")))
    rc = cli.main(["eval", "--input", str(events), "--truth", str(truth),
                   "--verdicts", str(tmp_path / "verdicts.jsonl")])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["f_measure"] == 1.0
    assert payload["tp"] == 1 and payload["fp"] == 0 and payload["fn"] == 0
    assert payload["tn"] > 0
    assert payload["config"]["k"] == 0.5


def test_eval_empty_detections_gives_zero_recall(tmp_path, capsys):
    wave, _ = _synth(tmp_path, "quiet", events=(),
                     extra=("--noise-std", "0", "--drift-depth", "0"))
    truth = tmp_path / "t.csv"
    truth.write_text("3.0\n")
    events = _detect(wave, tmp_path / "events.jsonl")
    rc = cli.main(["eval", "--input", str(events), "--truth", str(truth)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["recall"] == 0.0
    assert payload["fn"] == 1


def test_eval_zero_tolerance_splits_offset_detection(tmp_path, capsys):
    wave, truth = _synth(tmp_path)
    events = _detect(wave, tmp_path / "events.jsonl")
    assert _event_lines(events)[0]["time_s"] != 4.5
    rc = cli.main(["eval", "--input", str(events), "--truth", str(truth),
                   "--tolerance", "0"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["tp"] == 0
    assert payload["fp"] == 1 and payload["fn"] == 1


def test_eval_missing_truth_fails(tmp_path, capsys):
    wave, _ = _synth(tmp_path)
    events = _detect(wave, tmp_path / "events.jsonl")
    rc = cli.main(["eval", "--input", str(events)])
    assert rc != 0
    assert "truth" in capsys.readouterr().err


def test_sweep_rows_and_monotone_work(tmp_path):
    wave, truth = _synth(tmp_path)
    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep", "--input", str(wave), "--format", "raw-f64le",
                   "--truth", str(truth), "--param", "step",
                   "--values", "6016,3008,1504", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "value,tp,fp,fn,precision,recall,f_measure,wall_time_ms"
    rows = lines[2:]
    assert len(rows) == 3
    assert [r.split(",")[0] for r in rows] == ["6016", "3008", "1504"]
    # smaller steps process more windows
    n = 60000
    counts = [(n - 6016) // step + 1 for step in (6016, 3008, 1504)]
    assert counts == sorted(counts)


def test_sweep_single_value_matches_eval(tmp_path, capsys):
    wave, truth = _synth(tmp_path)
    events = _detect(wave, tmp_path / "events.jsonl")
    assert cli.main(["eval", "--input", str(events), "--truth", str(truth)]) == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])

    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep", "--input", str(wave), "--format", "raw-f64le",
                   "--truth", str(truth), "--param", "step",
                   "--values", "6016", "--out", str(out)])
    assert rc == 0
    row = out.read_text().splitlines()[2].split(",")
    assert [int(v) for v in row[1:4]] == [payload["tp"], payload["fp"], payload["fn"]]
    assert [float(v) for v in row[4:7]] == [
        payload["precision"], payload["recall"], payload["f_measure"]]


def test_sweep_empty_values_fails(tmp_path, capsys):
    wave, truth = _synth(tmp_path)
    rc = cli.main(["sweep", "--input", str(wave), "--format", "raw-f64le",
                   "--truth", str(truth), "--param", "k", "--values", " , "])
    assert rc != 0
    assert "values" in capsys.readouterr().err


def test_sweep_unknown_param_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--input", "x", "--truth", "y",
                  "--param", "window", "--values", "6016"])
    assert exc.value.code == 2


def test_bled_layout_defaults_to_12khz_decimated(tmp_path):
    # two-channel export at 12 kHz; phase column b carries the signal
    import numpy as np
    from fencedetect.signal_io import SyntheticSpec, generate_synthetic

    spec = SyntheticSpec(duration_s=6.0, noise_std_a=0.01,
                         events=((2.5, 1.0),), seed=6,
                         sample_rate_hz=12000.0, drift_depth=0.05)
    stream, _ = generate_synthetic(spec)
    n = len(stream.samples)
    table = np.column_stack([np.arange(n) / 12000.0,
                             np.zeros(n), stream.samples, np.full(n, 120.0)])
    path = tmp_path / "phases.csv"
    with open(path, "w") as fh:
        fh.write("X_Value,Current_A,Current_B,VoltageA\n")
        np.savetxt(fh, table, fmt="%.8g", delimiter=",")

    out = tmp_path / "events.jsonl"
    rc = cli.main(["detect", "--input", str(path), "--bled-layout", "b",
                   "--out", str(out)])
    assert rc == 0
    header = json.loads(out.read_text().splitlines()[0])["config"]
    assert header["rate"] == 12000.0
    assert header["decimate"] == 2
    events = _event_lines(out)
    assert len(events) == 1
    assert abs(events[0]["time_s"] - 2.5) < 6016 / 6000
