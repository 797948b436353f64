import filecmp
import json
import subprocess


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def test_exit_codes(cli, tmp_path, data_dir):
    assert run(cli, "flows", "--config", str(tmp_path / "missing.json")).returncode == 1

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"splits": {"rpp": ["2024-03-15", "2024-03-04"]}}))
    assert run(cli, "flows", "--config", str(bad)).returncode == 1

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "calendar": {"start": "2024-03-04", "end": "2024-03-15"},
        "splits": {"rpp": ["2024-03-04", "2024-03-05"], "train": ["2024-03-06", "2024-03-12"],
                   "test": ["2024-03-13", "2024-03-15"]},
        "output_dir": str(tmp_path / "out"),
    }))
    assert run(cli, "flows", "--config", str(cfg), "--trips", str(tmp_path / "none.csv")).returncode == 2
    ok = run(cli, "flows", "--config", str(cfg), "--trips", str(data_dir / "returns_50_cards.csv"))
    assert ok.returncode == 0, ok.stderr
    assert (tmp_path / "out" / "flows.csv").exists()


def test_subcommands_compose_to_pipeline(cli, small_config, tmp_path):
    whole = tmp_path / "whole"
    parts = tmp_path / "parts"
    r = run(cli, "pipeline", "--config", str(small_config), "--out", str(whole))
    assert r.returncode == 0, r.stderr

    trips = parts / "trips.csv"
    steps = ["simulate", "flows", "rpp", "fit", "forecast", "evaluate", "cluster", "event"]
    for step in steps:
        args = ["--config", str(small_config), "--out", str(parts)]
        if step != "simulate":
            args += ["--trips", str(trips)]
        r = run(cli, step, *args)
        assert r.returncode == 0, (step, r.stderr)

    names = sorted(p.name for p in whole.iterdir())
    assert names == sorted(p.name for p in parts.iterdir())
    _, mismatch, errors = filecmp.cmpfiles(whole, parts, names, shallow=False)
    assert mismatch == [] and errors == []
