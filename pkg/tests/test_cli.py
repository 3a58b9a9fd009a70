import json

import pytest
import yaml

from sara.cli import main


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({
        "workload": "sphinx",
        "ssd": "slow",
        "memory_fraction": 0.6,
        "allocators": ["sara", "greedy"],
        "horizon_periods": 10,
        "seed": 3,
    }))
    return path


def test_run_writes_bundles_and_exits_zero(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == 0
    assert (out / "small-slow" / "sara" / "seed-3" / "periods.csv").exists()
    assert (out / "compare.csv").exists()
    assert "small-slow sara" in capsys.readouterr().out


def test_run_allocator_subset(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out),
                 "--allocators", "greedy"]) == 0
    assert not (out / "small-slow" / "sara").exists()


def test_run_invalid_config_exits_two(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"allocators": ["nope"]}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_sweep_writes_csv(tmp_path, config_file):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_file), "--out", str(out),
                 "--grid", "20,80"]) == 0
    lines = (out / "small-slow" / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("threshold_percent,")
    assert len(lines) == 3


def test_profile_reports_fit(tmp_path, config_file, capsys):
    out = tmp_path / "prof"
    assert main(["profile", "--config", str(config_file), "--out", str(out)]) == 0
    report = json.loads((out / "small-slow" / "profile.json").read_text())
    assert report["t_bcet_measured_us"] == 480_000
    assert "slope" in report["fit"]


def test_compare_check_passes_on_healthy_bundle(tmp_path, config_file):
    out = tmp_path / "out"
    main(["run", "--config", str(config_file), "--out", str(out)])
    code = main(["compare", str(out), "--out", str(tmp_path / "report"), "--check"])
    assert code == 0
    assert (tmp_path / "report" / "compare.md").exists()


def test_compare_check_fails_on_inverted_bundle(tmp_path, config_file):
    out = tmp_path / "out"
    main(["run", "--config", str(config_file), "--out", str(out)])
    # swap the two allocators' summaries to force an ordering violation
    sara = out / "small-slow" / "sara" / "seed-3" / "summary.json"
    greedy = out / "small-slow" / "greedy" / "seed-3" / "summary.json"
    a, b = json.loads(sara.read_text()), json.loads(greedy.read_text())
    a["nonrt_throughput_units_per_s"], b["nonrt_throughput_units_per_s"] = (
        b["nonrt_throughput_units_per_s"], a["nonrt_throughput_units_per_s"])
    sara.write_text(json.dumps(a))
    greedy.write_text(json.dumps(b))
    code = main(["compare", str(out), "--out", str(tmp_path / "report"), "--check"])
    assert code == 1


def test_compare_json_format(tmp_path, config_file):
    out = tmp_path / "out"
    main(["run", "--config", str(config_file), "--out", str(out)])
    assert main(["compare", str(out), "--out", str(tmp_path / "report"),
                 "--format", "json"]) == 0
    payload = json.loads((tmp_path / "report" / "compare.json").read_text())
    assert {row["allocator"] for row in payload} == {"sara", "greedy"}
