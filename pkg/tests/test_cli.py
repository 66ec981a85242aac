import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from slslab import landscape as nk
from slslab.cli import main

TINY_YAML = """\
environment:
  n_loci: 5
  k_inputs: 2
  steps: 5
  n_agents: 6
  sample_size: 3
batch:
  n_landscapes: 1
  reps_per_landscape: 2
training:
  updates_per_epoch: 1
  minibatch_size: 8
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def tiny_config(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_YAML)
    return str(path)


def test_landscape_gen_roundtrip(runner, tmp_path):
    out = str(tmp_path / "scape.npz")
    result = runner.invoke(main, ["landscape", "gen", "--n", "6", "--k", "3",
                                  "--seed", "7", "--out", out])
    assert result.exit_code == 0, result.output
    scape = nk.load(out)
    assert scape.n_loci == 6 and scape.k_inputs == 3 and scape.seed == 7
    reference = nk.generate(6, 3, seed=7)
    assert np.array_equal(scape.tables, reference.tables)


def test_landscape_gen_invalid_k_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["landscape", "gen", "--n", "6", "--k", "9",
                                  "--seed", "0",
                                  "--out", str(tmp_path / "x.npz")])
    assert result.exit_code == 2
    assert "error:" in result.output


def test_baselines_outputs_and_summary(runner, tiny_config, tmp_path):
    out = str(tmp_path / "run")
    result = runner.invoke(main, ["baselines", "--config", tiny_config,
                                  "--seed", "0", "--out", out,
                                  "--strategies", "BI-R,RI"])
    assert result.exit_code == 0, result.output
    assert os.path.exists(os.path.join(out, "curve_BI-R.csv"))
    assert os.path.exists(os.path.join(out, "curve_RI.csv"))
    lines = open(os.path.join(out, "summary.csv")).read().strip().split("\n")
    assert lines[0] == "rank,strategy,average_mean_payoff,final_mean_payoff"
    assert len(lines) == 3
    ranks = [line.split(",")[0] for line in lines[1:]]
    assert ranks == ["1", "2"]
    payoffs = [float(line.split(",")[2]) for line in lines[1:]]
    assert payoffs == sorted(payoffs, reverse=True)
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["seed"] == 0
    assert "curve_BI-R.csv" in manifest["checksums"]


def test_baselines_reproducible_byte_identical(runner, tiny_config, tmp_path):
    digests = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        result = runner.invoke(main, ["baselines", "--config", tiny_config,
                                      "--seed", "3", "--out", out,
                                      "--strategies", "CF-I"])
        assert result.exit_code == 0, result.output
        digests.append(open(os.path.join(out, "curve_CF-I.csv")).read())
    assert digests[0] == digests[1]


def test_unknown_preset_exits_2_and_lists(runner, tmp_path):
    result = runner.invoke(main, ["baselines", "--preset", "nope",
                                  "--out", str(tmp_path / "r")])
    assert result.exit_code == 2
    assert "available" in result.output and "k3l400" in result.output


def test_unknown_strategy_exits_2(runner, tiny_config, tmp_path):
    result = runner.invoke(main, ["baselines", "--config", tiny_config,
                                  "--out", str(tmp_path / "r"),
                                  "--strategies", "XX-Q"])
    assert result.exit_code == 2


def test_locked_run_directory_exits_3(runner, tiny_config, tmp_path):
    out = tmp_path / "busy"
    out.mkdir()
    (out / ".lock").write_text("1234")
    result = runner.invoke(main, ["baselines", "--config", tiny_config,
                                  "--out", str(out),
                                  "--strategies", "RI"])
    assert result.exit_code == 3
    assert "locked" in result.output


def test_train_and_eval_and_probe_pipeline(runner, tiny_config, tmp_path):
    train_out = str(tmp_path / "train")
    result = runner.invoke(main, ["train", "--config", tiny_config,
                                  "--seed", "0", "--out", train_out,
                                  "--epochs", "2"])
    assert result.exit_code == 0, result.output
    assert os.path.exists(os.path.join(train_out, "metrics.csv"))
    ckpt = os.path.join(train_out, "checkpoint_final.npz")
    assert os.path.exists(ckpt)

    eval_out = str(tmp_path / "eval")
    result = runner.invoke(main, ["eval", "--checkpoint", ckpt,
                                  "--config", tiny_config, "--seed", "1",
                                  "--out", eval_out])
    assert result.exit_code == 0, result.output
    curve = open(os.path.join(eval_out, "curve.csv")).read().strip()
    assert curve.split("\n")[0] == "step,mean_payoff,sem"
    assert len(curve.split("\n")) == 6  # header + 5 steps
    summary = json.load(open(os.path.join(eval_out, "summary.json")))
    assert 0.0 <= summary["average_mean_payoff"] <= 100.0

    probe_out = str(tmp_path / "probe")
    result = runner.invoke(main, ["probe", "--checkpoint", ckpt,
                                  "--kind", "BI", "--stride", "50",
                                  "--out", probe_out])
    assert result.exit_code == 0, result.output
    for name in ("output_BI.csv", "voxels.csv", "regions.json",
                 "manifest.json"):
        assert os.path.exists(os.path.join(probe_out, name))
    regions = json.load(open(os.path.join(probe_out, "regions.json")))
    assert set(k for k in regions if k.startswith("region_")) == {
        "region_I", "region_II", "region_III", "region_IV"}

    probe_cf = str(tmp_path / "probe_cf")
    result = runner.invoke(main, ["probe", "--checkpoint", ckpt,
                                  "--kind", "CF", "--out", probe_cf])
    assert result.exit_code == 0, result.output
    assert os.path.exists(os.path.join(probe_cf, "output_CF.csv"))
    assert not os.path.exists(os.path.join(probe_cf, "voxels.csv"))


def test_eval_loci_mismatch_exits_2(runner, tiny_config, tmp_path):
    train_out = str(tmp_path / "train")
    result = runner.invoke(main, ["train", "--config", tiny_config,
                                  "--seed", "0", "--out", train_out,
                                  "--epochs", "1"])
    assert result.exit_code == 0, result.output
    ckpt = os.path.join(train_out, "checkpoint_final.npz")
    result = runner.invoke(main, ["eval", "--checkpoint", ckpt,
                                  "--preset", "default",
                                  "--out", str(tmp_path / "e")])
    assert result.exit_code == 2
    assert "N=5" in result.output


def test_report_reads_manifest(runner, tiny_config, tmp_path):
    out = str(tmp_path / "run")
    runner.invoke(main, ["baselines", "--config", tiny_config,
                         "--seed", "0", "--out", out, "--strategies", "RI"])
    result = runner.invoke(main, ["report", "--run", out])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["seed"] == 0
    assert "curve_RI.csv" in payload["files"]


def test_report_missing_manifest_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["report", "--run", str(tmp_path)])
    assert result.exit_code == 2


def test_config_overrides_preset(runner, tmp_path):
    override = tmp_path / "override.yaml"
    override.write_text(TINY_YAML + "  max_epochs: 1\n")
    out = str(tmp_path / "t")
    result = runner.invoke(main, ["train", "--preset", "k3l400",
                                  "--config", str(override),
                                  "--seed", "0", "--out", out])
    assert result.exit_code == 0, result.output
    lines = open(os.path.join(out, "metrics.csv")).read().strip().split("\n")
    assert len(lines) == 2  # header + 1 epoch
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    # the override file wins on overlapping keys, preset supplies the rest
    assert manifest["config"]["environment"]["n_loci"] == 5
    assert manifest["config"]["environment"]["k_inputs"] == 2


def test_bad_schema_version_exits_2(runner, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("schema_version: 99\n")
    result = runner.invoke(main, ["baselines", "--config", str(bad),
                                  "--out", str(tmp_path / "r")])
    assert result.exit_code == 2
