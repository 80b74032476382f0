import csv
import json

import numpy as np
import pytest
from PIL import Image

from stackfuse import cli
from stackfuse.config import RunConfig, default_config
from stackfuse.errors import ConfigError

SMALL_FAMILIES = {"equalisation": ["CH"], "remap": ["GL"], "filter": ["MB"]}


def make_video(root, name, t=4, size=32, seed=0):
    vdir = root / name
    vdir.mkdir(parents=True)
    gen = np.random.default_rng(seed)
    for i in range(t):
        frame = gen.integers(0, 256, size=(size, size)).astype(np.uint8)
        Image.fromarray(frame, mode="L").save(vdir / f"frame_{i:03d}.png")
    return vdir


def small_config(tmp_path, **overrides):
    doc = {
        "input_dir": str(tmp_path / "videos"),
        "output_dir": str(tmp_path / "out"),
        "families": SMALL_FAMILIES,
        "jobs": 1,
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_config_command_round_trips(capsys):
    assert cli.main(["config"]) == 0
    printed = capsys.readouterr().out
    cfg = RunConfig.from_dict(json.loads(printed))
    assert cfg.projections == list(default_config().projections)
    assert cfg.families["filter"] == ["MB", "BF", "NF"]


def test_enumerate_default_prints_111(capsys):
    assert cli.main(["enumerate"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 111
    assert lines[0].split()[-1] == "CL"


def test_enumerate_with_config(tmp_path, capsys):
    cfg = small_config(tmp_path)
    assert cli.main(["enumerate", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 15


def test_enumerate_single_family_single_op(tmp_path, capsys):
    cfg = small_config(
        tmp_path, families={"equalisation": ["CL"], "remap": [], "filter": []}
    )
    assert cli.main(["enumerate", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].endswith("CL")


def test_malformed_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"no_such_key": 1}')
    assert cli.main(["enumerate", "--config", str(bad)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"quantile": 0.75, "typo_key": True})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"operators": {"GL": {"gamme": 1.0}}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"quantile": 2.0})


@pytest.mark.parametrize(
    "doc",
    [
        {"quantile": "high"},
        {"families": "nope"},
        {"jobs": "four"},
        {"projections": 5},
        {"projections": ["XX"]},
        {"metrics": ["ssim"]},
    ],
)
def test_malformed_values_rejected(doc):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(doc)


def test_run_and_rerun_identical(tmp_path, capsys):
    make_video(tmp_path / "videos", "v0")
    cfg = small_config(tmp_path)
    assert cli.main(["run", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    manifest_bytes = (out / "manifest.csv").read_bytes()
    rows = list(csv.DictReader((out / "manifest.csv").open()))
    assert len(rows) == 15 * 6
    assert all(r["status"] == "ok" for r in rows)
    sample = sorted(out.glob("*.png"))[0]
    png_bytes = sample.read_bytes()

    assert cli.main(["run", "--config", str(cfg)]) == 0
    assert (out / "manifest.csv").read_bytes() == manifest_bytes
    assert sample.read_bytes() == png_bytes


def test_run_pipeline_filter(tmp_path):
    make_video(tmp_path / "videos", "v0")
    make_video(tmp_path / "videos", "v1", seed=1)
    # full default families with a single named pipeline selected
    cfg = small_config(tmp_path, families=None)
    doc = json.loads(cfg.read_text())
    del doc["families"]
    cfg.write_text(json.dumps(doc))
    assert cli.main(["run", "--config", str(cfg), "--pipeline", "QP_CH_NF"]) == 0
    pngs = sorted((tmp_path / "out").glob("*.png"))
    assert [p.name for p in pngs] == ["QP_v0_CH_NF.png", "QP_v1_CH_NF.png"]


def test_operator_override_changes_outputs(tmp_path):
    make_video(tmp_path / "videos", "v0")
    tweaked = small_config(tmp_path, operators={"GL": {"gamma": 0.3}},
                           output_dir=str(tmp_path / "out2"))
    tweaked = tweaked.rename(tmp_path / "config2.json")
    base = small_config(tmp_path)
    assert cli.main(["run", "--config", str(base), "--pipeline", "AP_GL"]) == 0
    assert cli.main(["run", "--config", str(tweaked), "--pipeline", "AP_GL"]) == 0
    a = (tmp_path / "out" / "AP_v0_GL.png").read_bytes()
    b = (tmp_path / "out2" / "AP_v0_GL.png").read_bytes()
    assert a != b


def test_run_reports_failures_with_nonzero_exit(tmp_path):
    make_video(tmp_path / "videos", "v0", size=8)  # too small for CH tiles? 4x4 fits; CL does not
    cfg = small_config(tmp_path, families={"equalisation": ["CL"], "remap": [], "filter": []})
    assert cli.main(["run", "--config", str(cfg)]) == 1
    rows = list(csv.DictReader((tmp_path / "out" / "manifest.csv").open()))
    assert all(r["status"] == "error" for r in rows)


def test_empty_input_fails(tmp_path):
    (tmp_path / "videos").mkdir()
    cfg = small_config(tmp_path)
    assert cli.main(["run", "--config", str(cfg)]) == 1


def test_score_directory_and_manifest(tmp_path, capsys):
    make_video(tmp_path / "videos", "v0")
    cfg = small_config(tmp_path)
    cli.main(["run", "--config", str(cfg)])
    out_csv = tmp_path / "scores.csv"
    assert cli.main([
        "score", "--input", str(tmp_path / "out" / "manifest.csv"),
        "--metric", "piqe", "--output", str(out_csv),
    ]) == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 90
    assert {r["metric"] for r in rows} == {"piqe"}
    for r in rows:
        assert 0.0 <= float(r["score"]) <= 100.0

    # scoring the directory directly covers the same images
    out_csv2 = tmp_path / "scores2.csv"
    assert cli.main([
        "score", "--input", str(tmp_path / "out"),
        "--metric", "piqe", "--output", str(out_csv2),
    ]) == 0
    assert len(list(csv.DictReader(out_csv2.open()))) == 90


def test_score_is_deterministic(tmp_path):
    make_video(tmp_path / "videos", "v0")
    cfg = small_config(tmp_path)
    cli.main(["run", "--config", str(cfg)])
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        cli.main(["score", "--input", str(tmp_path / "out" / "manifest.csv"),
                  "--metric", "piqe", "--output", str(out)])
    assert a.read_bytes() == b.read_bytes()


def test_compare_gt_identical_masks(tmp_path, capsys):
    mask = (np.random.default_rng(0).random((20, 20)) < 0.3).astype(np.uint8) * 5
    Image.fromarray(mask, mode="L").save(tmp_path / "old.png")
    Image.fromarray(mask, mode="L").save(tmp_path / "new.png")
    assert cli.main([
        "compare-gt", str(tmp_path / "old.png"), str(tmp_path / "new.png"),
        "--output", str(tmp_path / "gt"),
    ]) == 0
    rows = list(csv.DictReader((tmp_path / "gt" / "gt_pairs.csv").open()))
    assert len(rows) == 1
    assert float(rows[0]["iou"]) == 100.0
    assert float(rows[0]["bg_mismatch_o"]) == 0.0


def test_report_produces_tables(tmp_path):
    make_video(tmp_path / "videos", "v0")
    make_video(tmp_path / "videos", "v1", seed=9)
    cfg = small_config(tmp_path)
    cli.main(["run", "--config", str(cfg)])
    scores = tmp_path / "scores.csv"
    cli.main(["score", "--input", str(tmp_path / "out" / "manifest.csv"),
              "--metric", "piqe", "--output", str(scores)])
    assert cli.main([
        "report", "--scores", str(scores),
        "--manifest", str(tmp_path / "out" / "manifest.csv"),
        "--output", str(tmp_path / "report"),
    ]) == 0
    names = {p.name for p in (tmp_path / "report").glob("*.csv")}
    assert names == {
        "descriptive_stats.csv", "projection_boxplots.csv",
        "sp_ap_tests.csv", "top_pipelines.csv",
    }
    box_rows = list(csv.DictReader((tmp_path / "report" / "projection_boxplots.csv").open()))
    assert {r["projection"] for r in box_rows} == {"SP", "AP", "MIP", "PDP", "SDP", "QP"}
