"""Command-line interface tests: subcommands, exit codes, artifacts."""

from __future__ import annotations

import json

import numpy as np
import pytest
from PIL import Image

from ssla.cli import LABEL_PALETTE, main
from ssla.imageio import decode_png, encode_png, read_pfm


@pytest.fixture(scope="module")
def stack_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("stack")
    code = main(["expogen", "--scene", "bimodal", "--evs=-5,-3,-1",
                 "--seed", "0", "--size", "96", "-o", str(out)])
    assert code == 0
    return out


def _stack_paths(stack_dir):
    return sorted(str(p) for p in stack_dir.glob("*.pfm"))


def test_expogen_writes_pfm_stack(stack_dir):
    paths = _stack_paths(stack_dir)
    assert len(paths) == 3
    for p in paths:
        img = read_pfm(p)
        assert img.shape == (96, 96, 3)
        assert img.min() >= 0.0 and img.max() <= 1.0


def test_expogen_png_format(tmp_path):
    code = main(["expogen", "--scene", "trimodal", "--evs=-2",
                 "--size", "32", "--format", "png", "-o", str(tmp_path)])
    assert code == 0
    files = list(tmp_path.glob("*.png"))
    assert len(files) == 1
    assert decode_png(files[0]).shape == (32, 32, 3)


def test_fuse_writes_output_and_report(stack_dir, tmp_path):
    out_png = tmp_path / "fused.png"
    report_json = tmp_path / "report.json"
    code = main(["fuse", *_stack_paths(stack_dir),
                 "-o", str(out_png), "--report", str(report_json),
                 "--downsize-max", "64"])
    assert code == 0
    assert decode_png(out_png).shape == (96, 96, 3)
    report = json.loads(report_json.read_text())
    assert report["schema"] == 1
    assert report["m"] >= 1
    assert report["config"]["approach"] == 2
    assert report["config"]["downsize_max"] == 64


def test_fuse_emits_intermediates(stack_dir, tmp_path):
    inter = tmp_path / "inter"
    code = main(["fuse", *_stack_paths(stack_dir), "-o", str(tmp_path / "f.png"),
                 "--downsize-max", "64", "--emit-intermediates", str(inter)])
    assert code == 0
    label_map = Image.open(inter / "label_map.png")
    assert label_map.mode == "P"
    palette = label_map.getpalette()[: 3 * len(LABEL_PALETTE)]
    expected = [c for rgb in LABEL_PALETTE for c in rgb]
    assert palette == expected
    adjusted = sorted(inter.glob("adjusted_*.png"))
    assert len(adjusted) >= 1


def test_fuse_approach_flag_changes_segmentation(stack_dir, tmp_path):
    report_json = tmp_path / "r1.json"
    code = main(["fuse", *_stack_paths(stack_dir), "-o", str(tmp_path / "f1.png"),
                 "--approach", "1", "--report", str(report_json)])
    assert code == 0
    assert json.loads(report_json.read_text())["approach"] == 1


def test_fuse_config_file_with_cli_override(stack_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("approach = 1\nfuse_method = average\n")
    report_json = tmp_path / "r.json"
    code = main(["fuse", *_stack_paths(stack_dir), "-o", str(tmp_path / "f.png"),
                 "--config", str(cfg), "--approach", "2",
                 "--downsize-max", "64", "--report", str(report_json)])
    assert code == 0
    report = json.loads(report_json.read_text())
    assert report["config"]["approach"] == 2              # flag beats file
    assert report["config"]["fuse_method"] == "average"   # file beats default


def test_fuse_mismatched_sizes_exit_2(stack_dir, tmp_path):
    small = tmp_path / "small.png"
    encode_png(small, np.zeros((8, 8, 3)))
    code = main(["fuse", _stack_paths(stack_dir)[0], str(small),
                 "-o", str(tmp_path / "f.png")])
    assert code == 2


def test_fuse_undecodable_input_exit_3(tmp_path):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png at all")
    code = main(["fuse", str(bad), "-o", str(tmp_path / "f.png")])
    assert code == 3


def test_fuse_bad_config_value_exit_2(stack_dir, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("approach = 9\n")
    code = main(["fuse", *_stack_paths(stack_dir), "-o", str(tmp_path / "f.png"),
                 "--config", str(cfg)])
    assert code == 2


def test_metrics_json_keys(stack_dir, tmp_path, capsys):
    fused = tmp_path / "f.png"
    main(["fuse", *_stack_paths(stack_dir), "-o", str(fused),
          "--downsize-max", "64"])
    capsys.readouterr()
    code = main(["metrics", str(fused), "--json"])
    assert code == 0
    scores = json.loads(capsys.readouterr().out)
    assert set(scores) == {"entropy_bits", "naturalness"}
    assert 0.0 <= scores["entropy_bits"] <= 8.0
    assert 0.0 <= scores["naturalness"] <= 1.0


def test_metrics_human_readable(stack_dir, capsys):
    code = main(["metrics", _stack_paths(stack_dir)[0]])
    assert code == 0
    out = capsys.readouterr().out
    assert "entropy_bits:" in out
    assert "naturalness:" in out


def test_compare_table_csv(stack_dir, tmp_path, capsys):
    code = main(["compare", *_stack_paths(stack_dir), "--downsize-max", "64"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "config,entropy_bits,naturalness,m,wall_ms"
    names = [line.split(",")[0] for line in lines[1:]]
    assert names == ["unadjusted", "banded", "mixture", "mixture-noenhance"]


def test_compare_markdown_to_file(stack_dir, tmp_path):
    table = tmp_path / "table.md"
    code = main(["compare", *_stack_paths(stack_dir), "--downsize-max", "64",
                 "--format", "markdown", "-o", str(table)])
    assert code == 0
    text = table.read_text()
    assert text.startswith("| config")
    assert "| mixture" in text


def test_expogen_rejects_bad_evs(tmp_path):
    code = main(["expogen", "--scene", "bimodal", "--evs", "a,b",
                 "-o", str(tmp_path)])
    assert code == 2
