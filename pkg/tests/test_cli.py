import json

import numpy as np
import pytest

from wavinpaint.cli import main
from wavinpaint.coeff_domain import load_observed
from wavinpaint.image_core import builtin_image, load_image, psnr, save_image
from wavinpaint.presets import load_preset
from wavinpaint.solvers import read_trace_csv


@pytest.fixture
def barbara_file(tmp_path):
    path = tmp_path / "barbara.pgm"
    save_image(builtin_image("barbara"), path)
    return path


@pytest.fixture
def crop_file(tmp_path):
    path = tmp_path / "crop.pgm"
    save_image(builtin_image("barbara")[96:160, 32:96], path)
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_degrade_hl(barbara_file, tmp_path, capsys):
    assert run("degrade", "--in", barbara_file, "--subband", "HL", "--level-size", 32,
               "--out-dir", tmp_path) == 0
    obs = load_observed(tmp_path / "barbara.wim")
    assert obs.mask.n_missing == 1024
    assert (tmp_path / "barbara_received.pgm").exists()
    assert not (tmp_path / "barbara_interpolated.pgm").exists()
    assert "PSNR=" in capsys.readouterr().out


def test_degrade_random_deterministic(crop_file, tmp_path):
    for name in ("a.wim", "b.wim"):
        assert run("degrade", "--in", crop_file, "--random-keep", 0.5, "--keep-ll", "--seed", 7,
                   "--mask", tmp_path / name, "--out-dir", tmp_path) == 0
    assert (tmp_path / "a.wim").read_bytes() == (tmp_path / "b.wim").read_bytes()
    assert (tmp_path / "a.wim.beta").read_bytes() == (tmp_path / "b.wim.beta").read_bytes()


def test_degrade_keep_everything(crop_file, tmp_path):
    assert run("degrade", "--in", crop_file, "--random-keep", 1.0, "--out-dir", tmp_path) == 0
    received = load_image(tmp_path / "crop_received.pgm")
    np.testing.assert_array_equal(received, load_image(crop_file))


def test_degrade_writes_interpolated(crop_file, tmp_path):
    assert run("degrade", "--in", crop_file, "--random-keep", 0.5, "--out-dir", tmp_path) == 0
    assert (tmp_path / "crop_interpolated.pgm").exists()


def test_degrade_bad_flags(crop_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("degrade", "--in", crop_file)
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        run("degrade", "--in", crop_file, "--subband", "XX")
    assert run("degrade", "--in", tmp_path / "nope.pgm", "--subband", "HL") == 1


@pytest.fixture
def degraded(crop_file, tmp_path):
    run("degrade", "--in", crop_file, "--subband", "HL", "--level-size", 16,
        "--mask", tmp_path / "c.wim", "--out-dir", tmp_path)
    return tmp_path / "c.wim"


def test_inpaint_tv_alg1(degraded, crop_file, tmp_path, capsys):
    out = tmp_path / "r.pgm"
    assert run("inpaint", "--mask", degraded, "--out", out, "--ref", crop_file,
               "--max-outer", 15, "--trace", tmp_path / "t.csv", "--plot", tmp_path / "p.svg") == 0
    ref = load_image(crop_file)
    assert psnr(ref, load_image(out)) > psnr(ref, load_image(tmp_path / "c_received.pgm"))
    text = capsys.readouterr().out
    assert "TV-Algorithm 1, PSNR=" in text and "iter=15" in text
    rows = read_trace_csv(tmp_path / "t.csv")
    assert len(rows) == 15 and rows[0]["method"] == "tv-alg1"
    assert (tmp_path / "p.svg").read_text().startswith("<svg")


def test_inpaint_bos_baseline(degraded, tmp_path):
    assert run("inpaint", "--mask", degraded, "--out", tmp_path / "b.pgm", "--solver", "bos",
               "--inner", 10, "--max-outer", 2, "--trace", tmp_path / "b.csv") == 0
    rows = read_trace_csv(tmp_path / "b.csv")
    assert [int(r["fwd_transforms"]) for r in rows] == [11, 22]
    assert [int(r["inv_transforms"]) for r in rows] == [10, 20]


def test_inpaint_nltv_builds_weights(degraded, tmp_path, capsys):
    assert run("inpaint", "--mask", degraded, "--out", tmp_path / "n.pgm", "--reg", "nltv",
               "--max-outer", 2) == 0
    assert "weights:" in capsys.readouterr().out


def test_inpaint_errors(degraded, tmp_path, capsys):
    assert run("inpaint", "--mask", tmp_path / "missing.wim", "--out", tmp_path / "x.pgm") == 1
    small = tmp_path / "small.pgm"
    save_image(np.zeros((32, 32)), small)
    assert run("inpaint", "--mask", degraded, "--out", tmp_path / "x.pgm", "--ref", small) == 1
    with pytest.raises(SystemExit):
        run("inpaint", "--mask", degraded, "--out", tmp_path / "x.pgm", "--plot", tmp_path / "p.svg")
    assert run("inpaint", "--mask", degraded, "--out", tmp_path / "x.pgm", "--lambda", -1) == 1


def test_bench_list(capsys):
    assert run("bench", "--list") == 0
    names = capsys.readouterr().out.split()
    assert "cameraman-hl" in names and "goldhill-random30" in names


def test_bench_unknown_preset(capsys):
    assert run("bench", "--preset", "nope") == 1
    assert "unknown preset" in capsys.readouterr().err


def tiny_preset(tmp_path, crop_file):
    d = load_preset("cameraman-hl").to_dict()
    d.update(name="tiny", image=str(crop_file), levels=3)
    d["scenario"]["level_size"] = 16
    for spec in d["methods"].values():
        spec["config"]["max_outer"] = 3
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(d))
    return path


def test_bench_outputs_and_psnr_from_files(tmp_path, crop_file, capsys):
    preset = tiny_preset(tmp_path, crop_file)
    out = tmp_path / "out"
    assert run("bench", "--preset", preset, "--out-dir", out, "--plot", tmp_path / "p.svg") == 0
    table = capsys.readouterr().out
    ref = load_image(crop_file)
    for method in ("tv-alg1", "tv-bos"):
        value = psnr(ref, load_image(out / f"tiny_{method}.pgm"))
        assert f"{value:.2f}" in table
    rows = read_trace_csv(out / "tiny_trace.csv")
    assert {r["method"] for r in rows} == {"tv-alg1", "tv-bos"}
    assert (tmp_path / "p.svg").exists()


def test_bench_deterministic(tmp_path, crop_file):
    preset = tiny_preset(tmp_path, crop_file)
    columns = []
    for sub in ("a", "b"):
        assert run("bench", "--preset", preset, "--out-dir", tmp_path / sub) == 0
        rows = read_trace_csv(tmp_path / sub / "tiny_trace.csv")
        columns.append([{k: v for k, v in r.items() if k != "elapsed_s"} for r in rows])
    assert columns[0] == columns[1]


def test_bench_missing_image(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("WAVINPAINT_IMAGES", raising=False)
    assert run("bench", "--preset", "goldhill-hl", "--out-dir", tmp_path) == 1
    assert "not bundled" in capsys.readouterr().err
