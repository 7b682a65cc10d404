import json
import math

import numpy as np
import pytest

from optspline.cli import main
from optspline.kernels import CompactKernel, SampledFunction, bspline_eval, cardinal_spline
from optspline.pnm import read_image, write_image


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_design_default(capsys, tmp_path):
    code, out, err = run(capsys, "design", "--report", str(tmp_path / "r.json"))
    assert code == 0
    k = CompactKernel.from_dict(json.loads(out))
    assert k.degree == 3
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["hat_snr_db"] == pytest.approx(20.08, abs=0.05)
    announced = json.loads(err.splitlines()[0].split(" ", 2)[2])
    assert announced["degree"] == 3 and announced["Q"] == 64


def test_design_byte_identical(capsys):
    first = run(capsys, "design")[1]
    assert run(capsys, "design")[1] == first


def test_design_filter_self_recovery(capsys, tmp_path):
    dump = tmp_path / "c3.csv"
    assert run(capsys, "kernel-dump", "--which", "cardinal", "--halfwidth", "40", "--tol", "1e-13",
               "--out", str(dump))[0] == 0
    code, out, _ = run(capsys, "design", "--mode", "filter", "--target", str(dump), "--halfwidth", "40",
                       "--tol", "1e-13", "--rho-d", "0.16666666666666666,0.6666666666666666,0.16666666666666666")
    assert code == 0
    k = CompactKernel.from_dict(json.loads(out))
    t = np.arange(4 * 64 + 1) / 64
    assert np.max(np.abs(k(t) - bspline_eval(3, t))) < 1e-8


@pytest.mark.parametrize("argv,code", [
    (["design", "--mode", "filter"], 2),
    (["design", "--rho-d", "1,2,1"], 3),
    (["design", "--rho-d", "1,2,1,5"], 2),
    (["design", "--rho-d", "a,b"], 2),
    (["design", "--rho-d", "0.5,0.5"], 3),
    (["design", "--mode", "filter", "--target", "/nonexistent.csv"], 4),
    (["enlarge", "/nonexistent.pgm", "/tmp/x.pgm"], 4),
    (["enlarge", "--factor", "1", "/nonexistent.pgm", "/tmp/x.pgm"], 2),
    (["compare", "--corpus", "/nonexistent-dir"], 4),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_unknown_option_is_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["design", "--bogus"])
    assert exc.value.code == 2


def test_malformed_image_is_io(capsys, tmp_path):
    (tmp_path / "bad.pgm").write_bytes(b"P5\n9 9\n255\n")
    assert run(capsys, "enlarge", str(tmp_path / "bad.pgm"), str(tmp_path / "o.pgm"))[0] == 4


def test_kernel_dump_cardinal(capsys):
    code, out, _ = run(capsys, "kernel-dump", "--which", "cardinal")
    f = SampledFunction.from_csv(out)
    ref = cardinal_spline(3)
    assert code == 0 and f.same_grid(ref)
    np.testing.assert_allclose(f.values, ref.values, atol=1e-15)
    assert f.samples_at([0])[0] == pytest.approx(1.0, abs=1e-9)


def test_kernel_dump_bspline(capsys):
    f = SampledFunction.from_csv(run(capsys, "kernel-dump", "--which", "bspline", "--q", "8")[1])
    np.testing.assert_allclose(f.values, bspline_eval(3, f.t), atol=1e-15)


def test_interp(capsys, tmp_path):
    src = tmp_path / "x.txt"
    src.write_text("offset 0\n0 1 2 3 4 5 6 7 8 9\n")
    code, out, _ = run(capsys, "interp", "--kernel", "bspline1", "--q", "4", str(src))
    f = SampledFunction.from_csv(out)
    assert code == 0
    np.testing.assert_allclose(f.samples_at(np.arange(0, 37)), np.arange(37) / 4, atol=1e-12)


@pytest.mark.parametrize("factor", [2, 3])
def test_enlarge_dimensions_and_repeatability(capsys, tmp_path, factor):
    write_image(str(tmp_path / "in.pgm"), np.random.default_rng(0).random((20, 14)))
    outs = []
    for name in ("a.pgm", "b.pgm"):
        assert run(capsys, "enlarge", "--factor", str(factor), str(tmp_path / "in.pgm"), str(tmp_path / name))[0] == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    pix, depth = read_image(str(tmp_path / "a.pgm"))
    assert pix.shape == (20 * factor, 14 * factor) and depth == 8


def test_compare(capsys, tmp_path, monkeypatch):
    rng = np.random.default_rng(1)
    for name in ("one.pgm", "two.pgm"):
        write_image(str(tmp_path / name), rng.random((24, 24)))
    monkeypatch.setenv("OPTSPLINE_CORPUS", str(tmp_path))
    code, out, err = run(capsys, "compare", "--scenario", "2", "--methods", "bicubic,opt_sinc")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "image,method,scenario,psnr_db" and len(rows) == 5
    assert "Overall Average" in err
    assert run(capsys, "compare", "--scenario", "2", "--methods", "bicubic,opt_sinc")[1] == out


def test_compare_empty_and_missing(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("OPTSPLINE_CORPUS", raising=False)
    assert run(capsys, "compare")[0] == 2
    code, out, _ = run(capsys, "compare", "--corpus", str(tmp_path))
    assert code == 5 and out == "image,method,scenario,psnr_db\n"
    assert run(capsys, "compare", "--corpus", str(tmp_path), "--methods", "lanczos")[0] == 2
