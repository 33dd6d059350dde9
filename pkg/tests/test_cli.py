import pytest

from forster.cli import cli_dispatch
from forster.io import read_csv, read_manifest_files


def run(argv, capsys):
    code = cli_dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_blockade_prints_report(tmp_path, capsys):
    code, out, _ = run(["blockade", "--config", "default", "--out", str(tmp_path)], capsys)
    assert code == 0
    for key in ("U_off(MHz)", "U_on(MHz)", "enhancement", "radius_ratio"):
        assert key in out
    assert "U_on(MHz) = 3.5921" in out
    assert "U_off(MHz) = 0.101121" in out
    assert (tmp_path / "blockade.manifest").exists()


def test_oscillate_then_fit_round_trip(tmp_path, capsys):
    assert run(["oscillate", "--no-noise", "--out", str(tmp_path)], capsys)[0] == 0
    code, out, _ = run(["fit", "damped-sine", str(tmp_path / "oscillate.csv"),
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    f_osc = float(next(l for l in out.splitlines() if l.startswith("f_osc")).split("=")[1])
    assert f_osc == pytest.approx(13.52, rel=0.01)


def test_fit_power_law_and_double_gaussian(tmp_path, capsys):
    assert run(["scan-r", "--no-noise", "--out", str(tmp_path)], capsys)[0] == 0
    code, out, _ = run(["fit", "power-law", str(tmp_path / "scan_r_oscillation.csv"),
                        "--out", str(tmp_path)], capsys)
    assert code == 0 and "exponent = -3.0" in out
    assert run(["spectrum", "--no-noise", "--out", str(tmp_path)], capsys)[0] == 0
    code, out, _ = run(["fit", "double-gaussian", str(tmp_path / "spectrum.csv"),
                        "--y-column", "P_rr", "--out", str(tmp_path)], capsys)
    assert code == 0 and "resolved = True" in out


def test_map_seed_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["map", "--seed", "7", "--out", str(a)], capsys)[0] == 0
    assert run(["map", "--seed", "7", "--out", str(b)], capsys)[0] == 0
    assert (a / "map.csv").read_bytes() == (b / "map.csv").read_bytes()
    assert read_manifest_files(a / "map.manifest") == read_manifest_files(b / "map.manifest")


def test_map_seed_changes_output(tmp_path, capsys):
    run(["map", "--seed", "7", "--out", str(tmp_path / "a")], capsys)
    run(["map", "--seed", "8", "--out", str(tmp_path / "b")], capsys)
    assert (tmp_path / "a" / "map.csv").read_bytes() != (tmp_path / "b" / "map.csv").read_bytes()


def test_stark_output(tmp_path, capsys):
    code, out, _ = run(["stark", "--out", str(tmp_path)], capsys)
    assert code == 0 and "at F = 32" in out
    header, data = read_csv(tmp_path / "stark.csv")
    assert header[0] == "F(mV/cm)" and data.shape == (31, 6)


def test_spectrum_zero_field(tmp_path, capsys):
    code, out, _ = run(["spectrum", "--field", "0", "--no-noise", "--out", str(tmp_path)], capsys)
    assert code == 0
    header, data = read_csv(tmp_path / "spectrum.csv")
    assert header == ["delta(MHz)", "P_gg", "P_gr+P_rg", "P_rr"]


def test_unknown_subcommand_exit_1(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == 1 and "usage" in err


def test_no_subcommand_exit_1(capsys):
    assert run([], capsys)[0] == 1


def test_invalid_config_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("c3_mhz_um3 = -1\n")
    code, _, err = run(["blockade", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 1 and "c3_mhz_um3" in err and "line 1" in err


def test_regime_violation_exit_1(tmp_path, capsys):
    code, _, err = run(["blockade", "--f-off", "33", "--out", str(tmp_path)], capsys)
    assert code == 1


def test_missing_fit_file_exit_2(tmp_path, capsys):
    code, _, err = run(["fit", "damped-sine", str(tmp_path / "nope.csv"),
                        "--out", str(tmp_path)], capsys)
    assert code == 2 and "nope.csv" in err


def test_unwritable_output_exit_2(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(["blockade", "--out", str(blocker / "sub")], capsys)
    assert code == 2
