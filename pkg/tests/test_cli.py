import json
import subprocess
import sys

import numpy as np
import pytest

from thintlm import cli, config
from thintlm.scenario import read_snapshot_bin, write_snapshot_bin


def small_config(**over):
    raw = {
        "name": "tiny-box",
        "mesh": {"kind": "shunt", "window": [0.06, 0.04], "dl": 0.002,
                 "boundaries": {e: "pec" for e in ("xmin", "xmax", "ymin", "ymax")}},
        "geometry": {"type": "ellipse", "a": 0.02, "b": 0.012, "center": [0.03, 0.02]},
        "material": "pec",
        "excitation": {"type": "point", "x": 0.035, "y": 0.023,
                       "envelope": {"type": "gaussian", "f_max": 8e9}},
        "probes": [{"name": "A", "x": 0.024, "y": 0.017}],
        "run": {"n_steps": 512},
        "analysis": {"n_peaks": 3},
        "outputs": {"snapshots": [100], "snapshot_binary": True},
    }
    for k, v in over.items():
        raw[k] = v
    return raw


def write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def test_run_writes_manifest_and_outputs(tmp_path, capsys):
    cfg = write(tmp_path, small_config())
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["scenario"] == "tiny-box" and man["crossings"] > 0
    for name in ("crossings.csv", "probe_A.csv", "spectrum_A.csv", "resonances_A.csv",
                 "snapshot_0000100.csv", "snapshot_0000100.bin"):
        assert name in man["outputs"] and len(man["outputs"][name]) == 64
    grid = read_snapshot_bin(out / "snapshot_0000100.bin")
    assert grid.shape == (30, 20)
    csv_grid = np.loadtxt(out / "snapshot_0000100.csv", delimiter=",", ndmin=2)
    assert np.allclose(csv_grid, grid)
    assert "A:" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    cfg = write(tmp_path, small_config())
    hashes = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert cli.main(["run", cfg, "--out", str(out)]) == 0
        hashes.append(json.loads((out / "manifest.json").read_text())["outputs"])
    assert hashes[0] == hashes[1]


def test_snapshot_bin_round_trip(tmp_path):
    a = np.arange(12.0).reshape(4, 3)
    p = tmp_path / "s.bin"
    write_snapshot_bin(p, a)
    raw = p.read_bytes()
    assert raw[:8] == b"TLMSNAP1" and len(raw) == 16 + 12 * 8
    assert np.array_equal(read_snapshot_bin(p), a)


@pytest.mark.parametrize("field, mutate", [
    ("mesh.dl", lambda r: r["mesh"].update(dl=0.0015)),
    ("mesh.kind", lambda r: r["mesh"].update(kind="tee")),
    ("run.n_steps", lambda r: r["run"].update(n_steps=-5)),
    ("probes[0]", lambda r: r["probes"][0].update(x=1.0)),
    ("geometry.a", lambda r: r["geometry"].pop("a")),
])
def test_config_errors_name_the_field(tmp_path, capsys, field, mutate):
    raw = small_config()
    mutate(raw)
    with pytest.raises(config.ConfigError) as exc:
        config.validate(raw)
    assert exc.value.path == field
    assert cli.main(["run", write(tmp_path, raw)]) == 1
    assert field in capsys.readouterr().err


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["run", str(p)]) == 1
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 1


def test_runtime_error_exit_code(tmp_path):
    # ellipse touching the outer edge validates but fails at crossing search
    raw = small_config(geometry={"type": "ellipse", "a": 0.0299, "b": 0.012, "center": [0.03, 0.02]})
    assert cli.main(["run", write(tmp_path, raw), "--out", str(tmp_path / "o")]) == 2


def test_analyze_and_se(tmp_path, capsys):
    out = tmp_path / "out"
    raw = small_config(analysis={"n_peaks": 3, "se": True})
    assert cli.main(["run", write(tmp_path, raw), "--out", str(out)]) == 0
    capsys.readouterr()
    res = tmp_path / "r.csv"
    se_out = tmp_path / "se.csv"
    code = cli.main(["analyze", str(out / "probe_A.csv"), "--out", str(res),
                     "--se", str(out / "probe_A.csv"), str(out / "probe_A_without.csv"),
                     "--se-out", str(se_out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "Hz" in text and "se_mean_dB" in text
    assert res.read_text().startswith("f_Hz,mag")
    assert se_out.read_text().startswith("f_Hz,SE_dB")
    short = tmp_path / "short.csv"
    short.write_text("step,time_s,value\n0,0,1\n1,1e-12,0\n")
    assert cli.main(["analyze", str(short)]) == 1


def test_single_element_sweep(tmp_path, capsys):
    cfg = write(tmp_path, small_config())
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", cfg, "--dl", "0.002", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("dl,b/dl,f1_Hz")
    assert len(lines) == 2 and lines[1].startswith("0.002,6.0")
    assert cli.main(["sweep", cfg, "--dl", "0.0015", "--out", str(out)]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "thintlm", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "run" in r.stdout
