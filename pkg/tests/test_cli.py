import json

import pytest

from blochvariety import cli
from blochvariety.config import DEFAULTS, load_config, merge_config, omega_grid
from blochvariety.errors import ConfigError, EigenFailure


def _write(tmp_path, text):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return str(p)


SMALL = """
[model]
kind = "rods"
[basis]
order = 1
grid = 16
[path]
samples = 2
segments = ["GX"]
[quadratic]
omega_over_2pi = [0.05, 0.1]
segments = ["GX"]
nev = 6
[standard]
nbands = 2
"""


def test_defaults():
    cfg = load_config(None)
    assert cfg["basis"]["order"] == DEFAULTS["basis"]["order"]
    assert len(omega_grid(cfg)) == 60


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        merge_config({"nope": {}})
    with pytest.raises(ConfigError):
        merge_config({"basis": {"colour": 1}})
    with pytest.raises(ConfigError):
        merge_config({"basis": {"order": "two"}})
    with pytest.raises(ConfigError):
        merge_config({"solver": {"method": "magic"}})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[basis\norder = 1"))


def test_bands_commands(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "out"
    assert cli.main(["bands-quadratic", "-c", cfg, "-o", str(out)]) == 0
    assert cli.main(["bands-standard", "-c", cfg, "-o", str(out)]) == 0
    head = (out / "bands_quadratic.csv").read_text().splitlines()[0]
    assert head == "alpha,kx,ky,kz,omega_over_2pi,eta_re,eta_im,residual,p_norm,s_abs,flag"
    man = json.loads((out / "manifest_quadratic.json").read_text())
    assert man["config"]["basis"]["order"] == 1 and "numpy" in man["versions"]
    assert (out / "plot_standard.gp").exists()


def test_exit_codes(tmp_path, monkeypatch):
    bad = _write(tmp_path, '[model]\nkind = "glass"\n')
    assert cli.main(["admissible", "-c", bad]) == 2
    hot = _write(tmp_path, SMALL.replace("[0.05, 0.1]", "[0.05, 0.3]"))
    assert cli.main(["admissible", "-c", hot, "-o", str(tmp_path)]) == 4
    strict = _write(tmp_path, SMALL.replace("[0.05, 0.1]", "[0.3]") + "[solver]\nstrict = true\n")
    assert cli.main(["bands-quadratic", "-c", strict, "-o", str(tmp_path)]) == 4

    def boom(*a, **k):
        raise EigenFailure("forced")

    monkeypatch.setattr(cli, "sweep_standard", boom)
    assert cli.main(["bands-standard", "-c", _write(tmp_path, SMALL), "-o", str(tmp_path)]) == 3


def test_validate_command(tmp_path, capsys):
    assert cli.main(["validate", "-o", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    verdict = json.loads(text.strip().splitlines()[-1])
    assert verdict["passed"] is True
    assert "PASS" in text


def test_converge_command(tmp_path):
    cfg = _write(
        tmp_path,
        '[model]\nkind = "homogeneous"\n[converge]\nk_ref_over_pi = [0.5, 0.0, 0.0]\n'
        "omega_over_2pi = 0.25\norders = [1]\n",
    )
    assert cli.main(["converge", "-c", cfg, "-o", str(tmp_path)]) == 0
    lines = (tmp_path / "converge.csv").read_text().splitlines()
    assert float(lines[1].split(",")[-1]) <= 1e-10
