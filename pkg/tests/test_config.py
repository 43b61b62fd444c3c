from __future__ import annotations

from pathlib import Path

import pytest

from kolbif.config import ConfigError, RunConfig, Tolerances, build_config, load_config
from kolbif.model import Orientation, ParamPoint


def write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.ini"
    path.write_text(text, encoding="utf-8")
    return path


def test_canonical_block(tmp_path):
    cfg = build_config(load_config(write(tmp_path, "[coefficients]\ntheta=1\ngamma=-1\ndelta=-2\nM=-1\n")))
    c, o = cfg.coefficients()
    assert (c.theta, c.gamma, c.delta, c.M, c.N) == (1.0, -1.0, -2.0, -1.0, 0.0)
    assert o is Orientation.FORWARD


def test_inline_comments(tmp_path):
    text = "[coefficients]  ; canonical\ntheta = 1\ngamma = -1  # note\ndelta = -2\nM = -1  ; cubic\n"
    c, _ = build_config(load_config(write(tmp_path, text))).coefficients()
    assert (c.theta, c.gamma, c.delta, c.M) == (1.0, -1.0, -2.0, -1.0)


def test_raw_block_maps_mu(tmp_path):
    text = "[raw]\np11=2\np12=1\np13=0\np21=-3\np22=-1\np23=0\ns1=0\ns2=0\n[analysis]\nmu=0.01,0.02\n"
    cfg = build_config(load_config(write(tmp_path, text)))
    c, o = cfg.coefficients()
    assert o is Orientation.REVERSED
    assert cfg.param_point() == ParamPoint(-0.01, -0.02)


def test_both_blocks_rejected(tmp_path):
    text = "[coefficients]\ntheta=1\ngamma=-1\ndelta=-2\n[raw]\np11=1\np12=1\np13=0\np21=0\np22=-1\np23=0\ns1=0\ns2=0\n"
    with pytest.raises(ConfigError):
        build_config(load_config(write(tmp_path, text)))


def test_missing_block_rejected_when_needed():
    cfg = build_config(load_config())
    with pytest.raises(ConfigError):
        cfg.coefficients()


@pytest.mark.parametrize("bad", ["tol_eq=0", "rtol=-1e-9"])
def test_tolerances_must_be_positive(tmp_path, bad):
    with pytest.raises(ConfigError):
        build_config(load_config(write(tmp_path, f"[coefficients]\ntheta=1\ngamma=-1\ndelta=-2\n[tolerances]\n{bad}\n")))


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError):
        build_config(load_config(write(tmp_path, "[coefficients]\ntheta=1\ngamma=-1\ndelta=-2\nQ=3\n")))
    with pytest.raises(ConfigError):
        build_config(load_config(write(tmp_path, "[analysis]\nradius=0.1\ncolour=red\n")))


def test_flags_win_over_file(tmp_path):
    path = write(tmp_path, "[coefficients]\ntheta=1\ngamma=-1\ndelta=-2\n[analysis]\nradius=0.05\nseed=3\n")
    cfg = build_config(load_config(path, ["analysis.seed=9"]), radius=0.08)
    assert cfg.radius == 0.08
    assert cfg.seed == 9


def test_case_params_replace_file_coefficients(tmp_path):
    path = write(tmp_path, "[raw]\np11=1\np12=1\np13=0\np21=0\np22=2\np23=0\ns1=0\ns2=0\n")
    cfg = build_config(load_config(path, case_params="VII"))
    assert cfg.raw is None
    assert cfg.coefficients()[0].theta == 1.0


def test_formats_validated():
    with pytest.raises(ConfigError):
        RunConfig(canonical={"theta": 1.0, "gamma": -1.0, "delta": -2.0}, formats=("png",))


def test_default_tolerances_positive():
    t = Tolerances()
    assert min(t.tol_eq, t.tol_class, t.tol_geom, t.tol_a, t.rtol, t.atol) > 0
