"""Configuration grammar, scenario registry and the command line."""

import os

import numpy as np
import pytest

from femlbm.cli import EXIT_CONFIG, EXIT_OK, main
from femlbm.errors import ConfigError
from femlbm.scenarios import (
    default_config,
    get_spec,
    parse_config,
    scenario_names,
    serialize_config,
    validate_config,
    write_csv,
)

SAMPLE = """\
# a comment
[scenario]
name = gauss-1d

[discretization]
h_c = 0.01
h_f = 0.005
L_overlap = 0.1
max_iter = 4

[physics]
T = 0.4
D = 0.01
"""


# -- config grammar ---------------------------------------------------------

def test_parse_serialize_roundtrip_is_identity():
    cfg = parse_config(SAMPLE)
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    #and serialization is a fixed point afterwards
    assert serialize_config(parse_config(text)) == text


def test_parse_preserves_order_and_values():
    cfg = parse_config(SAMPLE)
    assert list(cfg.sections) == ["scenario", "discretization", "physics"]
    assert cfg.get_str("scenario", "name") == "gauss-1d"
    assert cfg.get_float("discretization", "h_c") == 0.01
    assert cfg.get_int("discretization", "max_iter") == 4


def test_parse_collects_every_error_before_raising():
    bad = "key_before_section = 1\n[ok]\nno_equals_sign\n[]\nx = 2\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    msgs = exc.value.messages
    #the empty [ ] header also invalidates line 5's assignment
    assert len(msgs) == 4
    assert any("line 1" in m for m in msgs)
    assert any("line 3" in m for m in msgs)
    assert any("line 4" in m for m in msgs)
    assert any("line 5" in m for m in msgs)


def test_typed_access_errors_and_defaults():
    cfg = parse_config("[a]\nx = hello\nflag = yes\n")
    with pytest.raises(ConfigError):
        cfg.get_float("a", "x")
    with pytest.raises(ConfigError):
        cfg.get_int("a", "missing")
    assert cfg.get_float("a", "missing", 2.5) == 2.5
    assert cfg.get_bool("a", "flag") is True


def test_apply_overrides_sets_and_rejects():
    cfg = parse_config(SAMPLE)
    cfg.apply_overrides(["discretization.h_c=0.02", "physics.T=1.0"])
    assert cfg.get_float("discretization", "h_c") == 0.02
    assert cfg.get_float("physics", "T") == 1.0
    with pytest.raises(ConfigError):
        cfg.apply_overrides(["malformed"])
    with pytest.raises(ConfigError):
        cfg.apply_overrides(["nosection=1"])


# -- registry and validation ------------------------------------------------

def test_every_builtin_default_config_validates():
    for name in scenario_names():
        cfg = default_config(name)
        assert validate_config(cfg) == [], name


def test_validation_flags_inadmissible_timestep():
    cfg = default_config("gauss-1d")
    #dt_f far below the non-negativity bound h_f^2/(2 D)
    cfg.set("discretization", "dt_f", "1e-7")
    msgs = validate_config(cfg)
    assert any("non-negativity" in m for m in msgs)


def test_validation_flags_non_integer_eta():
    cfg = default_config("bimolecular-1d")
    cfg.set("discretization", "dt_f", "0.0000513")
    msgs = validate_config(cfg)
    assert any("integer" in m for m in msgs)


def test_unknown_scenario_reported():
    cfg = parse_config("[scenario]\nname = not-a-scenario\n")
    msgs = validate_config(cfg)
    assert len(msgs) == 1 and "unknown scenario" in msgs[0]
    with pytest.raises(ConfigError):
        get_spec("not-a-scenario")


def test_scenario_kinds_are_run_or_study():
    kinds = {get_spec(n).kind for n in scenario_names()}
    assert kinds == {"run", "study"}


# -- CSV determinism --------------------------------------------------------

def test_write_csv_is_byte_deterministic(tmp_path):
    rows = [(0.1, 1e-17, "label"), (2.0 / 3.0, np.float64(np.pi), "x")]
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_csv(p1, ("c1", "c2", "c3"), rows)
    write_csv(p2, ("c1", "c2", "c3"), rows)
    b1 = p1.read_bytes()
    assert b1 == p2.read_bytes()
    #17 significant digits round-trip floats exactly
    import csv as csvmod
    with open(p1, newline="") as fh:
        out = list(csvmod.reader(fh))
    assert float(out[1][0]) == 0.1
    assert float(out[2][1]) == np.float64(np.pi)
    assert b"\r" not in b1  # unix newlines on every platform


# -- command line -----------------------------------------------------------

def test_cli_list_exits_zero(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in scenario_names():
        assert name in out


def test_cli_validate_accepts_builtin_scenario():
    assert main(["validate", "--scenario", "gauss-1d", "--quiet"]) == EXIT_OK


def test_cli_validate_rejects_bad_override(capsys):
    code = main(["validate", "--scenario", "gauss-1d",
                 "--override", "discretization.dt_f=1e-9"])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_requires_config_or_scenario(capsys):
    assert main(["run"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_rejects_unknown_scenario(capsys):
    assert main(["run", "--scenario", "nope"]) == EXIT_CONFIG


def test_cli_study_rejects_run_scenarios(capsys):
    code = main(["study", "--scenario", "gauss-1d", "--quiet"])
    assert code == EXIT_CONFIG
    assert "not a study" in capsys.readouterr().err


def test_cli_run_transfer_study_writes_csv(tmp_path, capsys):
    code = main(["study", "--scenario", "transfer-study",
                 "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_OK
    files = sorted(os.listdir(tmp_path))
    assert any(f.endswith(".csv") for f in files)
    #byte-determinism of a full scenario run
    tmp2 = tmp_path / "again"
    assert main(["study", "--scenario", "transfer-study",
                 "--out", str(tmp2), "--quiet"]) == EXIT_OK
    for f in files:
        if f.endswith(".csv"):
            assert (tmp_path / f).read_bytes() == (tmp2 / f).read_bytes()


def test_cli_run_from_config_file(tmp_path):
    path = tmp_path / "case.cfg"
    cfg = default_config("lbm-box-h-theorem")
    cfg.set("discretization", "h", "0.05")
    cfg.set("discretization", "dt", "0.05")
    cfg.set("discretization", "n_steps", "20")
    path.write_text(serialize_config(cfg))
    code = main(["run", "--config", str(path), "--out", str(tmp_path),
                 "--quiet"])
    assert code == EXIT_OK
    assert any(f.startswith("lbm-box-h-theorem") and f.endswith(".csv")
               for f in os.listdir(tmp_path))
