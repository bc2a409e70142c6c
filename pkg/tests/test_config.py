import textwrap

import pytest

from curvlab import cli, config
from curvlab.config import ConfigError

BASE = textwrap.dedent("""\
    schema = "curvlab.run/1"

    [problem]
    n = 4
    profile = { kind = "Constant", params = { k_infinity = 8.0 } }

    [solve]
    u0 = 0.5
    r_max = 1e4
    rel_tol = 1e-12

    [outputs]
    directory = "results"
    formats = ["json"]

    [scenario]
    name = "bubble"
    checks = ["POHOZAEV_IDENTITY"]
    """)


def test_parse_full_document():
    cfg = config.parse(BASE, "run.toml")
    sc = cfg.scenario
    assert (sc.name, sc.n, sc.r_max, sc.rel_tol) == ("bubble", 4, 1e4, 1e-12)
    assert sc.initial.u0 == 0.5 and sc.checks == ("POHOZAEV_IDENTITY",)
    assert cfg.formats == ("json",) and str(cfg.output_dir) == "results"
    assert cfg.to_dict()["schema"] == config.SCHEMA


def test_defaults():
    text = BASE.split("[outputs]")[0]
    cfg = config.parse(text, "x/my-run.toml")
    assert cfg.scenario.name == "my-run"
    assert cfg.formats == ("csv", "json")
    assert cfg.scenario.checks == tuple(config.CATALOGUE)


def test_overrides_take_precedence():
    cfg = config.parse(BASE, overrides={"r_max": 50.0, "rel_tol": 1e-8, "out": "o",
                                        "formats": ["csv"]})
    assert cfg.scenario.r_max == 50.0 and cfg.scenario.rel_tol == 1e-8
    assert str(cfg.output_dir) == "o" and cfg.formats == ("csv",)


@pytest.mark.parametrize("old, new, key, line", [
    ("n = 4", "n = 2", "problem.n", 4),
    ("n = 4", "n = 4.5", "problem.n", 4),
    ("u0 = 0.5", "u0 = -1.0", "solve.u0", 8),
    ("u0 = 0.5", "u0 = \"high\"", "solve.u0", 8),
    ("rel_tol = 1e-12", "rel_tol = 0.5", "solve.rel_tol", 10),
    ("k_infinity = 8.0", "k_infinity = -8.0", "problem.profile.params.k_infinity", 5),
    ("kind = \"Constant\"", "kind = \"Wobbly\"", "problem.profile", 5),
    ("formats = [\"json\"]", "formats = [\"png\"]", "outputs.formats", 14),
    ("checks = [\"POHOZAEV_IDENTITY\"]", "checks = [\"THM_Z\"]", "scenario.checks", 18),
    ("r_max = 1e4", "r_max = 1e4\nspeed = 3", "solve.speed", 10),
    ("schema = \"curvlab.run/1\"", "schema = \"other/2\"", "schema", 1),
    ("u0 = 0.5", "u0 = 0.5\nbracket = [1.0, 2.0]", "solve", 7),
])
def test_errors_name_key_and_line(old, new, key, line):
    with pytest.raises(ConfigError) as info:
        config.parse(BASE.replace(old, new), "run.toml")
    err = info.value
    assert err.key == key and err.line == line
    assert str(err).startswith(f"run.toml:{line}: [{key}]")


def test_dimension_message():
    with pytest.raises(ConfigError, match="n must be ≥ 3"):
        config.parse(BASE.replace("n = 4", "n = 2"))


def test_invalid_toml():
    with pytest.raises(ConfigError, match="invalid TOML") as info:
        config.parse(BASE + "\n[broken\n", "run.toml")
    assert info.value.line is not None


def test_cylinder_and_bracket_sections():
    text = BASE.replace("u0 = 0.5", "cylinder = { v0 = 0.9, relative = true, s_min = -2.0 }")
    init = config.parse(text).scenario.initial
    assert init.cylinder == {"s0": 0.0, "v0": 0.9, "vprime0": 0.0, "relative": True,
                             "s_min": -2.0}
    text = BASE.replace("u0 = 0.5", "bracket = [1.0, 2.0]\ntarget = \"Crossed\"\nmax_iter = 7")
    init = config.parse(text).scenario.initial
    assert init.bracket == (1.0, 2.0) and init.target == "Crossed" and init.max_iter == 7
    with pytest.raises(ConfigError):
        config.parse(BASE.replace("u0 = 0.5", "bracket = [2.0, 1.0]"))
    with pytest.raises(ConfigError):
        config.parse(BASE.replace("u0 = 0.5", "cylinder = { v0 = 0.9, speed = 1 }"))


def test_sweep_section():
    cfg = config.parse(BASE + "\n[sweep]\naxis = \"initial.u0\"\nvalues = [0.25, 0.5]\n")
    assert cfg.sweep_axis == "initial.u0" and cfg.sweep_values == [0.25, 0.5]
    with pytest.raises(ConfigError) as info:
        config.parse(BASE + "\n[sweep]\naxis = \"initial.bracket.0\"\nvalues = [1.0]\n")
    assert info.value.key == "sweep.axis"


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        config.load(tmp_path / "nope.toml")


def test_shipped_configs_parse():
    paths = cli.shipped_configs()
    assert len(paths) >= 9
    names = {config.load(p).scenario.name for p in paths}
    assert {"bubble-n4", "cylinder-n4", "delaunay-n5"} <= names


def test_config_file_is_not_mutated(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(BASE)
    before = path.read_bytes()
    config.load(path, {"r_max": 10.0, "out": "elsewhere"})
    assert path.read_bytes() == before
