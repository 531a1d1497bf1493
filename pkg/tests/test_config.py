import pytest

from kkwave import config as cf
from kkwave.errors import ConfigurationError


def test_defaults_cover_schema():
    d = cf.defaults()
    assert set(d.values) == set(cf.SCHEMA)
    assert d["grid.n"] == 8192 and d["solver.engine"] == "split_step"


def test_parse_text_with_comments():
    cfg = cf.parse_text("""
        # a comment
        grid.n = 1024   # trailing
        potential.variant = gaussian
        diagnostics.enabled = yes
        potential.envelope_b = none
    """)
    assert cfg["grid.n"] == 1024 and cfg["potential.variant"] == "gaussian"
    assert cfg["diagnostics.enabled"] is True and cfg["potential.envelope_b"] is None


def test_all_errors_reported_together():
    with pytest.raises(ConfigurationError) as exc:
        cf.parse_text("grid.n = many\nfoo.bar = 1\nsolver.engine = magic\n")
    msg = str(exc.value)
    assert "grid.n" in msg and "foo.bar" in msg and "solver.engine" in msg


@pytest.mark.parametrize("text", [
    "grid.n = 1000",
    "grid.x_min = 5\ngrid.x_max = 1",
    "solver.dt = 0",
    "potential.variant = tabulated",
    "force.variant = tailored\ndiagnostics.enabled = true",
    "grid.n = 64\ngrid.n = 128",
    "no equals sign",
])
def test_invalid(text):
    with pytest.raises(ConfigurationError):
        cf.parse_text(text)


def test_roundtrip(tmp_path):
    cfg = cf.defaults().with_overrides({"packet.p0": "3.5", "potential.envelope_b": "60"})
    cfg.write(tmp_path / "c.txt")
    back = cf.load(tmp_path / "c.txt")
    assert back.values == cfg.values


def test_replace_and_overrides():
    cfg = cf.defaults().replace(solver__dt="0.01", packet__part="right")
    assert cfg["solver.dt"] == 0.01 and cfg["packet.part"] == "right"
    assert cf.parse_overrides(["a.b = 1", "c=x=y"]) == {"a.b": "1", "c": "x=y"}
    with pytest.raises(ConfigurationError):
        cf.parse_overrides(["novalue"])


def test_float_list_and_missing_file(tmp_path):
    assert cf.float_list("0, 0.1;0.25") == [0.0, 0.1, 0.25]
    with pytest.raises(ConfigurationError):
        cf.float_list("1,x")
    with pytest.raises(ConfigurationError):
        cf.load(tmp_path / "nope.txt")
