"""Tests for experiment config parsing."""
from pathlib import Path

import numpy as np
import pytest

from rnls.config import load_config, parse_config
from rnls.errors import ConfigError
from rnls.fieldio import write_field
from rnls.grid import Grid

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
grid.boundary = "dirichlet"
grid.lower = 0.0
grid.upper = 1.0
grid.points = 32
model.omega = -10.0
"""


class TestParse:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.grid == Grid((0.0,), (1.0,), (32,), "dirichlet")
        assert cfg.model.omega == -10.0 and cfg.model.beta == 1.0
        assert cfg.dgf.tau == 0.1 and cfg.dgf.alpha == "adaptive"
        assert cfg.initial_kind == "sine" and cfg.reference_kind == "none"
        assert cfg.output.records and cfg.output.timestamp

    def test_full_2d(self):
        cfg = parse_config("""
grid.lower = [-8.0, -8.0]
grid.upper = [8.0, 8.0]
grid.h = 0.25
model.omega = -10
model.beta = 100
model.rotation = 0.5
model.gamma = [1, 1]
dgf.alpha = 3
dgf.stop_rule = "action"
dgf.max_iters = 100
initial.kind = "vortex_mix"
output.records = false
seed = 7
""")
        assert cfg.grid.points == (64, 64) and cfg.grid.boundary == "periodic"
        assert cfg.model.gamma == (1.0, 1.0) and cfg.dgf.alpha == 3.0
        assert cfg.initial_kind == "vortex_mix" and not cfg.output.records and cfg.seed == 7

    def test_table_syntax_is_equivalent(self):
        a = parse_config(MINIMAL)
        b = parse_config('[grid]\nboundary = "dirichlet"\nlower = 0.0\nupper = 1.0\npoints = 32\n[model]\nomega = -10.0\n')
        assert a.grid == b.grid and a.model == b.model

    @pytest.mark.parametrize("extra,match", [
        ("model.omegaa = 1", "unknown key 'model.omegaa'"),
        ("solver.tau = 1", "unknown key 'solver'"),
        ("dgf.tau = 'fast'", "dgf.tau"),
        ("dgf.tau = -1.0", "tau must be positive"),
        ("dgf.max_iters = 2.5", "dgf.max_iters"),
        ("initial.kind = 'gauss'", "initial.kind"),
        ("reference.kind = 'file'", "reference.path"),
        ("output.records = 1", "output.records"),
        ("grid.h = 0.5", "either grid.points or grid.h"),
        ("seed = 'x'", "seed"),
    ])
    def test_errors_name_the_field(self, extra, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(MINIMAL + extra + "\n")

    def test_syntax_error_has_line(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("grid.lower = 0\ngrid.upper = 1\nmodel.omega = \n", source="x.cfg")

    def test_missing_omega(self):
        with pytest.raises(ConfigError, match="model.omega"):
            parse_config(MINIMAL.replace("model.omega = -10.0", ""))

    def test_invalid_model(self):
        with pytest.raises(ConfigError, match="defocusing"):
            parse_config(MINIMAL + "model.beta = -1\n")

    def test_paths_relative_to_config(self, tmp_path):
        g = Grid((0.0,), (1.0,), (32,), "dirichlet")
        write_field(np.ones(31), g, tmp_path / "ref.bin")
        (tmp_path / "c.cfg").write_text(MINIMAL + 'reference.kind = "file"\nreference.path = "ref.bin"\n')
        cfg = load_config(tmp_path / "c.cfg")
        assert cfg.reference_path == tmp_path / "ref.bin"
        (tmp_path / "d.cfg").write_text(MINIMAL + 'reference.kind = "file"\nreference.path = "nope.bin"\n')
        with pytest.raises(ConfigError, match="does not exist"):
            load_config(tmp_path / "d.cfg")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.cfg")


class TestBundled:
    @pytest.mark.parametrize("path", sorted(CONFIGS.rglob("*.cfg")), ids=lambda p: p.name)
    def test_bundled_configs_load(self, path):
        cfg = load_config(path)
        assert cfg.model.omega < 0

    def test_example_parameters(self):
        e1 = load_config(CONFIGS / "example1_omega10.cfg")
        assert e1.grid.points == (128,) and e1.dgf.tau == 0.1 and e1.dgf.residual_tol == 1e-13
        e2 = load_config(CONFIGS / "example2_Omega05.cfg")
        assert e2.grid.spacing == (0.25, 0.25) and e2.model.beta == 100 and e2.model.rotation == 0.5
        assert e2.dgf.stop_rule == "action" and e2.dgf.action_tol == 1e-12
