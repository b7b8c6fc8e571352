import json
import math

import numpy as np
import pytest

from levylab import config as cf
from levylab import measure as ms
from levylab.report import CheckRecord, ExperimentReport, render_svg


@pytest.mark.parametrize("name", cf.BUILTIN_MODELS)
def test_builtin_models_load(name):
    m = cf.load_model(name)
    assert isinstance(m, ms.LevyModel)


@pytest.mark.parametrize("body,kind", [
    ('[model]\nkind = "stable"\nalpha = 1.5\n', "stable"),
    ('kind = "stable"\nalpha = 1.2\nscale = 2.0\nsidedness = "two-sided"\n', "stable"),
    ('[model]\nkind = "piecewise"\n[[model.bands]]\nc = 1.0\np = 2.5\nlo = 0.0\nhi = 1.0\n'
     '[[model.bands]]\nc = 1.0\np = 2.2\nlo = 1.0\nhi = "inf"\n', "piecewise"),
    ('[model]\nkind = "tabulated"\nknots = [[0.1, 316.22776601683796], [1.0, 1.0], [10.0, 0.0031622776601683794]]\n',
     "tabulated"),
    ('[model]\nkind = "gaussian"\ngaussian_coef = 1.0\n', "gaussian"),
    ('[model]\nkind = "dyadic-alternating"\nc1 = 1.0\nc2 = 1.5\n', "dyadic-alternating"),
    ('[model]\nkind = "switching-exponent"\nalpha1 = 1.2\nalpha2 = 1.8\n', "switching-exponent"),
])
def test_model_files(tmp_path, body, kind):
    p = tmp_path / "m.toml"
    p.write_text(body)
    m = cf.load_model(p)
    assert m.kind == kind


def test_tabulated_file_equals_stable(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text('[model]\nkind = "tabulated"\nknots = [[0.1, 316.22776601683796], [1.0, 1.0], '
                 '[10.0, 0.0031622776601683794]]\n')
    x = np.logspace(-3, 3, 7)
    np.testing.assert_allclose(cf.load_model(p).one_sided_tail(x), ms.stable(1.5).one_sided_tail(x),
                               rtol=1e-9)


@pytest.mark.parametrize("body", [
    '[model]\nalpha = 1.5\n',  # no kind
    '[model]\nkind = "stable"\n',  # missing alpha
    '[model]\nkind = "stable"\nalpha = 1.5\ncolour = "red"\n',  # unknown key
    '[model]\nkind = "wiggly"\n',
    '[model]\nkind = "stable"\nalpha = 2.5\n',  # inadmissible index
    '[model\nkind = "stable"\n',  # bad TOML
])
def test_bad_model_files(tmp_path, body):
    p = tmp_path / "m.toml"
    p.write_text(body)
    with pytest.raises(cf.ConfigError):
        cf.load_model(p)


def test_missing_model_reference():
    with pytest.raises(cf.ConfigError):
        cf.load_model("/nonexistent/model.toml")


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("LEVYLAB_SEED", raising=False)
    assert cf.resolve_seed(None) == 0
    monkeypatch.setenv("LEVYLAB_SEED", "41")
    assert cf.resolve_seed(None) == 41
    assert cf.resolve_seed(3) == 3
    monkeypatch.setenv("LEVYLAB_SEED", "x")
    with pytest.raises(cf.ConfigError):
        cf.resolve_seed(None)


def test_experiment_file(tmp_path, monkeypatch):
    monkeypatch.delenv("LEVYLAB_SEED", raising=False)
    p = tmp_path / "e.toml"
    p.write_text('[run]\nsuites = ["lemma-2.1"]\nmodel = "example51"\nseed = 9\nout = "o"\n'
                 '[tolerances]\ndrift = 0.3\n[params."lemma-2.9"]\nn_paths = 100\n')
    cfg = cf.load_experiment(p)
    assert cfg.suites == ["lemma-2.1"] and cfg.model == "example51" and cfg.seed == 9
    assert cfg.tolerances == {"drift": 0.3}
    assert cfg.params["lemma-2.9"]["n_paths"] == 100
    assert cf.load_experiment(p, seed=2).seed == 2


def _report():
    rep = ExperimentReport("demo", "stable15", 7)
    rep.add(CheckRecord("a", "anchor text", {"x": np.float64(0.1), "v": np.arange(3), "inf": math.inf},
                        {"b": 1.0}, True, 10, 7, runtime=1.234))
    rep.add(CheckRecord("b", "anchor text", {}, {}, None))
    rep.series = [{"t": 0.5, "median": 1.0}, {"t": 0.25, "median": 2.0}]
    return rep


def test_report_json_roundtrip():
    rep = _report()
    d = json.loads(rep.json_text())
    assert d["passed"] is True
    assert d["records"][0]["statistics"] == {"x": 0.1, "v": [0, 1, 2], "inf": "inf"}
    assert "runtime" not in d["records"][0]
    assert d["records"][1]["passed"] is None


def test_report_failure_and_error():
    rep = _report()
    rep.records[0].passed = False
    assert not rep.passed
    rep = _report()
    rep.error = "PathError: boom"
    assert not rep.passed


def test_report_files_are_deterministic(tmp_path):
    a = _report().write(tmp_path / "a", svg=True)
    b = _report().write(tmp_path / "b", svg=True)
    assert [p.name for p in a] == ["demo_stable15_seed7.json", "demo_stable15_seed7.csv",
                                   "demo_stable15_seed7.svg"]
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
    assert a[1].read_text().splitlines() == ["t,median", "0.5,1.0", "0.25,2.0"]


def test_svg_is_well_formed():
    import xml.etree.ElementTree as ET
    root = ET.fromstring(render_svg([{"x": 1.0, "y": 2.0}, {"x": 1000.0, "y": 3.0}], "t"))
    assert root.tag.endswith("svg")
    assert root.find("{http://www.w3.org/2000/svg}polyline") is not None
