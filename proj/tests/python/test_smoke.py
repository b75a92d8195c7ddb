import json
import math
from pathlib import Path

import pytest

import cocycle_lab

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_module_metadata():
    assert cocycle_lab.__version__
    assert "cocycle" in cocycle_lab._core.__doc__.lower()


def test_catalog():
    names = {e["name"] for e in cocycle_lab.list_experiments()}
    assert len(names) == 10
    assert {"quantization", "kam-local", "cohomology-bench"} <= names


def test_golden_continued_fraction():
    cf = cocycle_lab.continued_fraction("golden", 15)
    assert cf["a"] == [1] * 15
    assert cf["q"][:6] == [1, 2, 3, 5, 8, 13]


def test_geodesic_energy():
    assert cocycle_lab.geodesic_energy("SU2", [2.0], "golden", 2000) == pytest.approx(4 * math.pi, abs=1e-8)


def test_run_writes_outputs(tmp_path):
    r = cocycle_lab.run(str(CONFIGS / "resonance_demo.cfg"), out=str(tmp_path))
    assert r["verdict"] == "pass"
    assert r["exit_code"] == 0
    summary = json.loads(Path(r["summary"]).read_text())
    assert summary["experiment"] == "resonance-demo"
    assert r["metrics"]["residual"] <= 1e-12


def test_config_error(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment = apriori\n[apriori]\nunknown = 1\n")
    with pytest.raises(cocycle_lab.ConfigError):
        cocycle_lab.run(str(bad), out=str(tmp_path))
