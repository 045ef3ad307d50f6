import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import finsler_flow as ff

SOURCE = Path(os.environ.get("FINSLER_SOURCE_DIR", Path(__file__).resolve().parents[2]))
EXE = os.environ.get("FINSLER_FLOW_EXE")


def test_euclidean_tensor_is_identity():
    g = ff.fundamental_tensor(ff.structure("euclidean"), [0.3, 1.0], [0.6, -0.8])
    assert g.shape == (2, 2)
    assert np.allclose(g, np.eye(2), atol=1e-15)


def test_randers_f_squared_along_b():
    # F(e1) = |e1| + b(e1) = 1.3
    S = ff.structure("randers", b1="0.3")
    g = ff.fundamental_tensor(S, [0.0, 0.0], [1.0, 0.0])
    assert abs(g[0, 0] - 1.69) <= 1e-12
    assert abs(S.f_squared([0.0, 0.0], [1.0, 0.0]) - 1.69) <= 1e-12


def test_convexity_violation_raises():
    with pytest.raises(ff.ConvexityViolated):
        ff.structure("randers", b1="1.5")
    with pytest.raises(ff.ConfigError):
        ff.structure("euclidean", colour="red")


def test_flat_ricci_and_sample_shape():
    E = ff.structure("euclidean")
    assert ff.ricci_scalar(E, [1.0, 2.0], [0.0, 1.0]) == 0.0
    phi = ff.sample(E, 8, 10, 12)
    assert phi.shape == (8, 10, 12)
    assert np.max(np.abs(phi - 1.0)) <= 1e-15
    with pytest.raises(ff.BadResolution):
        ff.sample(E, 8, 6, 8)


def test_flat_flow_is_stationary():
    r = ff.run_flow(ff.structure("euclidean"), 8, 8, 8, scheme="euler", duration=0.01)
    assert r["steps"] > 0
    assert np.max(np.abs(r["final_phi"] - 1.0)) <= 1e-14
    assert all(row["parabolicity_margin"] > 0 for row in r["diagnostics"])


def test_conformal_reference_golden_decay():
    # finsler-flow reference --u0 "cos 0.1 1 0 0" -T 0.05 --n1 64 --n2 8
    u = ff.conformal_reference("cos 0.1 1 0 0", 0.05, 64, 8)
    assert u.shape == (64, 8)
    assert abs(0.1 / np.max(np.abs(u)) - 1.0421232338088808) <= 1e-12
    assert math.exp(-0.05) < np.max(np.abs(u)) / 0.1 < 1.0


def test_run_scenario_report(tmp_path):
    rep = ff.run_scenario(SOURCE / "scenarios" / "flat.cfg", [], tmp_path)
    assert rep["schema"] == "finsler-flow-report/1"
    assert rep["summary"]["failed"] == 0
    assert rep["scenarios"][0]["status"] == "pass"


@pytest.mark.skipif(EXE is None, reason="FINSLER_FLOW_EXE not set")
def test_cli_run_writes_report(tmp_path):
    proc = subprocess.run([EXE, "run", str(SOURCE / "scenarios" / "flat.cfg"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    reports = list(tmp_path.rglob("report.json"))
    assert len(reports) == 1
    assert json.loads(reports[0].read_text())["summary"]["passed"] == 1
