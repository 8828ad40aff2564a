import math

import pytest

import stirlab


def test_geometry_roundtrip():
    s = stirlab.Space.torus(2, 10.0)
    assert stirlab.wrap([10.5, -0.5], s) == pytest.approx([0.5, 9.5])
    assert stirlab.distance([0.5, 0.0], [9.5, 0.0], s) == pytest.approx(1.0)
    cfg = stirlab.SimConfig()
    cfg.dt = -1.0
    with pytest.raises(stirlab.StirlabError):
        cfg.validate()


def test_contact_resolution():
    cfg = stirlab.SimConfig()
    cfg.space = stirlab.Space.euclidean(2)
    r = stirlab.resolve_contacts([0.0, 0.0], [0.97, 0.0], [5.0, 0.0], cfg)
    assert r.X == pytest.approx([1.0, 0.0])
    assert r.dLX == pytest.approx(0.03)


def test_run_path_is_deterministic():
    cfg = stirlab.SimConfig()
    cfg.space = stirlab.Space.torus(2, 10.0)
    cfg.dt = 1e-3
    cfg.t_end = 5.0
    cfg.seed = 11
    init = stirlab.SystemState.make(cfg.space, [5.0, 6.5], [4.0, 5.0], [6.0, 5.0])
    a = stirlab.run_path(cfg, init)
    b = stirlab.run_path(cfg, init)
    assert a.final_state.B == b.final_state.B
    la = a.ledger
    assert la.shape[1] == 2
    assert (la[1:, 1] >= la[:-1, 1]).all()
    assert cfg.to_dict()["dt"] == 1e-3


def test_oracles_and_stats():
    assert stirlab.kelvin_Linf_sq_exact(3) == pytest.approx(1.0 / 3.0)
    assert stirlab.lambda1(2, math.e) == pytest.approx(1.0)
    ks = stirlab.ks_exponential([0.1, 0.5, 1.2], 1.0)
    assert ks.statistic == pytest.approx(0.3012, abs=1e-3)
    est = stirlab.vector_local_time_2d(1.0, 2000, 0.05, 3)
    assert abs(est.value - math.exp(-1.0)) < 5 * est.std_error + 0.02


def test_quick_criterion():
    r = stirlab.run_criterion(1, quick=True)
    assert set(r) >= {"test_id", "statistic", "p_value", "pass", "n", "params"}
    assert r["pass"]
