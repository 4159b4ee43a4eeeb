import math
from pathlib import Path

import numpy as np
import pytest

import pssframe


def square(lo, hi, n):
    h = (hi - lo) / (n - 1)
    return [lo, lo], [h, h], [n, n]


def test_kink_angle_and_rotation_agree():
    o, s, c = square(-8.0, 8.0, 81)
    a = pssframe.sine_gordon(o, s, c)
    b = pssframe.sine_gordon(o, s, c, L0=np.eye(2))
    assert a["phi"].shape == (81, 81)
    assert b["rotation"].shape == (81, 81, 2, 2)
    assert a["closed_residual"] < 1e-2
    assert b["orth_residual"] < 1e-12
    assert np.max(np.abs(b["rotation"][..., 0, 0] - np.cos(a["phi"]))) < 1e-10


def test_kink_closedness_converges():
    r = [pssframe.sine_gordon(*square(-8.0, 8.0, n))["closed_residual"] for n in (41, 81)]
    assert math.log2(r[0] / r[1]) > 1.7


def test_igsge_flux_and_orthogonality():
    th = 0.7
    l0 = np.array([[1, 0, 0], [0, math.cos(th), -math.sin(th)], [0, math.sin(th), math.cos(th)]])
    l0 = l0 @ np.array([[math.cos(th), -math.sin(th), 0], [math.sin(th), math.cos(th), 0], [0, 0, 1]])
    d = pssframe.igsge([0.5, -4.0, -4.0], [0.5, 0.5, 0.5], [12, 17, 17], [0.6, 0.8], L0=l0)
    assert d["orth_residual"] < 1e-12
    assert d["model_residual"] < 5e-2
    assert len(d["theta1"]) == 3
    assert len(d["conservation"]["quantities"]) == 2


def test_ch_hierarchy_conserves():
    n, period = 64, 20.0
    x = np.arange(n) * period / n
    u0 = 0.2 + 0.1 * np.cos(2 * np.pi * x / period)
    d = pssframe.ch_hierarchy(u0, period, 0.5, 1.0, 100, order=1)
    assert d["u"].shape == (n + 1, 101)
    assert len(d["phi"]) == 2
    for rep in d["conservation"]:
        assert rep["max_relative_drift"] < 1e-4
    mass = d["u"][:-1, :].sum(axis=0) * period / n
    assert np.max(np.abs(mass - mass[0])) < 1e-8 * abs(mass[0])


def test_conservation_of_exact_form():
    # theta = t dx + x dt = d(xt) is closed; Q(t) = t * L grows by the boundary flux
    xs, ts = np.linspace(0, 1, 21), np.linspace(0, 1, 11)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    r = pssframe.conservation([T, X], [0.0, 0.0], [0.05, 0.1], time_axis=1)
    assert r["max_flux_residual"] < 1e-12
    assert r["quantities"][0]["boundary_flux"] == pytest.approx(1.0)


def test_sine_residual_blocked_by_gate():
    x = np.linspace(0, 2 * np.pi, 129)
    t = np.linspace(0, 1, 21)
    u = np.repeat(np.sin(x)[:, None], len(t), axis=1)
    assert pssframe.ch_residual(u, [0.0, 0.0], [x[1], t[1]], 1.0) >= 0.5
    with pytest.raises(pssframe.GateError):
        pssframe.ch_frame(u, [0.0, 0.0], [x[1], t[1]], 1.0)


def test_run_cli(tmp_path: Path):
    cfg = tmp_path / "h.ini"
    cfg.write_text("[model]\nkind = horocyclic\n[solver]\nbase = 0, 0\nspecial_coordinates = true\n")
    code, out, err = pssframe.run("solve-frame", cfg, tmp_path / "out")
    assert code == 0, err
    assert "solve:" in out
    assert (tmp_path / "out" / "manifest.json").exists()
    code, _, err = pssframe.run("verify", tmp_path / "missing.ini")
    assert code != 0
