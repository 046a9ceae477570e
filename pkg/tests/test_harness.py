import json

import numpy as np
import pytest
from pydantic import ValidationError

from lowmach.cli import main
from lowmach.eos import EosModel
from lowmach.fields import TorusGrid, divergence_norm, helmholtz_project
from lowmach.harness import ExperimentConfig, SweepReport, SweepRow, emit_report, load_config
from lowmach.harness.config import GaussianSpec, VelocitySpec, config_schema
from lowmach.harness.experiments import strictly_decreasing
from lowmach.harness.initdata import (AmplitudeError, acoustic_potential_gradient, illprepared_init,
                                      velocity_field, wellprepared_init)
from lowmach.harness.sweeps import fit_slope, mach_sweep_wellprepared
from lowmach.measures import EmpiricalMeasure, relative_energy

EOS = EosModel(1.0, 2.0, 1.0)
KINDS = ["taylor-green", "vortex-pair", "gaussian-vortex", "band-limited-random", "zero"]


def small_cfg(**kw):
    base = dict(grid={"cells": [16, 16]}, eps=[0.5, 0.25], T=0.02, n_outputs=2,
                v0={"kind": "taylor-green", "amplitude": 0.5})
    base.update(kw)
    return ExperimentConfig.model_validate(base)


def test_config_validation(tmp_path):
    with pytest.raises(ValidationError):
        small_cfg(eps=[0.1, 0.2])
    with pytest.raises(ValidationError):
        small_cfg(eps=[1.5])
    with pytest.raises(ValidationError):
        small_cfg(bogus=1)
    with pytest.raises(ValidationError):
        small_cfg(solver={"cfl": 0.4, "extra": True})
    with pytest.raises(ValidationError):
        small_cfg(subset={"lower": [0.0], "upper": [1.0]})
    with pytest.raises(ValidationError):
        small_cfg(deltas=[0.01, 0.02])
    cfg = small_cfg()
    assert cfg.output_times() == [0.01, 0.02]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.echo()))
    assert load_config(p) == cfg
    assert "properties" in config_schema()


@pytest.mark.parametrize("kind", KINDS)
def test_named_fields_are_solenoidal(kind):
    g = TorusGrid((64, 64))
    v = velocity_field(g, VelocitySpec(kind=kind, amplitude=0.7, seed=3))
    assert divergence_norm(g, v) <= 1e-10
    if kind != "zero":
        assert np.max(np.abs(v)) > 0.1


def test_wellprepared_init_has_zero_relative_energy():
    g = TorusGrid((32, 32))
    spec = VelocitySpec(kind="taylor-green")
    s = wellprepared_init(g, EOS, spec, 0.1)
    v = velocity_field(g, spec)
    np.testing.assert_array_equal(s.rho, 1.0)
    assert relative_energy(EmpiricalMeasure.dirac(s), 1.0, v, EOS) == 0.0


def test_illprepared_init():
    g = TorusGrid((32, 32), (4.0, 4.0))
    spec = VelocitySpec(kind="gaussian-vortex", amplitude=0.5, width=0.5)
    zero = GaussianSpec(amplitude=0.0)
    s, ac = illprepared_init(g, EOS, spec, zero, zero, 0.1)
    w = wellprepared_init(g, EOS, spec, 0.1)
    np.testing.assert_array_equal(s.rho, w.rho)
    np.testing.assert_allclose(s.mom, w.mom, atol=1e-15)
    assert np.all(ac.s == 0)
    s0 = GaussianSpec(amplitude=2.0, width=0.5)
    phi0 = GaussianSpec(amplitude=0.1, width=0.5)
    s, ac = illprepared_init(g, EOS, spec, s0, phi0, 0.1)
    assert np.min(s.rho) == pytest.approx(1.0, abs=1e-6) and np.max(s.rho) == pytest.approx(1.2, rel=1e-2)
    # the Helmholtz projection of the initial velocity recovers v0
    u0 = s.velocity
    np.testing.assert_allclose(helmholtz_project(g, u0), velocity_field(g, spec), atol=1e-12)
    np.testing.assert_allclose(u0 - helmholtz_project(g, u0), acoustic_potential_gradient(g, phi0), atol=1e-12)
    with pytest.raises(AmplitudeError):
        illprepared_init(g, EOS, spec, GaussianSpec(amplitude=-20.0, width=0.5), zero, 0.1)


def test_fit_slope_and_decreasing():
    eps = np.array([0.2, 0.1, 0.05])
    assert fit_slope(eps, 3 * eps ** 2) == pytest.approx(2.0)
    assert np.isnan(fit_slope(eps[:1], eps[:1]))
    assert strictly_decreasing([3, 2, 1]) and not strictly_decreasing([3, 3, 1])
    assert not strictly_decreasing([3, np.nan, 1])


def test_empty_report_is_header_only(tmp_path):
    paths = emit_report(SweepReport("well-prepared"), tmp_path, formats=("csv",))
    lines = paths["csv"].read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("eps,sup_rel_energy,kinetic_part")


def test_report_json_and_golden_csv(tmp_path):
    rows = [SweepRow(eps=e, sup_rel_energy=e ** 2, kinetic_part=0.25 * e ** 2, potential_part=0.75 * e ** 2,
                     ess_part=0.75 * e ** 2, res_part=0.0, defect_D=0.0, wall_time_s=1.5, steps=10)
            for e in (0.2, 0.1, 0.05)]
    rep = SweepReport("well-prepared", rows, slope=fit_slope([0.2, 0.1, 0.05], [r.sup_rel_energy for r in rows]))
    a = emit_report(rep, tmp_path / "a")
    b = emit_report(rep, tmp_path / "b")
    assert a["csv"].read_bytes() == b["csv"].read_bytes()
    assert a["json"].read_bytes() == b["json"].read_bytes()
    assert a["csv"].read_text().splitlines()[1] == "0.2,0.04000000000000001,0.010000000000000002,0.030000000000000006,0.030000000000000006,0.0,0.0,,10"
    doc = json.loads(a["json"].read_text())
    assert doc["fitted_slope"] == pytest.approx(2.0) and len(doc["rows"]) == 3
    assert "wall_time_s" not in json.dumps(doc["rows"]) or all(r["wall_time_s"] is None for r in doc["rows"])
    t = emit_report(rep, tmp_path / "t", wall_time=True)
    assert "timing" in t and t["csv"].read_text().splitlines()[1].endswith(",1.5,10")
    assert a["svg"].read_text().lstrip().startswith("<?xml")


def test_small_wellprepared_sweep_identities():
    rep = mach_sweep_wellprepared(small_cfg())
    assert [r.eps for r in rep.rows] == [0.5, 0.25]
    for r in rep.rows:
        assert r.error is None
        assert r.sup_rel_energy == pytest.approx(r.kinetic_part + r.potential_part, rel=1e-12)
        assert r.ess_part + r.res_part == pytest.approx(r.potential_part, rel=1e-12, abs=1e-300)
        assert r.defect_D >= 0 and r.steps > 0


def test_degenerate_sweep_gives_zeros():
    rep = mach_sweep_wellprepared(small_cfg(eps=[1.0], v0={"kind": "zero"}))
    r = rep.rows[0]
    assert (r.sup_rel_energy, r.kinetic_part, r.potential_part, r.defect_D) == (0.0, 0.0, 0.0, 0.0)


def write_cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(small_cfg(**kw).echo()))
    return p


def test_cli_exit_codes(tmp_path, capsys):
    # the potential part must stay below zero: an impossible threshold gives exit 1
    bad = write_cfg(tmp_path, thresholds={"potential_bound": -1.0})
    assert main(["sweep-wp", "--config", str(bad), "--out", str(tmp_path / "o1")]) == 1
    assert "FAIL potential_part_bounded" in capsys.readouterr().out
    assert main(["sweep-wp", "--config", str(tmp_path / "missing.json")]) == 2
    junk = tmp_path / "junk.json"
    junk.write_text(json.dumps({"grid": {"cells": [16, 16]}, "eps": [0.1, 0.2]}))
    assert main(["sweep-wp", "--config", str(junk)]) == 2
    assert main(["sweep-wp", "--config", str(bad), "--seed", "-1"]) == 2
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out)["title"] == "ExperimentConfig"


def test_cli_pass_and_determinism(tmp_path, capsys):
    cfg = write_cfg(tmp_path, eps=[0.5, 0.25, 0.125], T=0.05, n_outputs=2,
                    grid={"cells": [32, 32]}, v0={"kind": "taylor-green", "amplitude": 0.5})
    outs = []
    for name in ("a", "b"):
        code = main(["sweep-wp", "--config", str(cfg), "--out", str(tmp_path / name), "--seed", "5"])
        assert code == 0, capsys.readouterr().out
        outs.append((tmp_path / name / "sweep_wp.csv").read_bytes())
    assert outs[0] == outs[1]
