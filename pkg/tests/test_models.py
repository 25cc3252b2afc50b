import json

import numpy as np
import pytest

from duhem import boucwen, dahl, exp_example
from duhem.models import BUILTIN_MODELS, model_from_config, model_from_json


def test_dahl_r1_branches_are_affine(dahl_r1):
    sig = np.linspace(-0.7, 0.7, 11)
    assert np.allclose(dahl_r1.f1(sig, 0.0), 1.5 * (1.0 - sig / 0.75))
    assert np.allclose(dahl_r1.f2(sig, 0.0), 1.5 * (1.0 + sig / 0.75))


def test_dahl_domain_is_open_band(dahl_r1):
    assert dahl_r1.domain.bounded
    assert bool(dahl_r1.domain.contains(0.7499))
    assert not bool(dahl_r1.domain.contains(0.75))
    assert not bool(dahl_r1.domain.contains(-0.75))


def test_dahl_general_exponent_matches_power_law():
    m = dahl(rho=1.5, fc=0.75, r=3.0)
    s = 0.3
    assert m.f1(s, 0.0) == pytest.approx(1.5 * (1.0 - s / 0.75) ** 3)
    assert m.f2(s, 0.0) == pytest.approx(1.5 * (1.0 + s / 0.75) ** 3)


def test_dahl_rejects_bad_parameters():
    with pytest.raises(ValueError):
        dahl(rho=0.0)
    with pytest.raises(ValueError):
        dahl(fc=-1.0)
    with pytest.raises(ValueError):
        dahl(r=0.5)


def test_boucwen_branch_values(bw):
    # alpha - beta*|s|^n -/+ zeta*s*|s|^(n-1) at s = 0.5, n = 3
    assert bw.f1(0.5, 0.0) == pytest.approx(1.0 - 0.125 - 0.125)
    assert bw.f2(0.5, 0.0) == pytest.approx(1.0 - 0.125 + 0.125)
    assert bw.f1(-0.5, 0.0) == pytest.approx(1.0 - 0.125 + 0.125)


def test_boucwen_fixed_point_annihilates_rising_branch(bw):
    s_star = 0.5 ** (1.0 / 3.0)
    assert bw.f1(s_star, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_boucwen_rejects_sublinear_exponent():
    with pytest.raises(ValueError):
        boucwen(n=0.5)


def test_exp_example_anhysteresis_is_exact(exp_model):
    # F(xi/1.2, xi) = 0 identically
    xi = np.linspace(-4.0, 4.0, 17)
    f_an = exp_model.f_an(xi)
    assert np.allclose(f_an, xi / 1.2)
    assert np.allclose(exp_model.F(f_an, xi), 0.0, atol=1e-14)


def test_exp_example_branch_symmetry(exp_model):
    s, x = 0.8, -0.4
    assert exp_model.f1(s, x) == pytest.approx(np.exp(0.5 * (-1.2 * s + x)) + 0.83)
    assert exp_model.f2(s, x) == pytest.approx(np.exp(0.5 * (1.2 * s - x)) + 0.83)


def test_F_is_half_branch_difference(dahl_r1):
    s = np.array([-0.3, 0.0, 0.45])
    expect = 0.5 * (dahl_r1.f1(s, 0.0) - dahl_r1.f2(s, 0.0))
    assert np.allclose(dahl_r1.F(s, 0.0), expect)


def test_builtin_catalog_names():
    assert set(BUILTIN_MODELS) == {"dahl", "boucwen", "exp_example"}


def test_model_from_config_roundtrip():
    m = model_from_config({"model": "dahl", "params": {"rho": 2.0, "fc": 1.0, "r": 2.0}})
    assert m.params["rho"] == 2.0
    assert m.name == "dahl"


def test_model_from_config_rejects_unknown_model():
    with pytest.raises(ValueError, match="unknown model"):
        model_from_config({"model": "preisach"})


def test_model_from_config_rejects_stray_keys():
    with pytest.raises(ValueError):
        model_from_config({"model": "dahl", "params": {}, "extra": 1})


def test_model_from_config_rejects_bad_params():
    with pytest.raises(ValueError):
        model_from_config({"model": "dahl", "params": {"mass": 3.0}})


def test_model_from_json():
    m = model_from_json(json.dumps({"model": "boucwen", "params": {"n": 2.0}}))
    assert m.params["n"] == 2.0
