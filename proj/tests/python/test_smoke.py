import math

import numpy as np
import pytest

import convisc

SMALL = "n_nodes = 51\nn_k = 5\nmax_iters = 2000\ngrad_tol = 1e-7\nthreads = 1\n"


def test_reference_lists_keys():
    ref = convisc.config_reference()
    for key in ("n_nodes", "epsilon", "boundary_mode", "verify_modes"):
        assert key in ref


def test_unknown_key_names_the_key():
    with pytest.raises(convisc.ConfigError, match="bogus"):
        convisc.forward("bogus = 1\n")
    with pytest.raises(ValueError):
        convisc.forward("n_nodes = 2\n")


def test_flat_forward_data():
    out = convisc.forward(SMALL + "profile = flat\n")
    assert out["z"].shape == (51,)
    np.testing.assert_allclose(out["g"], -0.5, rtol=1e-13)
    np.testing.assert_allclose(out["sigma"], 1.0)


def test_solve_forward_matches_forward_data():
    data = convisc.forward(SMALL)
    k = data["k"][2]
    sol = convisc.solve_forward(data["sigma"], 1.0, k)
    assert sol["g"] == pytest.approx(data["g"][2], rel=1e-14)
    assert np.all(sol["w"] > 0)


def test_functional_and_gradient():
    z = np.linspace(0.0, 1.0, 101)
    q = z.copy()
    r = np.zeros_like(z)
    trap = np.full_like(z, z[1])
    trap[[0, -1]] *= 0.5
    expected = 2 * 4.5**2 * np.sum(trap * np.exp(-2 * z))
    assert convisc.functional_value(q, r, 1.0, 4.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-10)
    gq, gr = convisc.functional_gradient(q, r, 1.0, 4.0, 1.0, 1.0)
    assert gq.shape == z.shape and gr.shape == z.shape
    assert gq[0] == 0.0 and gr[0] == 0.0


def test_invert_small_problem():
    out = convisc.invert(SMALL)
    assert out["sigma_comp"].shape == (51,)
    assert len(out["iterations"]) == 5
    assert math.isfinite(out["sigma_rel_l2"])
    again = convisc.invert(SMALL)
    np.testing.assert_array_equal(out["sigma_comp"], again["sigma_comp"])


def test_verify_small():
    cfg = SMALL + (
        "verify_samples = 10\nverify_lambdas = 8\ncarleman_lambdas = 2\n"
        "gradient_points = 2\ngradient_directions = 2\nverify_modes = 16\n"
    )
    out = convisc.verify(cfg)
    assert out["max_gradient_error"] < 1e-5
    assert out["convexity"][0]["samples"] == 10
    assert out["carleman"][0]["c0"] > 0
