import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wenonn.core import ConfigurationError, ContractError
from wenonn.nn import (ConstantLoss, FluxTape, NetworkParams, SquaredParams, TrainingError,
                       compensate_and_normalize, delta_features, gradient, init_network, load_checkpoint,
                       mlp_forward, save_checkpoint, zero_network)
from wenonn.weno import WeightTriple, reconstruct, scheme


def test_delta_feature_examples():
    assert np.array_equal(delta_features([1, 1, 1, 1, 1]), [0, 0, 0, 0])
    assert np.array_equal(delta_features([0, 0, 0, 1, 1]), [0, 0, 1, 0])
    assert np.array_equal(delta_features([0, 2, 4, 6, 8]), [1, 1, 1, 1])


@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=5))
def test_delta_features_in_unit_interval(s):
    d = delta_features(s)
    assert np.all((d >= 0) & (d <= 1))


@pytest.mark.parametrize("lam", [1e-6, 1e6])
def test_delta_features_scale_invariant(lam, rng):
    S = rng.normal(size=(50, 5))
    assert np.allclose(delta_features(lam * S), delta_features(S), rtol=1e-12)


def test_mlp_examples():
    z = zero_network()
    assert np.array_equal(mlp_forward(z, np.ones(4)), np.zeros(3))
    p = NetworkParams((np.zeros((3, 4)),), (np.array([0.1, -0.2, 0.3]),))
    assert np.array_equal(mlp_forward(p, np.array([5.0, 1, 2, 3])), [0.1, -0.2, 0.3])
    p = NetworkParams((np.ones((1, 4)), np.array([[2.0], [0.0], [0.0]])),
                      (np.array([-0.5]), np.zeros(3)))
    assert np.allclose(mlp_forward(p, np.array([0.0, 0, 1, 0])), [1, 0, 0])


def test_shape_mismatch_rejected_at_construction():
    with pytest.raises(ContractError):
        NetworkParams((np.zeros((3, 4)), np.zeros((3, 5))), (np.zeros(3), np.zeros(3)))
    with pytest.raises(ContractError):
        NetworkParams((np.zeros((3, 4)),), (np.zeros(2),))
    with pytest.raises(ContractError):
        NetworkParams((np.full((3, 4), np.nan),), (np.zeros(3),))


def test_params_are_immutable():
    p = init_network(seed=0)
    with pytest.raises(ValueError):
        p.weights[0][0, 0] = 1.0


def test_compensation_examples():
    ws = (0.1, 0.6, 0.3)
    assert compensate_and_normalize(ws, (0, 0, 0)) == WeightTriple(0.1, 0.6, 0.3)
    assert compensate_and_normalize(ws, (-0.2, 0, 0)) == pytest.approx((0, 2 / 3, 1 / 3))
    assert compensate_and_normalize(ws, (-1, -1, -1)) == WeightTriple(0.1, 0.6, 0.3)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda w: sum(w) > 1e-3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_compensation_is_convex(w, y):
    w = np.array(w) / sum(w)
    out = compensate_and_normalize(w, y)
    assert min(out) >= 0 and sum(out) == pytest.approx(1.0, abs=1e-12)


def test_init_is_glorot_and_reproducible():
    a, b = init_network(seed=7), init_network(seed=7)
    assert np.array_equal(a.flatten(), b.flatten())
    assert a.layer_sizes == (4, 30, 30, 30, 3)
    lim = np.sqrt(6 / (30 + 30))
    assert np.abs(a.weights[1]).max() <= lim
    assert all(np.all(x == 0) for x in a.biases)
    assert a.n_params == 4 * 30 + 30 + 2 * (30 * 30 + 30) + 30 * 3 + 3


def test_flatten_roundtrip():
    p = init_network((4, 8, 3), seed=2)
    q = NetworkParams.from_flat(p.layer_sizes, p.flatten())
    assert np.array_equal(p.flatten(), q.flatten()) and p.theta_id == q.theta_id


def test_trivial_gradients():
    p = init_network((4, 8, 3), seed=1)
    g = gradient(p, SquaredParams())
    assert np.array_equal(g.flatten(), 2 * p.flatten())
    assert np.all(gradient(p, ConstantLoss(3.0)).flatten() == 0)

    class Bad:
        def value_and_grad(self, params):
            return float("nan"), params

    with pytest.raises(TrainingError):
        gradient(p, Bad())


def test_tape_forward_matches_inference(rng):
    p = init_network((4, 8, 3), seed=4)
    S = rng.normal(size=(7, 11, 5))
    for base in ("weno5-js", "weno5-z"):
        tape = FluxTape(p, S, scheme(base))
        ref = reconstruct(S, scheme(base + "-nn", network=p))
        assert tape.fhat.shape == (7, 11)
        assert np.allclose(tape.fhat, ref, rtol=1e-13, atol=1e-14)


def test_tape_gradient_matches_finite_differences(rng):
    sizes = (4, 8, 3)
    p = init_network(sizes, seed=5)
    S = rng.normal(size=(300, 5))
    S[:100, 3:] += 4.0
    cot = rng.normal(size=300)
    base = scheme("weno5-z")

    def value(vec):
        return float(cot @ FluxTape(NetworkParams.from_flat(sizes, vec), S, base).fhat)

    g = FluxTape(p, S, base).backward(cot).flatten()
    theta = p.flatten()
    for k in rng.choice(theta.size, 40, replace=False):
        h = 1e-6 * max(1.0, abs(theta[k]))
        tp, tm = theta.copy(), theta.copy()
        tp[k] += h
        tm[k] -= h
        fd = (value(tp) - value(tm)) / (2 * h)
        assert fd == pytest.approx(g[k], rel=1e-4, abs=1e-8)


def test_checkpoint_roundtrip(tmp_path):
    p = init_network(seed=11)
    path = tmp_path / "ck.json"
    save_checkpoint(path, p, "Z", 1e-30, "abc")
    ck = load_checkpoint(path)
    assert np.array_equal(ck.params.flatten(), p.flatten())
    assert ck.base_scheme == "Z" and ck.eps1 == 1e-30 and ck.training_config_digest == "abc"
    doc = json.loads(path.read_text())
    assert set(doc) >= {"schema_version", "base_scheme", "layer_sizes", "weights", "biases", "eps1",
                        "training_config_digest"}
    assert ck.scheme().kind.value == "weno5-z-nn"


def test_checkpoint_rejects_tampering(tmp_path):
    path = tmp_path / "ck.json"
    save_checkpoint(path, init_network(seed=1), "JS")
    doc = json.loads(path.read_text())
    doc["weights"][0][0][0] += 1.0
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigurationError):
        load_checkpoint(path)
    with pytest.raises(ConfigurationError):
        save_checkpoint(path, init_network(seed=1), "linear")
    with pytest.raises(ConfigurationError):
        load_checkpoint(tmp_path / "missing.json")
