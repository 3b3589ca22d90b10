import numpy as np
import pytest

from punn.gates import (ACTIVATIONS, PARAMETERIZATIONS, GateSpec, activation_eval,
                        ellipsoid_gate, fourier_radius, fourier_shell_gate,
                        gate_eval, gate_grad, gate_param_count, harmonic_coeff_count,
                        harmonic_radius, harmonic_shell_gate, mlp_gate, radial_gate,
                        random_gate, shell_gate)
from punn.numeric import finite_diff_grad, make_rng, max_rel_err


def test_activation_values():
    assert activation_eval("sigmoid", 0.0)[0] == pytest.approx(0.5)
    assert activation_eval("gaussian", 0.0)[0] == pytest.approx(1.0)
    assert activation_eval("bump", 0.0)[0] == pytest.approx(np.exp(-1.0))
    v, dv = activation_eval("bump", 1.0)
    assert v == 0.0 and dv == 0.0
    v, dv = activation_eval("bump", -2.5)
    assert v == 0.0 and dv == 0.0


def test_activation_range():
    rng = make_rng(0)
    t = rng.normal(scale=3.0, size=1000)
    for kind in ACTIVATIONS:
        v, _ = activation_eval(kind, t)
        assert np.all(v >= 0.0) and np.all(v <= 1.0)


def test_radial_sigmoid_at_center():
    gate = radial_gate([0.0, 0.0], radius=1.0, sharpness=1.0)
    v, _ = gate_eval(gate, np.zeros((1, 2)))
    assert v[0] == pytest.approx(1.0 / (1.0 + np.exp(-1.0)), abs=1e-9)


def test_shell_bump_midpoint_is_max():
    gate = shell_gate([0.0, 0.0], r1=0.5, r2=1.5, sharpness=1.0, activation="bump")
    v_mid, _ = gate_eval(gate, np.array([[1.0, 0.0]]))
    assert v_mid[0] == pytest.approx(np.exp(-1.0), abs=1e-6)
    for other in ([0.7, 0.0], [1.3, 0.0], [0.0, 1.2]):
        v, _ = gate_eval(gate, np.array([other]))
        assert v[0] < v_mid[0]


def test_ellipsoid_sigmoid_at_center():
    gate = ellipsoid_gate([0.0, 0.0], axes=[1.0, 1.0], sharpness=1.0, bias=0.0)
    v, _ = gate_eval(gate, np.zeros((1, 2)))
    assert v[0] == pytest.approx(1.0 / (1.0 + np.exp(-1.0)), abs=1e-9)


def test_fourier_radius_values():
    coeffs = np.array([1.0, 0.5, 0.0])
    assert fourier_radius(coeffs, 0.0) == pytest.approx(1.5)
    assert fourier_radius(coeffs, np.pi) == pytest.approx(0.5)


def test_harmonic_radius_constant():
    rng = make_rng(3)
    for _ in range(5):
        n = rng.normal(size=4)
        n /= np.linalg.norm(n)
        assert harmonic_radius(np.array([0.8]), 0, n[None, :])[0] == pytest.approx(0.8)


def test_radius_clamped_at_floor():
    assert fourier_radius(np.array([-5.0]), 0.3) == pytest.approx(1e-3)
    assert harmonic_radius(np.array([-2.0]), 0, np.array([[1.0, 0.0]]))[0] == pytest.approx(1e-3)


def test_gate_zero_upstream_zero_grad():
    rng = make_rng(1)
    for kind in PARAMETERIZATIONS:
        d = 2
        spec = random_gate(kind, d, rng)
        x = rng.normal(size=(3, d))
        _, cache = gate_eval(spec, x)
        g = gate_grad(spec, x, cache, np.zeros(3))
        assert np.all(g == 0.0), kind


@pytest.mark.parametrize("kind", PARAMETERIZATIONS)
def test_gate_gradients_vs_finite_difference(kind):
    rng = make_rng(11)
    for trial in range(20):
        d = 2 if kind == "fourier_shell" else int(rng.integers(2, 5))
        spec = random_gate(kind, d, rng)
        x = rng.normal(size=(4, d))
        up = rng.normal(size=4)
        _, cache = gate_eval(spec, x)
        grad = gate_grad(spec, x, cache, up)

        def f(p, spec=spec, x=x, up=up):
            s2 = spec.copy()
            s2.params = p
            v, _ = gate_eval(s2, x)
            return float(up @ v)

        fd = finite_diff_grad(f, spec.params.copy(), 1e-5)
        assert max_rel_err(grad, fd) < 1e-4, (kind, trial)


def test_gate_range_all_families():
    rng = make_rng(5)
    for kind in PARAMETERIZATIONS:
        for _ in range(20):
            d = 2 if kind == "fourier_shell" else int(rng.integers(2, 6))
            spec = random_gate(kind, d, rng)
            v, _ = gate_eval(spec, rng.normal(scale=2.0, size=(20, d)))
            assert np.all(v >= 0.0) and np.all(v <= 1.0), kind


def test_bump_shell_compact_support():
    # with sharpness >= 1 the bump shell is exactly 0 outside the closed shell
    rng = make_rng(9)
    for _ in range(20):
        c = rng.normal(size=3)
        r1 = rng.uniform(0.2, 0.8)
        r2 = r1 + rng.uniform(0.3, 1.0)
        gate = shell_gate(c, r1, r2, sharpness=rng.uniform(1.0, 3.0),
                          activation="bump")
        dirs = rng.normal(size=(30, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii_out = np.concatenate([rng.uniform(0.0, r1, 15),
                                    r2 + rng.uniform(0.0, 2.0, 15)])
        x = c + radii_out[:, None] * dirs
        v, _ = gate_eval(gate, x)
        assert np.all(v == 0.0)
        # and strictly positive at the midpoint radius
        mid = c + 0.5 * (r1 + r2) * dirs[0]
        assert gate_eval(gate, mid[None, :])[0][0] > 0.0


def test_radial_rotational_symmetry():
    rng = make_rng(13)
    for _ in range(20):
        d = int(rng.integers(2, 5))
        c = rng.normal(size=d)
        gate = radial_gate(c, rng.uniform(0.3, 2.0), rng.uniform(0.5, 3.0),
                           activation="sigmoid")
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        x = rng.normal(size=d)
        v1, _ = gate_eval(gate, (c + x)[None, :])
        v2, _ = gate_eval(gate, (c + q @ x)[None, :])
        assert abs(v1[0] - v2[0]) < 1e-12


def test_gate_at_shell_center_is_finite():
    for gate in (shell_gate([0.5, -0.2], 0.3, 1.0),
                 harmonic_shell_gate([0.5, -0.2], 1, radius=1.0),
                 fourier_shell_gate([0.5, -0.2], 0.1, [1.0, 0.1, 0.0])):
        v, cache = gate_eval(gate, np.array([[0.5, -0.2]]))
        assert np.isfinite(v[0])
        g = gate_grad(gate, np.array([[0.5, -0.2]]), cache, np.ones(1))
        assert np.all(np.isfinite(g))


@pytest.mark.parametrize("degree,per_gate", [(0, 6), (1, 10), (2, 20)])
def test_harmonic_param_counts_iris(degree, per_gate):
    gate = harmonic_shell_gate(np.zeros(4), degree)
    assert gate_param_count(gate) == per_gate
    assert 2 * gate_param_count(gate) == {0: 12, 1: 20, 2: 40}[degree]


def test_shape_gate_param_counts():
    assert gate_param_count(radial_gate([0.0, 0.0], 1.0, 1.0)) == 4
    assert gate_param_count(shell_gate([0.0, 0.0], 0.3, 1.0)) == 5
    assert gate_param_count(ellipsoid_gate(np.zeros(4), np.ones(4))) == 10
    coeffs = np.zeros(11)  # K = 5 terms
    coeffs[0] = 1.0
    k5 = fourier_shell_gate([0.0, 0.0], 0.1, coeffs)
    assert gate_param_count(k5) == 2 + 1 + 1 + 11  # center, r1, sharpness, coeffs


def test_mlp_gate_counts():
    assert gate_param_count(mlp_gate(2, [32, 32], "sigmoid")) == 1185
    assert gate_param_count(mlp_gate(2, [32, 32], "gaussian")) == 1185
    # bump gates carry one extra trainable pre-tanh scale
    assert gate_param_count(mlp_gate(2, [32, 32], "bump_tanh")) == 1186
    assert 9 * gate_param_count(mlp_gate(784, [256, 256], "bump_tanh")) == 2_403_090


def test_harmonic_coeff_count_formula():
    for d in (2, 3, 4, 8):
        assert harmonic_coeff_count(d, 2) == 1 + d + d * (d + 1) // 2
