import numpy as np
import pytest

from punn.constructive import (ClampCounter, exact_reconstruct, fit_density_demo,
                               gamma_from_pmap, grid_points, phi_targets,
                               probability_map_grid)
from punn.errors import DomainError
from punn.gates import gate_eval
from punn.numeric import make_rng


def random_interior_map(rng, m, k):
    p = rng.uniform(0.05, 1.0, size=(m, k))
    return p / p.sum(axis=1, keepdims=True)


def test_gamma_examples():
    g = gamma_from_pmap(np.array([[0.2, 0.3, 0.5]]))
    assert np.allclose(g, [[0.2, 0.375]], atol=1e-15)
    g = gamma_from_pmap(np.array([[0.7, 0.3]]))
    assert np.allclose(g, [[0.7]], atol=0)
    g = gamma_from_pmap(np.full((1, 4), 0.25))
    assert np.allclose(g, [[0.25, 1 / 3, 0.5]], atol=1e-15)


def test_gamma_rejects_boundary():
    with pytest.raises(DomainError):
        gamma_from_pmap(np.array([[0.0, 1.0]]))


def test_exact_reconstruct_examples():
    h = exact_reconstruct(np.array([[0.2, 0.375]]))
    assert np.allclose(h, [[0.2, 0.3, 0.5]], atol=1e-15)
    h = exact_reconstruct(np.array([[0.9]]))
    assert np.allclose(h, [[0.9, 0.1]], atol=1e-15)


def test_round_trip_identity_random_maps():
    rng = make_rng(31)
    for k in (2, 3, 5):
        p = random_interior_map(rng, 2500, k)  # 50x50 grid
        h = exact_reconstruct(gamma_from_pmap(p))
        assert np.max(np.abs(h - p)) < 1e-12


def test_phi_targets_logit():
    assert phi_targets(np.array([[0.5]]))[0, 0] == 0.0
    g = 1.0 / (1.0 + np.exp(-2.0))
    assert phi_targets(np.array([[g]]))[0, 0] == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DomainError):
        phi_targets(np.array([[0.0]]))


def test_phi_monotone_and_inverse_pair():
    g = np.linspace(1e-6, 1.0 - 1e-6, 1000)
    phi = phi_targets(g[None, :])[0]
    assert np.all(np.diff(phi) > 0)
    back = 1.0 / (1.0 + np.exp(-phi))
    assert np.max(np.abs(back - g)) < 1e-12


def test_phi_clamp_counter():
    counter = ClampCounter()
    phi_targets(np.array([[1e-12, 0.5]]), clamp_counter=counter)
    assert counter.count == 1


def test_grid_points_layout():
    pts = grid_points([[0.0, 1.0], [0.0, 1.0]], (2, 2))
    assert pts.shape == (4, 2)
    assert np.allclose(pts, [[0, 0], [0, 1], [1, 0], [1, 1]])


def test_fit_constant_map_bias_only():
    pmap = probability_map_grid([[-1, 1], [-1, 1]], (10, 10),
                                lambda pts: np.tile([0.3, 0.7], (pts.shape[0], 1)))
    _, report = fit_density_demo(pmap, hidden=(), epochs=3000, lr=0.05, seed=0)
    assert report.sup_error < 1e-6


def test_fit_smooth_two_class_map():
    def target(pts):
        p1 = 1.0 / (1.0 + np.exp(-3.0 * pts[:, 0]))
        return np.stack([p1, 1.0 - p1], axis=1)

    pmap = probability_map_grid([[-1, 1], [-1, 1]], (40, 40), target)
    _, report = fit_density_demo(pmap, hidden=(16,), epochs=2000, lr=0.01, seed=0)
    assert report.sup_error < 0.02


def test_sup_norm_telescoping_bound():
    # fitted partition error is bounded by the summed per-gate activation errors
    rng = make_rng(33)

    def target(pts):
        p1 = 0.2 + 0.6 / (1.0 + np.exp(-2.0 * pts[:, 0]))
        p2 = 0.5 * (1.0 - p1)
        return np.stack([p1, p2, 1.0 - p1 - p2], axis=1)

    pmap = probability_map_grid([[-1, 1], [-1, 1]], (20, 20), target)
    model, report = fit_density_demo(pmap, hidden=(8,), epochs=800, lr=0.01, seed=1)
    gamma = gamma_from_pmap(pmap.values)
    gate_err_sum = 0.0
    for i, gate in enumerate(model.gates):
        g, _ = gate_eval(gate, pmap.points)
        gate_err_sum += float(np.max(np.abs(g - gamma[:, i])))
    assert report.sup_error <= gate_err_sum + 1e-12
