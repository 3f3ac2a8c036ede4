import numpy as np
import pytest
from functools import reduce

from _helpers import random_vector
from subspace_selftest.bell import i5, i_tor, stabilizer_image
from subspace_selftest.bounds import ideal_observables, random_observables
from subspace_selftest.geometry import (
    CorrelationPoint,
    behaviour_of,
    correlator_keys,
    correlators_matrix_free,
    face_dimension,
    loop_expectations,
    subfamily_point,
    toric_subfamily,
)
from subspace_selftest.stabilizer import code_basis, five_qubit_code, five_qubit_labeler
from subspace_selftest.toric import toric_code, toric_labelers

C5 = code_basis(five_qubit_code(), [five_qubit_labeler()])
T2 = code_basis(toric_code(2), toric_labelers(2))


def dense_correlator(state, obs, sup):
    chosen = dict(sup)
    n = obs.n_parties
    M = reduce(np.kron, [obs[p, chosen[p]] if p in chosen else np.eye(2) for p in range(n)])
    return np.vdot(state, M @ state).real


def c5_points():
    obs = ideal_observables(5)
    return [behaviour_of(C5[i], obs) for i in range(2)]


def test_keys_count():
    assert len(correlator_keys(3)) == 26
    assert len(set(correlator_keys(4))) == 80


def test_c5_labeler_values():
    s5 = stabilizer_image(five_qubit_labeler(), 0)
    assert [p.evaluate(s5) for p in c5_points()] == pytest.approx([-1.0, 1.0], abs=1e-12)


def test_product_state_x_correlators_vanish():
    n = 4
    v = np.zeros(16)
    v[0] = 1
    p = behaviour_of(v, ideal_observables(n)).as_dict()
    for sup, val in p.items():
        if any(q >= 1 and x == 0 for q, x in sup):
            assert abs(val) < 1e-15


def test_random_state_against_dense(rng):
    obs = random_observables(4, rng)
    v = random_vector(rng, 16)
    p = behaviour_of(v, obs)
    for k in rng.choice(len(p.keys), size=10, replace=False):
        assert p.values[k] == pytest.approx(dense_correlator(v, obs, p.keys[k]), abs=1e-10)


def test_mixed_state_is_average(rng):
    obs = ideal_observables(3)
    a, b = random_vector(rng, 8), random_vector(rng, 8)
    rho = 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj())
    mix = behaviour_of(rho, obs).values
    assert np.allclose(mix, 0.3 * behaviour_of(a, obs).values + 0.7 * behaviour_of(b, obs).values, atol=1e-12)


def test_matrix_free_matches_full(rng):
    v = random_vector(rng, 32)
    full = behaviour_of(v, ideal_observables(5))
    idx = rng.choice(len(full.keys), size=15, replace=False)
    mf = correlators_matrix_free(v, [full.keys[i] for i in idx], 0)
    assert np.allclose(mf, full.values[idx], atol=1e-12)


def test_dimension_checks():
    with pytest.raises(ValueError):
        behaviour_of(np.ones(8) / np.sqrt(8), ideal_observables(2))
    with pytest.raises(ValueError):
        CorrelationPoint(1, [((0, 0),)], np.array([1.5]))


def test_face_c5_and_basics():
    pts = c5_points()
    rep = face_dimension(pts)
    assert rep.dimension == 1
    assert face_dimension(pts[::-1]).dimension == 1
    assert face_dimension([pts[0], pts[0]]).dimension == 0
    assert face_dimension([pts[0]]).dimension == 0
    for p in pts:
        assert p.evaluate(i5()) == pytest.approx(4 * np.sqrt(2) + 1, abs=1e-9)


def test_convex_mixtures_attain_quantum_value(rng):
    pts = c5_points()
    e = i5()
    for _ in range(20):
        w = rng.uniform()
        mix = CorrelationPoint(5, pts[0].keys, w * pts[0].values + (1 - w) * pts[1].values)
        assert mix.evaluate(e) == pytest.approx(4 * np.sqrt(2) + 1, abs=1e-9)


def test_toric_face_and_loops():
    obs = ideal_observables(8)
    pts = [behaviour_of(T2[i], obs) for i in range(4)]
    rep = face_dimension(pts)
    assert rep.dimension >= 2
    assert face_dimension([pts[k] for k in (2, 0, 3, 1)]).dimension == rep.dimension
    e = i_tor(2)
    for p, (a, b) in zip(pts, T2.labels):
        assert p.evaluate(e) == pytest.approx(8, abs=1e-9)
        loops = loop_expectations(p, 2)
        assert loops["hor0"] == pytest.approx(a) and loops["vert0"] == pytest.approx(b)
    ref = pts[0].as_dict()
    for p in pts[1:]:
        d = p.as_dict()
        assert all(abs(d[s] - ref[s]) < 1e-10 for s in e.supports())
    assert loop_expectations(pts[3], 2) == pytest.approx({"hor0": 1, "hor1": 1, "vert0": 1, "vert1": 1})


def test_toric_subfamily_lower_bound():
    e = i_tor(2)
    keys = toric_subfamily(e, 2)
    pts = [subfamily_point(T2[i], keys, 0) for i in range(4)]
    rep = face_dimension(pts)
    assert rep.lower_bound_only
    full = face_dimension([behaviour_of(T2[i], ideal_observables(8)) for i in range(4)])
    assert 2 <= rep.dimension <= full.dimension
