"""Acceptance criteria 1-11; each test prints one PASS/FAIL line."""
import math
import time
import warnings

import numpy as np
from scipy.stats import unitary_group

from _helpers import conjugated_setup, random_density, random_isometry, random_vector, unit
from conftest import record
from subspace_selftest.bell import SQRT2, i5, i_tor, stabilizer_image, toric_classical_formula
from subspace_selftest.bounds import (
    I5_QUANTUM,
    bell_operator,
    classical_bound,
    i5_sos_weights,
    ideal_observables,
    lambda_max,
    quantum_value_ideal,
    random_observables,
    sos_residual,
    toric_sos_weights,
)
from subspace_selftest.geometry import behaviour_of, face_dimension
from subspace_selftest.pauli import anticommute_on
from subspace_selftest.robustness import AngleConfig, g, k_operator, sweep_curve
from subspace_selftest.selftest import (
    apply_local,
    decompose_onto_code,
    extract_qubit_frame,
    frame_state,
    local_operators,
    max_fidelity_over_subspace,
    split_qubits,
    stabilization_residual,
)
from subspace_selftest.stabilizer import (
    bipartition_masks,
    code_basis,
    code_projector,
    five_qubit_code,
    five_qubit_labeler,
    gme_certificate_exhaustive,
    verify_certificate,
)
from subspace_selftest.toric import toric_code, toric_generators, toric_gme_witness, toric_labelers

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_criterion_01_classical_i5():
    t = time.perf_counter()
    r = classical_bound(i5())
    dt = time.perf_counter() - t
    ok = abs(r.value - 5) <= 1e-12 and r.diagnostics["n_strategies"] == 1024 and dt < 1.0
    record(1, ok, f"beta_c(I5) = {r.value!r} over {r.diagnostics['n_strategies']} strategies in {dt:.3f} s")
    assert ok


def test_criterion_02_quantum_i5():
    r = quantum_value_ideal(i5())
    B = bell_operator(i5(), ideal_observables(5))
    basis = code_basis(five_qubit_code(), [five_qubit_labeler()]).states
    devs = [abs(np.vdot(basis[:, k], B @ basis[:, k]).real - r.value) for k in range(2)]
    ok = r.method == "dense_eig" and abs(r.value - (4 * SQRT2 + 1)) <= 1e-9 and max(devs) <= 1e-10
    record(2, ok, f"beta_q(I5) = {r.value:.15g} (|diff| {abs(r.value - I5_QUANTUM):.1e}); codewords within {max(devs):.1e}")
    assert ok


def test_criterion_03_sos_i5():
    rng = np.random.default_rng(3)
    e = i5()
    res = [sos_residual(e, ideal_observables(5), i5_sos_weights(), I5_QUANTUM)]
    lmax = []
    for _ in range(100):
        obs = random_observables(5, rng)
        res.append(sos_residual(e, obs, i5_sos_weights(), I5_QUANTUM))
        lmax.append(lambda_max(e, obs))
    ok = max(res) <= 1e-9 and max(lmax) <= I5_QUANTUM + 1e-8
    record(3, ok, f"max SOS residual {max(res):.1e} over ideal + 100 random; max lambda_max - beta_q = {max(lmax) - I5_QUANTUM:.2e}")
    assert ok


def test_criterion_04_toric_l2():
    t = time.perf_counter()
    e = i_tor(2)
    cb = classical_bound(e)
    qv = quantum_value_ideal(e)
    sos = sos_residual(e, ideal_observables(8), toric_sos_weights(2), 8.0)
    dt = time.perf_counter() - t
    ok = (
        abs(cb.value - (4 + 2 * SQRT2)) <= 1e-9
        and abs(cb.value - toric_classical_formula(8)) <= 1e-9
        and cb.diagnostics["n_strategies"] == 65536
        and qv.method == "dense_eig"
        and abs(qv.value - 8) <= 1e-9
        and sos <= 1e-9
        and dt < 30
    )
    record(4, ok, f"toric L=2: beta_c = {cb.value:.12g}, beta_q = {qv.value:.12g}, SOS {sos:.1e}, {dt:.2f} s")
    assert ok


def test_criterion_05_toric_l3_iterative():
    # stretch goal: a miss is reported as a warning, not a failure
    t = time.perf_counter()
    try:
        qv = quantum_value_ideal(i_tor(3))
        dt = time.perf_counter() - t
        ok = qv.method == "iterative_eig" and abs(qv.value - 18) <= 1e-6 and dt <= 600
        detail = f"toric L=3: beta_q = {qv.value:.12g} via {qv.method}, residual {qv.residual:.1e}, {dt:.1f} s"
    except Exception as exc:  # noqa: BLE001
        ok, detail = False, f"toric L=3 iterative solve failed: {exc}"
    record(5, ok, detail, warn_only=True)
    if not ok:
        warnings.warn(detail)


def test_criterion_06_gme():
    c5 = gme_certificate_exhaustive(five_qubit_code())
    ok5 = c5.n_witnessed == c5.n_bipartitions == 15 and verify_certificate(five_qubit_code(), c5)
    t2 = toric_code(2)
    ex2 = gme_certificate_exhaustive(t2)
    ok2 = ex2.n_witnessed == ex2.n_bipartitions == 127 and verify_certificate(t2, ex2)
    gens2 = toric_generators(2)
    agree = 0
    for m in bipartition_masks(8).tolist():
        v, p = toric_gme_witness(2, m)
        agree += anticommute_on(gens2[v], gens2[p], m) and ex2.witnesses[m] is not None
    gens3 = toric_generators(3)
    full = (1 << 18) - 1
    masks3 = bipartition_masks(18).tolist()
    good3 = 0
    for m in masks3:
        v, p = toric_gme_witness(3, m)
        good3 += anticommute_on(gens3[v], gens3[p], m) and anticommute_on(gens3[v], gens3[p], full & ~m)
    ok = ok5 and ok2 and agree == 127 and len(masks3) == 131071 and good3 == 131071
    record(6, ok, f"C5 {c5.n_witnessed}/15, toric L=2 {ex2.n_witnessed}/127 (constructive agrees on {agree}), "
                  f"toric L=3 constructive {good3}/{len(masks3)} re-verified")
    assert ok


def test_criterion_07_fact4():
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(200):
        D = (2, 4, 8)[k % 3]
        sub = int(rng.integers(1, min(4, D - 1) + 1))
        rho = random_density(rng, D, rank=int(rng.integers(1, D + 1)))
        B = random_isometry(rng, D, sub)
        direct = max_fidelity_over_subspace(rho, B, rng)
        worst = max(worst, abs(direct - np.trace(B @ B.conj().T @ rho).real))
    ok = worst <= 1e-3
    record(7, ok, f"max |max_sigma F(sigma, rho) - tr(P rho)| = {worst:.1e} over 200 instances")
    assert ok


def test_criterion_08_qubit_frames():
    rng = np.random.default_rng(8)
    worst = 0.0
    for k in range(100):
        d = (1, 2, 4)[k % 3]
        V = unitary_group.rvs(2 * d, random_state=rng)
        Xt = V @ np.kron(X, np.eye(d)) @ V.conj().T
        Zt = V @ np.kron(Z, np.eye(d)) @ V.conj().T
        worst = max(worst, extract_qubit_frame(Xt, Zt).residual(Xt, Zt))
    ok = worst <= 1e-10
    record(8, ok, f"max frame residual {worst:.1e} over 100 conjugations, d in {{1, 2, 4}}")
    assert ok


def test_criterion_09_pipeline():
    rng = np.random.default_rng(9)
    group = five_qubit_code()
    basis = code_basis(group, [five_qubit_labeler()]).states
    P = code_projector(group)
    stab_worst = coef_worst = resid_worst = 0.0
    for k in range(50):
        aux = [int(a) for a in rng.choice([1, 2], size=5)]
        c = unit(np.abs(rng.normal(size=2)))
        st, obs = conjugated_setup(rng, basis, c, aux)
        stab_worst = max(stab_worst, max(stabilization_residual(st, obs, group.generators, 0)))
        frames = [extract_qubit_frame(a, b) for a, b in local_operators(obs, 0)]
        d = decompose_onto_code(frame_state(st, frames), basis)
        coef_worst = max(coef_worst, np.max(np.abs(d.coefficients - c)))
    for k in range(50):
        aux = [int(a) for a in rng.choice([1, 2], size=5)]
        A = int(np.prod(aux)) * 2
        framed = random_vector(rng, 32 * A).reshape(32, A)
        st, obs, Vs = conjugated_setup(rng, basis, None, aux, framed=framed, return_unitaries=True)
        frames = [extract_qubit_frame(a, b) for a, b in local_operators(obs, 0)]
        d = decompose_onto_code(frame_state(st, frames), basis)
        # oracle: undo the known unitaries and take tr((P (x) 1) rho) densely
        v = st.vector
        full = st.dims + (st.env_dim,)
        for p, V in enumerate(Vs):
            v = apply_local(v, full, p, V.conj().T)
        m = split_qubits(v, aux, st.env_dim)
        expected = 1 - np.real(np.trace(m.conj().T @ P @ m))
        resid_worst = max(resid_worst, abs(d.residual - expected))
    ok = stab_worst <= 1e-10 and coef_worst <= 1e-8 and resid_worst <= 1e-10
    record(9, ok, f"stabilization {stab_worst:.1e}, |c_i| error {coef_worst:.1e}, off-code residual error {resid_worst:.1e} (50 + 50 states)")
    assert ok


def test_criterion_10_robustness(i5_setup, i5_certificate):
    expr, P = i5_setup
    cert = i5_certificate
    tight = abs(cert.tightness - 1) <= 1e-6
    beta_c = classical_bound(expr).value
    rows = sweep_curve(cert, beta_c, I5_QUANTUM, 0.0)
    lb = [r.lower_bound for r in rows]
    monotone = all(b >= a for a, b in zip(lb, lb[1:]))
    K = k_operator(AngleConfig.ideal(5), P)
    k_err = float(np.linalg.norm(K - P))
    g_ok = abs(g(math.pi / 4) - 1) < 1e-15
    ok = tight and monotone and k_err <= 1e-12 and g_ok and abs(lb[-1] - 1) <= 1e-6
    record(10, ok, f"a = {cert.a:.3f}, b = {cert.b:.9f}, a*beta_q + b = {cert.tightness:.12f}; "
                   f"curve non-decreasing: {monotone}; ||K(pi/4) - P5|| = {k_err:.1e}")
    assert ok


def test_criterion_11_faces():
    c5 = code_basis(five_qubit_code(), [five_qubit_labeler()])
    pts5 = [behaviour_of(c5[i], ideal_observables(5)) for i in range(2)]
    dim5 = face_dimension(pts5).dimension
    s5 = stabilizer_image(five_qubit_labeler(), 0)
    vals = [p.evaluate(s5) for p in pts5]
    t2 = code_basis(toric_code(2), toric_labelers(2))
    pts_t = [behaviour_of(t2[i], ideal_observables(8)) for i in range(4)]
    rep_t = face_dimension(pts_t)
    ok = dim5 == 1 and rep_t.dimension >= 2 and np.allclose(vals, [-1, 1], atol=1e-12)
    record(11, ok, f"C5 face dimension {dim5}, <S5~> = ({vals[0]:.12g}, {vals[1]:.12g}); "
                   f"toric L=2 face dimension {rep_t.dimension} (smallest s.v. {rep_t.smallest[0]:.3g})")
    assert ok
