"""Shared constructions for the self-testing checks."""
import numpy as np
from scipy.stats import unitary_group

from subspace_selftest.bounds import ObservableAssignment, ideal_observables
from subspace_selftest.selftest import JointState, apply_local, join_qubits


def unit(v):
    return v / np.linalg.norm(v)


def random_vector(rng, d):
    return unit(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_density(rng, d, rank=None):
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_isometry(rng, d, k):
    Q, _ = np.linalg.qr(rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k)))
    return Q


def conjugated_setup(rng, basis, coefficients, aux, env=2, special_party=0, framed=None, return_unitaries=False):
    """``sum_i c_i psi_i (x) xi_i`` hidden behind random local unitaries.

    Returns the joint state and the matching observables; party ``p`` holds
    ``C^2 (x) C^{aux[p]}`` rotated by a random ``V_p``.  ``framed`` replaces
    the code-space state by an arbitrary ``(2**N, aux)`` matrix.
    """
    n = len(aux)
    A = int(np.prod(aux)) * env
    if framed is None:
        xi = [random_vector(rng, A) for _ in coefficients]
        framed = sum(c * np.outer(basis[:, i], x) for i, (c, x) in enumerate(zip(coefficients, xi)))
    vec = join_qubits(framed, aux, env)
    dims = [2 * a for a in aux]
    Vs = [unitary_group.rvs(d, random_state=rng) for d in dims]
    for p, V in enumerate(Vs):
        vec = apply_local(vec, dims + [env], p, V)
    ideal = ideal_observables(n, special_party)
    obs = ObservableAssignment([
        tuple(V @ np.kron(A_, np.eye(a)) @ V.conj().T for A_ in ideal.ops[p])
        for p, (V, a) in enumerate(zip(Vs, aux))
    ])
    state = JointState(unit(vec), dims, env)
    return (state, obs, Vs) if return_unitaries else (state, obs)
