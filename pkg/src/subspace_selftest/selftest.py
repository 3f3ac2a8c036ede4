"""Self-testing checks on explicit states: stabilization and anticommutation
residuals, qubit-frame extraction, decomposition onto a code basis, and
subspace extractability."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bounds import ObservableAssignment, stabilizer_image_operator
from .pauli import PauliString

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0 + 0j, -1.0])


@dataclass
class JointState:
    """Statevector on ``(x)_i C^{dims[i]} (x) C^{env_dim}``, party 0 leftmost."""
    vector: np.ndarray
    dims: tuple[int, ...]
    env_dim: int = 1

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.vector.shape != (int(np.prod(self.dims)) * self.env_dim,):
            raise ValueError("state vector does not match the declared dimensions")
        if abs(np.linalg.norm(self.vector) - 1) > 1e-12:
            raise ValueError("state is not normalised")

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        return self.vector.reshape(self.dims + (self.env_dim,))

    def apply_local(self, party: int, op: np.ndarray) -> np.ndarray:
        return apply_local(self.vector, self.dims + (self.env_dim,), party, op)

    def reduced(self, party: int) -> np.ndarray:
        t = np.moveaxis(self.tensor(), party, 0).reshape(self.dims[party], -1)
        return t @ t.conj().T


def apply_local(vec: np.ndarray, dims, axis: int, op: np.ndarray) -> np.ndarray:
    t = vec.reshape(tuple(dims))
    t = np.tensordot(op, t, axes=([1], [axis]))
    return np.moveaxis(t, 0, axis).reshape(-1)


# -- residuals ----------------------------------------------------------------

def image_apply(state: JointState, term: PauliString, obs: ObservableAssignment, special_party: int | None):
    """``(S~ (x) 1_E)|phi>`` applied factor by factor."""
    v = state.vector
    full = state.dims + (state.env_dim,)
    for p, letter in enumerate(term.letters):
        if letter == "I":
            continue
        if letter == "Y":
            raise ValueError("Y factors have no substitution rule")
        v = apply_local(v, full, p, obs.local_images(p, special_party)[letter])
    return -v if term.phase_exp == 2 else v


def stabilization_residual(state: JointState, obs: ObservableAssignment, stabilizers, special_party: int | None) -> list[float]:
    if obs.dims != list(state.dims):
        raise ValueError("observable dimensions do not match the state")
    return [float(np.linalg.norm(image_apply(state, S, obs, special_party) - state.vector)) for S in stabilizers]


def anticommutator_residual(state: JointState, Xt: np.ndarray, Zt: np.ndarray, party: int) -> float:
    a = state.apply_local(party, Xt @ Zt + Zt @ Xt)
    return float(np.linalg.norm(a))


def square_residual_on_support(state: JointState, A: np.ndarray, party: int) -> float:
    """``||(A**2 - 1) rho_party||`` -- the relation only needs to hold on the support."""
    rho = state.reduced(party)
    return float(np.linalg.norm((A @ A - np.eye(A.shape[0])) @ rho, 2))


def local_operators(obs: ObservableAssignment, special_party: int | None) -> list[tuple[np.ndarray, np.ndarray]]:
    return [(im["X"], im["Z"]) for im in (obs.local_images(p, special_party) for p in range(obs.n_parties))]


# -- qubit extraction -----------------------------------------------------------

@dataclass
class QubitFrame:
    U: np.ndarray
    aux_dim: int

    def residual(self, Xt: np.ndarray, Zt: np.ndarray) -> float:
        one = np.eye(self.aux_dim)
        rx = np.linalg.norm(self.U @ Xt @ self.U.conj().T - np.kron(_X, one))
        rz = np.linalg.norm(self.U @ Zt @ self.U.conj().T - np.kron(_Z, one))
        return float(max(rx, rz))


def extract_qubit_frame(Xt: np.ndarray, Zt: np.ndarray, tol: float = 1e-8) -> QubitFrame:
    """Unitary ``U`` with ``U Xt U^+ = X (x) 1`` and ``U Zt U^+ = Z (x) 1``.

    The +1 eigenvectors ``e_i`` of ``Zt`` are paired with ``Xt e_i``, which
    span the -1 eigenspace; ``U`` sends ``e_i -> |0>|i>`` and
    ``Xt e_i -> |1>|i>``.
    """
    D = Xt.shape[0]
    if D % 2:
        raise ValueError("odd dimension admits no qubit frame")
    one = np.eye(D)
    for name, r in (
        ("Xt^2 = 1", np.linalg.norm(Xt @ Xt - one)),
        ("Zt^2 = 1", np.linalg.norm(Zt @ Zt - one)),
        ("{Xt, Zt} = 0", np.linalg.norm(Xt @ Zt + Zt @ Xt)),
        ("Xt Hermitian", np.linalg.norm(Xt - Xt.conj().T)),
        ("Zt Hermitian", np.linalg.norm(Zt - Zt.conj().T)),
    ):
        if r > tol:
            raise ValueError(f"relation {name} violated by {r:.2e}")
    w, V = np.linalg.eigh((Zt + Zt.conj().T) / 2)
    plus = V[:, w > 0]
    d = D // 2
    if plus.shape[1] != d:
        raise ValueError("eigenspaces of Zt have unequal dimensions")
    minus = Xt @ plus
    W = np.hstack([plus, minus])
    # nearest unitary (polar factor); W is unitary up to O(tol)
    L, _, Rh = np.linalg.svd(W)
    return QubitFrame((L @ Rh).conj().T, d)


# -- decomposition ------------------------------------------------------------

def split_qubits(vec: np.ndarray, aux_dims, env_dim: int = 1) -> np.ndarray:
    """Reorder ``(x)_i (C^2 (x) C^{a_i}) (x) E`` into ``(C^2)^N (x) (x)_i C^{a_i} (x) E``.

    Returned as a matrix of shape ``(2**N, prod(a_i) * env_dim)``.
    """
    N = len(aux_dims)
    shape = []
    for a in aux_dims:
        shape += [2, a]
    t = vec.reshape(shape + [env_dim])
    perm = [2 * i for i in range(N)] + [2 * i + 1 for i in range(N)] + [2 * N]
    return np.transpose(t, perm).reshape(1 << N, -1)


def join_qubits(mat: np.ndarray, aux_dims, env_dim: int = 1) -> np.ndarray:
    """Inverse of :func:`split_qubits`."""
    N = len(aux_dims)
    t = mat.reshape([2] * N + list(aux_dims) + [env_dim])
    perm = []
    for i in range(N):
        perm += [i, N + i]
    perm.append(2 * N)
    return np.transpose(t, perm).reshape(-1)


def frame_state(state: JointState, frames: list[QubitFrame]) -> np.ndarray:
    """Apply ``U_1 (x) ... (x) U_N (x) 1_E`` and split off the qubits."""
    v = state.vector
    full = state.dims + (state.env_dim,)
    for p, f in enumerate(frames):
        v = apply_local(v, full, p, f.U)
    return split_qubits(v, [f.aux_dim for f in frames], state.env_dim)


@dataclass
class SubspaceDecomposition:
    coefficients: np.ndarray   # c_i >= 0
    junk: list[np.ndarray]     # normalised xi_i (zero vector when c_i = 0)
    residual: float            # 1 - tr((P_s (x) 1) rho)

    def reconstruct(self, basis: np.ndarray) -> np.ndarray:
        return sum(c * np.kron(basis[:, i], xi) for i, (c, xi) in enumerate(zip(self.coefficients, self.junk)))


def decompose_onto_code(framed: np.ndarray, basis: np.ndarray) -> SubspaceDecomposition:
    """Write ``framed`` (shape ``(2**N, aux)``) as ``sum_i c_i psi_i (x) xi_i`` + remainder."""
    proj = basis.conj().T @ framed          # row i = (<psi_i| (x) 1)|psi>
    c = np.linalg.norm(proj, axis=1)
    junk = [row / ci if ci > 0 else np.zeros_like(row) for row, ci in zip(proj, c)]
    residual = 1.0 - float(np.sum(c ** 2))
    return SubspaceDecomposition(c, junk, residual)


# -- fidelity and extractability ----------------------------------------------------

def psd_sqrt(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def fidelity(sigma: np.ndarray, rho: np.ndarray) -> float:
    """``||sqrt(sigma) sqrt(rho)||_1 ** 2``."""
    s = np.linalg.svd(psd_sqrt(sigma) @ psd_sqrt(rho), compute_uv=False)
    return float(np.sum(s) ** 2)


def max_fidelity_over_subspace(rho: np.ndarray, basis: np.ndarray, rng=None, restarts: int = 2) -> float:
    """Direct numerical maximisation of ``F(sigma, rho)`` over states on ``span(basis)``.

    ``sigma = B M M^+ B^+ / tr(M M^+)`` with a free complex ``k x k`` matrix ``M``.
    """
    rng = np.random.default_rng(rng)
    k = basis.shape[1]
    # sqrt(sigma) rho sqrt(sigma) shares its nonzero spectrum with
    # sqrt(S) (B^+ rho B) sqrt(S), so the search runs in k dimensions
    compressed = basis.conj().T @ rho @ basis

    def neg(x):
        M = (x[: k * k] + 1j * x[k * k:]).reshape(k, k)
        S = M @ M.conj().T
        S /= np.trace(S).real
        return -fidelity(S, compressed)

    best = 0.0
    for _ in range(restarts):
        x0 = rng.normal(size=2 * k * k)
        res = minimize(neg, x0, method="BFGS", options={"gtol": 1e-9})
        best = max(best, -res.fun)
    return best


def check_cptp(kraus, tol: float = 1e-10) -> None:
    d_in = kraus[0].shape[1]
    s = sum(K.conj().T @ K for K in kraus)
    if np.linalg.norm(s - np.eye(d_in)) > tol:
        raise ValueError("Kraus operators are not trace preserving")


def apply_channel(rho: np.ndarray, dims, party: int, kraus) -> tuple[np.ndarray, list[int]]:
    """``(1 (x) Lambda (x) 1)(rho)`` for a channel on ``party``; returns the new dims too."""
    dims = list(dims)
    n = len(dims)
    d_out = kraus[0].shape[0]
    t = rho.reshape(dims + dims)
    out = 0
    for K in kraus:
        a = np.tensordot(K, t, axes=([1], [party]))
        a = np.moveaxis(a, 0, party)
        a = np.tensordot(a, K.conj(), axes=([n + party], [1]))
        a = np.moveaxis(a, -1, n + party)
        out = out + a
    dims[party] = d_out
    D = int(np.prod(dims))
    return out.reshape(D, D), dims


def apply_dual(op: np.ndarray, dims, party: int, kraus) -> np.ndarray:
    """Heisenberg picture: ``sum_k K^+ op K`` on ``party`` (square channels)."""
    dual = [K.conj().T for K in kraus]
    return apply_channel(op, dims, party, dual)[0]


def extractability(rho: np.ndarray, channels, P_s: np.ndarray, dims=None) -> float:
    """``tr[P_s (Lambda_1 (x) ... (x) Lambda_N)(rho)]`` for the given channels.

    ``channels[i]`` is a Kraus list (``None`` for the identity channel).
    """
    n = len(channels)
    if dims is None:
        dims = [int(round(rho.shape[0] ** (1 / n)))] * n
    cur = rho
    for p, kraus in enumerate(channels):
        if kraus is None:
            continue
        check_cptp(kraus)
        cur, dims = apply_channel(cur, dims, p, kraus)
    if cur.shape != P_s.shape:
        raise ValueError("channel output does not match the projector")
    return float(np.real(np.trace(P_s @ cur)))
