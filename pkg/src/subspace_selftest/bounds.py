"""Classical bounds by strategy enumeration, quantum values by Bell-operator
eigenanalysis, and numerical checks of sum-of-squares certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any

import numpy as np
import scipy.sparse.linalg as spla

from .bell import SQRT2, BellExpression
from .pauli import PauliString, apply_to_state

CLASSICAL_PARTY_CAP = 12
DENSE_DIM_CAP = 1 << 12
ACHIEVED_TOL = 1e-8

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0 + 0j, -1.0])
_PAULI_BASIS = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


class NonConvergenceError(RuntimeError):
    pass


@dataclass
class BoundReport:
    value: float
    method: str                      # enumeration | dense_eig | iterative_eig
    argmax: Any = None               # strategy array or eigenvector
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": self.value, "method": self.method, "residual": self.residual}
        if self.method == "enumeration" and self.argmax is not None:
            out["argmax"] = np.asarray(self.argmax).astype(int).tolist()
        out.update(self.diagnostics)
        return out


# -- classical bound ----------------------------------------------------------

def _term_masks(expr: BellExpression) -> tuple[np.ndarray, np.ndarray]:
    masks = np.array([sum(1 << (2 * p + x) for p, x in sup) for _, sup in expr.terms], dtype=np.int64)
    coefs = np.array([c for c, _ in expr.terms])
    return masks, coefs


def classical_bound(expr: BellExpression, low_bits: int = 14) -> BoundReport:
    """Maximum over all ``4**N`` deterministic strategies.

    Strategy bit ``2p + x`` set means party ``p`` answers ``-1`` on input
    ``x``.  The low bits are evaluated as one vectorised block; the high bits
    are walked in Gray-code order so each step flips one answer and only the
    terms touching it change sign.
    """
    N = expr.n_parties
    if N > CLASSICAL_PARTY_CAP:
        raise ValueError(f"enumeration capped at {CLASSICAL_PARTY_CAP} parties; check the formula instead")
    masks, coefs = _term_masks(expr)
    nbits = 2 * N
    b = min(nbits, low_bits)
    low = np.arange(1 << b, dtype=np.int64)
    low_mask = (1 << b) - 1
    # sign of each term on each low-bit pattern: (terms, 2**b)
    low_sign = 1 - 2 * (np.bitwise_count(low[None, :] & (masks[:, None] & low_mask)) & 1).astype(np.int8)
    high_masks = masks >> b
    high_sign = np.ones(len(masks))

    best, best_idx = -math.inf, 0
    n_high = nbits - b
    g_prev = 0
    for step in range(1 << n_high):
        g = step ^ (step >> 1)
        if step:
            flipped = (g ^ g_prev).bit_length() - 1
            touched = (high_masks >> flipped) & 1 == 1
            high_sign[touched] *= -1
        g_prev = g
        vals = (coefs * high_sign) @ low_sign
        k = int(np.argmax(vals))
        if vals[k] > best + 1e-12:
            best, best_idx = float(vals[k]), (g << b) | k
    strategy = np.array(
        [[-1 if (best_idx >> (2 * p + x)) & 1 else 1 for x in (0, 1)] for p in range(N)]
    )
    return BoundReport(best, "enumeration", strategy, diagnostics={"n_strategies": 4 ** N})


# -- observables --------------------------------------------------------------

@dataclass
class ObservableAssignment:
    """``ops[party][input]``: Hermitian matrices with eigenvalues +-1."""
    ops: list[tuple[np.ndarray, np.ndarray]]

    def __post_init__(self):
        for p, pair in enumerate(self.ops):
            if len(pair) != 2:
                raise ValueError(f"party {p} needs exactly two observables")
            for x, A in enumerate(pair):
                A = np.asarray(A)
                d = A.shape[0]
                if A.shape != (d, d):
                    raise ValueError(f"observable ({p},{x}) not square")
                if np.linalg.norm(A - A.conj().T) > 1e-10 or np.linalg.norm(A @ A - np.eye(d)) > 1e-10:
                    raise ValueError(f"observable ({p},{x}) is not a Hermitian involution")

    @property
    def n_parties(self) -> int:
        return len(self.ops)

    @property
    def dims(self) -> list[int]:
        return [pair[0].shape[0] for pair in self.ops]

    def __getitem__(self, key):
        p, x = key
        return self.ops[p][x]

    def local_images(self, party: int, special_party: int | None) -> dict[str, np.ndarray]:
        """Operators standing in for X and Z on ``party`` after substitution."""
        A0, A1 = self.ops[party]
        if party == special_party:
            return {"X": (A0 + A1) / SQRT2, "Z": (A0 - A1) / SQRT2}
        return {"X": A0, "Z": A1}


def ideal_observables(n: int, special_party: int | None = 0) -> ObservableAssignment:
    ops = []
    for p in range(n):
        if p == special_party:
            ops.append(((_X + _Z) / SQRT2, (_X - _Z) / SQRT2))
        else:
            ops.append((_X.copy(), _Z.copy()))
    return ObservableAssignment(ops)


def random_dichotomic(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    """Random Hermitian involution; for ``d = 2`` a random Bloch direction."""
    if d == 2:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        return v[0] * _X + v[1] * _Y + v[2] * _Z
    from scipy.stats import unitary_group

    U = unitary_group.rvs(d, random_state=rng)
    signs = rng.choice([-1.0, 1.0], size=d)
    return U @ np.diag(signs) @ U.conj().T


def random_observables(n: int, rng: np.random.Generator, d: int = 2) -> ObservableAssignment:
    return ObservableAssignment([(random_dichotomic(rng, d), random_dichotomic(rng, d)) for _ in range(n)])


# -- Bell operators -------------------------------------------------------------

def bell_operator(expr: BellExpression, obs: ObservableAssignment) -> np.ndarray:
    """Dense ``sum_t c_t (x) A`` with identities on absent parties."""
    if obs.n_parties != expr.n_parties:
        raise ValueError("observable assignment does not match the expression's parties")
    dims = obs.dims
    D = int(np.prod(dims))
    B = np.zeros((D, D), dtype=complex)
    for coef, sup in expr.terms:
        chosen = dict(sup)
        factors = [obs[p, chosen[p]] if p in chosen else np.eye(dims[p]) for p in range(expr.n_parties)]
        B += coef * reduce(np.kron, factors)
    return B


def pauli_coefficients(A: np.ndarray) -> dict[str, complex]:
    return {k: complex(np.trace(P.conj().T @ A)) / 2 for k, P in _PAULI_BASIS.items()}


class PauliSum:
    """Weighted sum of phase-free Pauli strings applied matrix-free."""

    def __init__(self, n: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n = n
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})

    def add(self, p: PauliString, coef: complex):
        key = (p.x_mask, p.z_mask)
        phase = (1, 1j, -1, -1j)[p.phase_exp]
        self.terms[key] = self.terms.get(key, 0) + coef * phase

    def prune(self, tol: float = 1e-14) -> "PauliSum":
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > tol}
        return self

    def strings(self):
        for (x, z), c in self.terms.items():
            yield c, PauliString(self.n, x, z, 0)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v, dtype=complex)
        for c, p in self.strings():
            out += c * apply_to_state(p, v)
        return out

    def to_dense(self) -> np.ndarray:
        from .pauli import to_dense

        return sum(c * to_dense(p) for c, p in self.strings())

    def __len__(self):
        return len(self.terms)


def bell_operator_pauli(expr: BellExpression, obs: ObservableAssignment) -> PauliSum:
    """Matrix-free Bell operator for qubit observables (Pauli expansion)."""
    if any(d != 2 for d in obs.dims):
        raise ValueError("Pauli expansion needs qubit observables")
    n = expr.n_parties
    local = [[pauli_coefficients(obs[p, x]) for x in (0, 1)] for p in range(n)]
    out = PauliSum(n)
    for coef, sup in expr.terms:
        partial = [({}, coef + 0j)]
        for p, x in sup:
            nxt = []
            for fac, c in partial:
                for letter, a in local[p][x].items():
                    if abs(a) < 1e-15:
                        continue
                    f = dict(fac)
                    if letter != "I":
                        f[p] = letter
                    nxt.append((f, c * a))
            partial = nxt
        for fac, c in partial:
            out.add(PauliString.from_sparse(n, fac), c)
    return out.prune()


def stabilizer_image_operator(term: PauliString, obs: ObservableAssignment, special_party: int | None) -> np.ndarray:
    """Dense ``S~``: each X/Z factor replaced by its observable image."""
    if term.phase_exp not in (0, 2):
        raise ValueError("stabilizer image needs a real sign")
    factors = []
    for p, letter in enumerate(term.letters):
        if letter == "I":
            factors.append(np.eye(obs.dims[p]))
        elif letter == "Y":
            raise ValueError("Y factors have no substitution rule")
        else:
            factors.append(obs.local_images(p, special_party)[letter])
    sign = -1.0 if term.phase_exp == 2 else 1.0
    return sign * reduce(np.kron, factors)


# -- quantum values -----------------------------------------------------------

def quantum_value_ideal(
    expr: BellExpression,
    dense_cap: int = DENSE_DIM_CAP,
    tol: float = 1e-8,
    max_matvecs: int = 5000,
    seed: int = 0,
) -> BoundReport:
    """Largest eigenvalue of the Bell operator under the ideal qubit observables."""
    obs = ideal_observables(expr.n_parties, expr.special_party)
    dim = 1 << expr.n_parties
    if dim <= dense_cap:
        B = bell_operator(expr, obs)
        w, V = np.linalg.eigh(B)
        v = V[:, -1]
        res = float(np.linalg.norm(B @ v - w[-1] * v))
        return BoundReport(float(w[-1]), "dense_eig", v, res, {"dimension": dim})
    return _iterative_max(bell_operator_pauli(expr, obs), tol, max_matvecs, seed)


def _iterative_max(op: PauliSum, tol: float, max_matvecs: int, seed: int = 0) -> BoundReport:
    dim = 1 << op.n
    count = [0]

    def mv(v):
        count[0] += 1
        if count[0] > max_matvecs:
            raise NonConvergenceError(f"more than {max_matvecs} matvecs")
        return op.matvec(np.asarray(v).ravel())

    lin = spla.LinearOperator((dim, dim), matvec=mv, dtype=complex)
    v0 = np.random.default_rng(seed).normal(size=dim) + 0j
    try:
        w, V = spla.eigsh(lin, k=1, which="LA", v0=v0, tol=tol * 1e-2, ncv=24)
    except spla.ArpackNoConvergence as exc:
        raise NonConvergenceError(str(exc)) from exc
    v = V[:, 0] / np.linalg.norm(V[:, 0])
    res = float(np.linalg.norm(op.matvec(v) - w[0] * v))
    if res > tol * max(1.0, abs(w[0])):
        raise NonConvergenceError(f"Ritz residual {res:.3e} above tolerance")
    return BoundReport(float(w[0]), "iterative_eig", v, res, {"dimension": dim, "matvecs": count[0]})


# -- sum of squares -----------------------------------------------------------

def i5_sos_weights() -> list[tuple[float, PauliString]]:
    from .stabilizer import five_qubit_generators

    lam = (1 / SQRT2, 0.5, 1 / SQRT2, SQRT2)
    return list(zip(lam, five_qubit_generators()))


def toric_sos_weights(L: int) -> list[tuple[float, PauliString]]:
    from .toric import toric_generators

    return [(0.5, g) for g in toric_generators(L)]


def sos_operator(expr: BellExpression, obs: ObservableAssignment, sos_weights) -> np.ndarray:
    dims = obs.dims
    D = int(np.prod(dims))
    one = np.eye(D)
    total = np.zeros((D, D), dtype=complex)
    for lam, S in sos_weights:
        T = one - stabilizer_image_operator(S, obs, expr.special_party)
        total += lam * (T @ T)
    return total


def sos_residual(expr: BellExpression, obs: ObservableAssignment, sos_weights, beta_q: float) -> float:
    """Spectral norm of ``beta_q 1 - B - sum_i lam_i (1 - S~_i)**2``."""
    B = bell_operator(expr, obs)
    R = beta_q * np.eye(B.shape[0]) - B - sos_operator(expr, obs, sos_weights)
    return float(np.linalg.norm(R, 2))


def lambda_max(expr: BellExpression, obs: ObservableAssignment) -> float:
    return float(np.linalg.eigvalsh(bell_operator(expr, obs))[-1])


I5_QUANTUM = 4 * SQRT2 + 1


def toric_quantum_formula(N: int) -> float:
    return float(N)

