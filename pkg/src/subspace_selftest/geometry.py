"""Correlation points of code-basis states and the affine dimension of the
face they span."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bell import BellExpression, Behaviour, Support, evaluate, stabilizer_image
from .bounds import ObservableAssignment, bell_operator_pauli, ideal_observables
from .pauli import expectation
from .toric import ToricLattice, loop_operator

FULL_PARTY_CAP = 10
RANK_TOL = 1e-8


def correlator_keys(n: int) -> list[Support]:
    """Every nonempty (party subset, inputs) pair; party ``p`` digit 0 = absent."""
    keys = []
    for digits in itertools.product((0, 1, 2), repeat=n):
        if any(digits):
            keys.append(tuple((p, d - 1) for p, d in enumerate(digits) if d))
    return keys


@dataclass
class CorrelationPoint:
    n_parties: int
    keys: list[Support]
    values: np.ndarray
    complete: bool = True   # False when only a declared sub-family is stored

    def __post_init__(self):
        if len(self.keys) != len(self.values):
            raise ValueError("keys and values differ in length")
        if np.any(np.abs(self.values) > 1 + 1e-9):
            raise ValueError("correlator outside [-1, 1]")

    def as_dict(self) -> dict[Support, float]:
        return dict(zip(self.keys, self.values.tolist()))

    def behaviour(self) -> Behaviour:
        return Behaviour(self.n_parties, self.as_dict())

    def evaluate(self, expr: BellExpression) -> float:
        return evaluate(expr, self.as_dict())


def _density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def behaviour_of(state: np.ndarray, obs: ObservableAssignment) -> CorrelationPoint:
    """All ``3**N - 1`` correlators of a pure state (vector) or density matrix.

    ``rho`` is contracted party by party with ``{1, A0, A1}``; party 0 ends
    up as the most significant digit, matching :func:`correlator_keys`.
    """
    n = obs.n_parties
    if n > FULL_PARTY_CAP:
        raise ValueError(f"full correlator vectors capped at {FULL_PARTY_CAP} parties")
    rho = _density(state)
    dims = obs.dims
    D = int(np.prod(dims))
    if rho.shape != (D, D):
        raise ValueError("state dimension does not match the observables")
    t = rho.reshape(dims + dims)
    for p in range(n):
        d = dims[p]
        stack = np.stack([np.eye(d), obs[p, 0], obs[p, 1]])
        # tr(O rho) = sum_ij O_ij rho_ji; current party sits on axes 0 and (remaining ket count)
        t = np.tensordot(t, stack, axes=([0, n - p], [2, 1]))
    flat = np.real(t.reshape(-1))
    return CorrelationPoint(n, correlator_keys(n), flat[1:])


def correlators_matrix_free(state: np.ndarray, supports, special_party: int | None) -> np.ndarray:
    """Selected correlators under the ideal qubit observables, via Pauli expansion."""
    n = int(np.log2(len(state)))
    obs = ideal_observables(n, special_party)
    out = np.empty(len(supports))
    for k, sup in enumerate(supports):
        op = bell_operator_pauli(BellExpression(n, ((1.0, sup),)), obs)
        out[k] = sum((c * expectation(p, state)).real for c, p in op.strings())
    return out


# -- toric loops ----------------------------------------------------------------

def loop_strings(L: int):
    """Named Z loops: every horizontal row and every vertical column."""
    lat = ToricLattice(L)
    out = [(f"hor{r}", loop_operator(lat, lat.horizontal_loop(r))) for r in range(L)]
    out += [(f"vert{c}", loop_operator(lat, lat.vertical_loop(c))) for c in range(L)]
    return out


def loop_expressions(L: int, special_party: int = 0) -> list[tuple[str, BellExpression]]:
    return [(name, stabilizer_image(s, special_party)) for name, s in loop_strings(L)]


def toric_subfamily(expr: BellExpression, L: int) -> list[Support]:
    """Correlators of ``expr`` followed by all substituted loop correlators."""
    keys = list(expr.supports())
    seen = set(keys)
    for _, e in loop_expressions(L, expr.special_party):
        for sup in e.supports():
            if sup not in seen:
                keys.append(sup)
                seen.add(sup)
    return keys


def subfamily_point(state: np.ndarray, supports, special_party: int | None) -> CorrelationPoint:
    n = int(np.log2(len(state)))
    return CorrelationPoint(n, list(supports), correlators_matrix_free(state, supports, special_party), complete=False)


def loop_expectations(point: CorrelationPoint, L: int, special_party: int = 0) -> dict[str, float]:
    values = point.as_dict()
    return {name: evaluate(e, values) for name, e in loop_expressions(L, special_party)}


# -- face dimension --------------------------------------------------------------

@dataclass
class FaceReport:
    dimension: int
    singular_values: list[float]
    lower_bound_only: bool = False

    @property
    def smallest(self) -> list[float]:
        """The two smallest singular values (fewer when there are fewer)."""
        return sorted(self.singular_values)[:2]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "singular_values": self.singular_values,
            "smallest_singular_values": self.smallest,
            "threshold": RANK_TOL,
            "lower_bound_only": self.lower_bound_only,
        }


def face_dimension(points, tol: float = RANK_TOL) -> FaceReport:
    """Affine dimension: numerical rank of ``p_k - p_0``."""
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    keys = points[0].keys
    for q in points[1:]:
        if q.keys != keys:
            raise ValueError("points use different correlator orderings")
    complete = all(q.complete for q in points)
    if len(points) == 1:
        return FaceReport(0, [], not complete)
    base = points[0].values
    diffs = np.array([q.values - base for q in points[1:]])
    s = np.linalg.svd(diffs, compute_uv=False)
    return FaceReport(int(np.sum(s > tol)), s.tolist(), not complete)
