"""Robustness of subspace self-testing: qubit-reduced observables, the
angle-dependent extraction channels, the operator inequality
``K >= a B + b`` and the extractability-vs-violation curve.

Each party keeps a local frame ``(Ma, Mb)``: ``(X, Z)`` for the special party
and ``(H, V) = ((X+Z)/sqrt2, (X-Z)/sqrt2)`` for everyone else.  Observables
are ``cos(alpha) Ma + (-1)^x sin(alpha) Mb`` and the channel on a party
dephases along ``Ma`` (``alpha <= pi/4``) or ``Mb`` with strength ``g(alpha)``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bell import SQRT2, BellExpression
from .bounds import ObservableAssignment, bell_operator
from .selftest import apply_dual, check_cptp

log = logging.getLogger(__name__)

_I = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.diag([1.0, -1.0])
_H = (_X + _Z) / SQRT2
_V = (_X - _Z) / SQRT2

HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4
BATCH_PARTY_CAP = 6       # 4**N x 4**N expansion table above this is too large
DENSE_PARTY_CAP = 10


def g(x):
    """Channel strength; ``g(0) = g(pi/2) = 0`` and ``g(pi/4) = 1``."""
    return (1 + SQRT2) * (np.sin(x) + np.cos(x) - 1)


def local_frame(party: int, special_party: int | None) -> tuple[np.ndarray, np.ndarray]:
    return (_X, _Z) if party == special_party else (_H, _V)


# -- observables and channels --------------------------------------------------

@dataclass(frozen=True)
class AngleConfig:
    angles: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        for a in self.angles:
            if not -1e-12 <= a <= HALF_PI + 1e-12:
                raise ValueError(f"angle {a} outside [0, pi/2]")

    @classmethod
    def ideal(cls, n: int) -> "AngleConfig":
        return cls((QUARTER_PI,) * n)

    def __len__(self):
        return len(self.angles)


def jordan_observables(config: AngleConfig, special_party: int | None = 0) -> ObservableAssignment:
    ops = []
    for p, a in enumerate(config.angles):
        Ma, Mb = local_frame(p, special_party)
        c, s = math.cos(a), math.sin(a)
        ops.append((c * Ma + s * Mb, c * Ma - s * Mb))
    return ObservableAssignment(ops)


@dataclass(frozen=True)
class ExtractionChannel:
    party: int
    angle: float
    special_party: int | None = 0

    @property
    def strength(self) -> float:
        return float(g(self.angle))

    @property
    def gamma(self) -> np.ndarray:
        Ma, Mb = local_frame(self.party, self.special_party)
        return Ma if self.angle <= QUARTER_PI else Mb

    def kraus(self) -> list[np.ndarray]:
        gg = self.strength
        ops = [math.sqrt((1 + gg) / 2) * _I, math.sqrt(max(0.0, (1 - gg) / 2)) * self.gamma]
        check_cptp(ops)
        return ops


def k_operator(config: AngleConfig, P_s: np.ndarray, special_party: int | None = 0) -> np.ndarray:
    """``(Lambda_1^+ (x) ... (x) Lambda_N^+)(P_s)`` by direct Kraus composition."""
    n = len(config)
    if n > DENSE_PARTY_CAP:
        raise ValueError(f"dense K capped at {DENSE_PARTY_CAP} parties")
    K = np.asarray(P_s)
    dims = [2] * n
    for p, a in enumerate(config.angles):
        K = apply_dual(K, dims, p, ExtractionChannel(p, a, special_party).kraus())
    return K


# -- batched evaluation of lambda_min(K - aB) ---------------------------------------

class _FrameExpansion:
    """``K(alpha) - a B(alpha)`` expanded in the local bases ``{1, Ma, Mb, Ma Mb}``.

    In that basis both the channels and the observables act diagonally per
    party, so every coefficient is a product of per-party factors and a whole
    batch of configurations becomes one matrix product.
    """

    def __init__(self, expr: BellExpression, P_s: np.ndarray):
        n = expr.n_parties
        self.n = n
        self.special = expr.special_party
        bases = []
        for p in range(n):
            Ma, Mb = local_frame(p, self.special)
            bases.append(np.stack([_I, Ma, Mb, Ma @ Mb]))
        # coefficients of P_s: tr(Q_k^T P) / 2**n
        t = np.real_if_close(np.asarray(P_s)).reshape([2] * (2 * n))
        if np.iscomplexobj(t):
            raise ValueError("projector is expected to be real in the local frames")
        for p in range(n):
            # contract row axis p and column axis (n - p) of what remains
            t = np.tensordot(t, bases[p], axes=([0, n - p], [1, 2]))
        cK = t.reshape(-1) / 2 ** n
        # coefficients of B: monomial prefactor for each support pattern
        cB = np.zeros(4 ** n)
        for coef, sup in expr.terms:
            for choice in itertools.product((1, 2), repeat=len(sup)):
                kk = [0] * n
                sign = 1.0
                for (p, x), ch in zip(sup, choice):
                    kk[p] = ch
                    if ch == 2 and x == 1:
                        sign = -sign
                cB[np.ravel_multi_index(kk, [4] * n)] += coef * sign
        active = np.flatnonzero((np.abs(cK) > 1e-14) | (np.abs(cB) > 1e-14))
        self.kidx = np.array(np.unravel_index(active, [4] * n)).T    # (terms, n)
        self.cK = cK[active]
        self.cB = cB[active]
        ops = []
        for row in self.kidx:
            M = np.ones((1, 1))
            for p, k in enumerate(row):
                M = np.kron(M, bases[p][k])
            ops.append(M.reshape(-1))
        self.ops = np.array(ops)                                        # (terms, 4**n)

    def lambda_min(self, configs: np.ndarray, a: float, chunk: int = 4096) -> np.ndarray:
        configs = np.atleast_2d(configs)
        out = np.empty(len(configs))
        D = 1 << self.n
        for s in range(0, len(configs), chunk):
            al = configs[s:s + chunk]
            c, si, gg = np.cos(al), np.sin(al), g(al)
            on_a = al <= QUARTER_PI
            one = np.ones_like(al)
            # channel factors for basis indices 0..3 (dual of dephasing along Gamma)
            fK = np.stack([one, np.where(on_a, 1.0, gg), np.where(on_a, gg, 1.0), gg], axis=-1)
            fB = np.stack([one, c, si, 0 * one], axis=-1)
            wK = np.ones((len(al), len(self.cK)))
            wB = np.ones((len(al), len(self.cB)))
            for p in range(self.n):
                wK *= fK[:, p, self.kidx[:, p]]
                wB *= fB[:, p, self.kidx[:, p]]
            W = wK * self.cK - a * (wB * self.cB)
            mats = (W @ self.ops).reshape(-1, D, D)
            out[s:s + chunk] = np.linalg.eigvalsh(mats)[:, 0]
        return out


class _DirectEvaluator:
    def __init__(self, expr: BellExpression, P_s: np.ndarray):
        self.expr = expr
        self.P_s = P_s

    def lambda_min(self, configs: np.ndarray, a: float) -> np.ndarray:
        return np.array([lambda_min_direct(self.expr, self.P_s, AngleConfig(cfg), a) for cfg in np.atleast_2d(configs)])


def lambda_min_direct(expr: BellExpression, P_s: np.ndarray, config: AngleConfig, a: float) -> float:
    K = k_operator(config, P_s, expr.special_party)
    B = bell_operator(expr, jordan_observables(config, expr.special_party))
    M = K - a * B
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


def make_evaluator(expr: BellExpression, P_s: np.ndarray):
    if expr.n_parties <= BATCH_PARTY_CAP:
        return _FrameExpansion(expr, P_s)
    return _DirectEvaluator(expr, P_s)


# -- minimisation over angles ------------------------------------------------------

@dataclass
class GridSpec:
    coarse_points: int = 9
    min_step: float = math.pi / 800
    n_starts: int = 3            # coarse minima refined, plus the all-pi/4 point
    max_coarse: int = 200_000    # above this the coarse grid is skipped

    def to_dict(self) -> dict:
        return {
            "coarse_points": self.coarse_points,
            "interval": [0.0, HALF_PI],
            "min_step": self.min_step,
            "n_starts": self.n_starts,
            "max_coarse": self.max_coarse,
        }


@dataclass
class LinearCertificate:
    a: float
    b: float
    beta_q: float | None
    grid: dict
    argmin_angles: tuple[float, ...]
    trace: list = field(default_factory=list, repr=False)

    @property
    def tightness(self) -> float | None:
        """``a beta_q + b``; equals 1 for a certificate tight at maximal violation."""
        return None if self.beta_q is None else self.a * self.beta_q + self.b

    def bound(self, beta):
        return self.a * np.asarray(beta) + self.b

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "beta_q": self.beta_q,
            "grid": self.grid,
            "argmin_angles": list(self.argmin_angles),
        }


def _coordinate_descent(ev, a: float, start: np.ndarray, value: float, step: float, min_step: float, trace: list):
    x = start.copy()
    n = len(x)
    while step >= min_step:
        cand = []
        for p in range(n):
            for s in (-step, step):
                y = x.copy()
                y[p] = min(HALF_PI, max(0.0, y[p] + s))
                cand.append(y)
        cand = np.array(cand)
        vals = ev.lambda_min(cand, a)
        k = int(np.argmin(vals))
        if vals[k] < value - 1e-14:
            x, value = cand[k], float(vals[k])
            trace.append({"step": step, "value": value, "angles": x.tolist()})
        else:
            step /= 2
    return x, value


def b_of_a(a: float, expr: BellExpression, P_s: np.ndarray, grid: GridSpec | None = None,
           beta_q: float | None = None, evaluator=None, seed: int = 0) -> LinearCertificate:
    """``b = min over angles of lambda_min(K - a B)``, coarse grid then refinement."""
    if a < 0:
        raise ValueError("slope a must be nonnegative")
    grid = grid or GridSpec()
    ev = evaluator or make_evaluator(expr, P_s)
    n = expr.n_parties
    pts = np.linspace(0.0, HALF_PI, grid.coarse_points)
    step = pts[1] - pts[0]
    ideal = np.full(n, QUARTER_PI)
    starts = [ideal]
    if grid.coarse_points ** n <= grid.max_coarse:
        coarse = np.array(list(itertools.product(pts, repeat=n)))
        vals = ev.lambda_min(coarse, a)
        order = np.argsort(vals, kind="stable")[: grid.n_starts]
        starts = [coarse[i] for i in order] + starts
    else:
        rng = np.random.default_rng(seed)
        starts = [rng.choice(pts, size=n) for _ in range(grid.n_starts)] + starts
    trace: list = []
    best_x, best_v = None, math.inf
    for x0 in starts:
        v0 = float(ev.lambda_min(x0[None, :], a)[0])
        trace.append({"start": x0.tolist(), "value": v0})
        x, v = _coordinate_descent(ev, a, x0, v0, step, grid.min_step, trace)
        if v < best_v:
            best_x, best_v = x, v
    log.debug("a=%.4f b=%.12g argmin=%s", a, best_v, best_x)
    return LinearCertificate(float(a), best_v, beta_q, grid.to_dict(), tuple(best_x.tolist()), trace)


def find_certificate(expr: BellExpression, P_s: np.ndarray, beta_q: float, grid: GridSpec | None = None,
                     a_max: float = 2.0, pace: float = 0.001, tol: float = 1e-6, seed: int = 0) -> LinearCertificate:
    """Smallest ``a`` on the ``pace`` lattice whose certificate is tight at ``beta_q``.

    Tightness ``a beta_q + b = 1`` is monotone in ``a`` (see the decisions
    notes), so the lattice is bisected instead of scanned.
    """
    ev = make_evaluator(expr, P_s)
    cache: dict[int, LinearCertificate] = {}

    def cert(k: int) -> LinearCertificate:
        if k not in cache:
            cache[k] = b_of_a(round(k * pace, 12), expr, P_s, grid, beta_q, ev, seed)
        return cache[k]

    def tight(k: int) -> bool:
        return abs(cert(k).tightness - 1) <= tol

    hi = int(round(a_max / pace))
    if not tight(hi):
        raise ValueError(f"no tight certificate with a <= {a_max}")
    lo = 0
    if tight(lo):
        return cert(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tight(mid):
            hi = mid
        else:
            lo = mid
    return cert(hi)


# -- trivial floor and the curve ------------------------------------------------------

def product_overlap_floor(P_s: np.ndarray, n: int, restarts: int = 100, seed: int = 0,
                          iters: int = 500) -> float:
    """Best ``<phi|P_s|phi>`` over product states, by alternating local updates.

    Extraction channels may simply prepare that product state, so the value
    is a violation-independent lower bound on the extractability.
    """
    rng = np.random.default_rng(seed)
    T = np.asarray(P_s).reshape([2] * (2 * n))
    best = 0.0
    for _ in range(restarts):
        vs = [(lambda v: v / np.linalg.norm(v))(rng.normal(size=2) + 1j * rng.normal(size=2)) for _ in range(n)]
        prev = -1.0
        for _ in range(iters):
            for p in range(n):
                vs[p] = _local_update(T, vs, p, n)
            val = float(np.real(_overlap(T, vs, n)))
            if val - prev < 1e-13:
                break
            prev = val
        best = max(best, val)
    return best


def _local_operator(T: np.ndarray, vs, p: int, n: int) -> np.ndarray:
    """2x2 operator on party ``p`` with all other parties contracted."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = letters[:n]
    bra = letters[n:2 * n]
    args, subs = [T], [ket + bra]
    for q in range(n):
        if q == p:
            continue
        args += [vs[q].conj(), vs[q]]
        subs += [ket[q], bra[q]]
    return np.einsum(",".join(subs) + "->" + ket[p] + bra[p], *args)


def _local_update(T, vs, p, n):
    w, U = np.linalg.eigh(_local_operator(T, vs, p, n))
    return U[:, -1]


def _overlap(T, vs, n):
    M = _local_operator(T, vs, 0, n)
    return vs[0].conj() @ M @ vs[0]


@dataclass
class CurveRow:
    relative_violation: float
    absolute_violation: float
    lower_bound: float
    trivial_floor: float


def sweep_curve(cert: LinearCertificate, beta_c: float, beta_q: float, trivial_floor: float,
                n_points: int = 51) -> list[CurveRow]:
    """Rows from ``beta_c`` to ``beta_q``; the bound is ``a beta + b``."""
    rows = []
    for beta in np.linspace(beta_c, beta_q, n_points):
        rows.append(CurveRow(
            float((beta - beta_c) / (beta_q - beta_c)),
            float(beta),
            float(cert.a * beta + cert.b),
            float(trivial_floor),
        ))
    return rows
