"""Stabilizer groups, code projectors, labelled code bases and the
bipartite anticommutation criterion for genuinely entangled code spaces."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    _PHASE_VALUES,
    DENSE_QUBIT_CAP,
    PauliString,
    anticommute_on,
    _index_mask,
    apply_to_state,
    commutes,
    multiply,
    to_dense,
)

RANK_TOL = 1e-10


class StabilizerError(ValueError):
    pass


def _symplectic_row(p: PauliString) -> int:
    return p.x_mask | (p.z_mask << p.n_qubits)


def _reduce(rows: dict[int, tuple[int, PauliString]], p: PauliString):
    """Eliminate ``p`` against pivot rows; returns (residual bits, accumulated product)."""
    bits = _symplectic_row(p)
    acc = p
    while bits:
        pivot = bits.bit_length() - 1
        if pivot not in rows:
            break
        rbits, rp = rows[pivot]
        bits ^= rbits
        acc = multiply(acc, rp)
    return bits, acc


def symplectic_rank(strings) -> int:
    rows: dict[int, tuple[int, PauliString]] = {}
    for p in strings:
        bits, acc = _reduce(rows, p)
        if bits:
            rows[bits.bit_length() - 1] = (bits, acc)
    return len(rows)


@dataclass(frozen=True)
class StabilizerGroup:
    n_qubits: int
    generators: tuple[PauliString, ...]
    rank: int
    independent: tuple[int, ...] = field(default=())

    @property
    def n_logical(self) -> int:
        return self.n_qubits - self.rank

    @property
    def code_dimension(self) -> int:
        return 1 << (self.n_qubits - self.rank)

    @property
    def order(self) -> int:
        return 1 << self.rank

    def independent_generators(self) -> list[PauliString]:
        return [self.generators[i] for i in self.independent]


def from_generators(gens, n_qubits: int | None = None) -> StabilizerGroup:
    """Validate a generator list and compute its rank.

    Redundant generators are kept (the Bell expressions sum over all of them)
    but every dependency must multiply to ``+1``.
    """
    gens = tuple(PauliString.from_label(g) if isinstance(g, str) else g for g in gens)
    if not gens:
        if n_qubits is None:
            raise StabilizerError("empty generator list needs n_qubits")
        return StabilizerGroup(n_qubits, (), 0, ())
    n = gens[0].n_qubits
    for k, g in enumerate(gens):
        if g.n_qubits != n:
            raise StabilizerError(f"generator {k} has {g.n_qubits} qubits, expected {n}")
        if not g.is_hermitian():
            raise StabilizerError(f"generator {k} ({g}) is not Hermitian")
    for i, j in itertools.combinations(range(len(gens)), 2):
        if not commutes(gens[i], gens[j]):
            raise StabilizerError(f"generators {i} and {j} do not commute")

    rows: dict[int, tuple[int, PauliString]] = {}
    independent = []
    for k, g in enumerate(gens):
        bits, acc = _reduce(rows, g)
        if bits:
            rows[bits.bit_length() - 1] = (bits, acc)
            independent.append(k)
        elif acc.phase_exp != 0:
            raise StabilizerError(f"-identity is generated (dependency closing at generator {k})")
    return StabilizerGroup(n, gens, len(rows), tuple(independent))


def five_qubit_generators() -> list[PauliString]:
    return [PauliString.from_label(s) for s in ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")]


def five_qubit_code() -> StabilizerGroup:
    return from_generators(five_qubit_generators())


def five_qubit_labeler() -> PauliString:
    return PauliString.from_label("ZZZZZ")


# -- projector and code basis -------------------------------------------

def code_projector(group: StabilizerGroup) -> np.ndarray:
    n = group.n_qubits
    if n > DENSE_QUBIT_CAP:
        raise ValueError(f"dense projector capped at {DENSE_QUBIT_CAP} qubits")
    dim = 1 << n
    P = np.eye(dim, dtype=complex)
    for g in group.independent_generators():
        P = P @ (np.eye(dim) + to_dense(g)) / 2
    return P


def project_states(v: np.ndarray, terms) -> np.ndarray:
    """Apply ``prod (1 + s*S)/2`` matrix-free; ``terms`` yields (S, s)."""
    for S, s in terms:
        v = 0.5 * (v + s * apply_to_state(S, v))
    return v


@dataclass
class CodeBasis:
    states: np.ndarray                # shape (2**n, dim), orthonormal columns
    labels: list[tuple[int, ...]]     # labeler eigenvalues per column
    labelers: tuple[PauliString, ...]

    def __len__(self):
        return self.states.shape[1]

    def __getitem__(self, k) -> np.ndarray:
        return self.states[:, k]


def _check_labelers(group: StabilizerGroup, labelers) -> None:
    gens = group.independent_generators()
    for k, lab in enumerate(labelers):
        if not lab.is_hermitian():
            raise StabilizerError(f"labeler {k} is not Hermitian")
        for i, g in enumerate(group.generators):
            if not commutes(lab, g):
                raise StabilizerError(f"labeler {k} ({lab}) does not commute with generator {i}")
        for m in range(k):
            if not commutes(lab, labelers[m]):
                raise StabilizerError(f"labelers {m} and {k} do not commute")
    if symplectic_rank(list(gens) + list(labelers)) != group.rank + len(labelers):
        raise StabilizerError("labelers are not independent of the stabilizer")


def _candidate_order(n: int, diag_terms) -> np.ndarray:
    """Standard-basis indices, those not killed by diagonal constraints first."""
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(idx.shape, dtype=bool)
    for S, s in diag_terms:
        z = _index_mask(S.z_mask, n)
        sign = np.real(_PHASE_VALUES[S.phase_exp]) * (1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int64))
        ok &= sign * s > 0
    return np.concatenate([idx[ok], idx[~ok]])


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first entry within 1e-9 of the largest modulus is made real positive
    k = int(np.argmax(np.abs(v) > np.abs(v).max() - 1e-9))
    return v * (abs(v[k]) / v[k])


def code_basis(group: StabilizerGroup, labelers=(), batch: int | None = None) -> CodeBasis:
    """Orthonormal basis of the code space split by labeler eigenvalues.

    For every eigenvalue tuple (``-1`` before ``+1``), standard basis vectors
    are pushed through the joint projector and orthonormalised by modified
    Gram-Schmidt with pivoting on the residual column norm.
    """
    labelers = tuple(PauliString.from_label(l) if isinstance(l, str) else l for l in labelers)
    _check_labelers(group, labelers)
    n = group.n_qubits
    if batch is None:
        batch = max(1, min(64, (1 << 20) >> n))
    per_label = group.code_dimension >> len(labelers)
    gens = group.independent_generators()
    states, labels = [], []
    for lam in itertools.product((-1, 1), repeat=len(labelers)):
        terms = [(g, 1) for g in gens] + list(zip(labelers, lam))
        diag = [(S, s) for S, s in terms if S.x_mask == 0]
        order = _candidate_order(n, diag)
        found: list[np.ndarray] = []
        pos = 0
        while len(found) < per_label:
            if pos >= len(order):
                raise StabilizerError("failed to span the labelled code space")
            chunk = order[pos:pos + batch]
            pos += batch
            cols = np.zeros((1 << n, len(chunk)), dtype=complex)
            cols[chunk, np.arange(len(chunk))] = 1.0
            cols = project_states(cols, terms)
            for f in found:
                cols -= np.outer(f, f.conj() @ cols)
            while len(found) < per_label:
                norms = np.linalg.norm(cols, axis=0)
                k = int(np.argmax(norms))
                if norms[k] <= RANK_TOL:
                    break
                v = cols[:, k] / norms[k]
                # second pass keeps orthogonality near machine precision
                for f in found:
                    v = v - f * np.vdot(f, v)
                v /= np.linalg.norm(v)
                found.append(v)
                cols -= np.outer(v, v.conj() @ cols)
        for v in found:
            states.append(_fix_phase(v))
            labels.append(tuple(lam))
    return CodeBasis(np.column_stack(states), labels, labelers)


# -- genuine-entanglement criterion ---------------------------------------

@dataclass
class GmeCertificate:
    n_qubits: int
    # ascending G masks (party 0 always in G); value is a generator pair or None
    witnesses: dict[int, tuple[int, int] | None]

    @property
    def n_bipartitions(self) -> int:
        return len(self.witnesses)

    @property
    def n_witnessed(self) -> int:
        return sum(w is not None for w in self.witnesses.values())

    @property
    def genuinely_entangled(self) -> bool:
        return self.n_witnessed == self.n_bipartitions

    @property
    def verdict(self) -> str:
        return "genuinely entangled" if self.genuinely_entangled else "inconclusive"

    def inconclusive(self) -> list[int]:
        return [g for g, w in self.witnesses.items() if w is None]


def bipartition_masks(n: int) -> np.ndarray:
    """All nontrivial bipartition sides containing qubit 0, ascending."""
    return 1 | (np.arange((1 << (n - 1)) - 1, dtype=np.int64) << 1)


def gme_certificate_exhaustive(group: StabilizerGroup) -> GmeCertificate:
    n = group.n_qubits
    gens = group.generators
    masks = bipartition_masks(n)
    witness = np.full((len(masks), 2), -1, dtype=np.int64)
    open_ = np.ones(len(masks), dtype=bool)
    for i, j in itertools.combinations(range(len(gens)), 2):
        a, b = gens[i], gens[j]
        m = (a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)
        if not m:
            continue
        hit = open_ & ((np.bitwise_count(masks & m) & 1) == 1)
        witness[hit] = (i, j)
        open_ &= ~hit
        if not open_.any():
            break
    out = {}
    for g, (i, j) in zip(masks.tolist(), witness.tolist()):
        out[g] = (i, j) if i >= 0 else None
    return GmeCertificate(n, out)


def verify_certificate(group: StabilizerGroup, cert: GmeCertificate) -> bool:
    """Re-check every recorded pair with :func:`anticommute_on` on both sides."""
    full = (1 << group.n_qubits) - 1
    for g, w in cert.witnesses.items():
        if w is None:
            continue
        p, q = group.generators[w[0]], group.generators[w[1]]
        if not (anticommute_on(p, q, g) and anticommute_on(p, q, full & ~g)):
            return False
    return True
