"""Signed N-qubit Pauli strings in symplectic bitmask form.

A :class:`PauliString` stores the operator ``i**phase_exp * prod_q X_q**x_q Z_q**z_q``
with the X factor to the left of the Z factor on every qubit.  Bit ``q`` of
``x_mask``/``z_mask`` refers to qubit ``q`` (0-based, qubit 0 is the leftmost
tensor factor and the most significant bit of a statevector index).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

DENSE_QUBIT_CAP = 14

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

_PHASE_TOKENS = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PHASE_PRINT = {0: "", 1: "+i", 2: "-", 3: "-i"}
_PHASE_VALUES = (1, 1j, -1, -1j)


def popcount(m: int) -> int:
    return bin(m).count("1")


def as_mask(qubits) -> int:
    """Accept an int mask or an iterable of 0-based qubit indices."""
    if isinstance(qubits, (int, np.integer)):
        return int(qubits)
    m = 0
    for q in qubits:
        m |= 1 << int(q)
    return m


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if (self.x_mask | self.z_mask) & ~full:
            raise ValueError("mask has bits beyond n_qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- construction -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"XZZXI"``, ``"-XZ"``, ``"+iY"`` ..."""
        s = label.strip()
        body = s.lstrip("+-i")
        token = s[: len(s) - len(body)]
        if token not in _PHASE_TOKENS:
            raise ValueError(f"bad phase token {token!r} in {label!r}")
        if not body:
            raise ValueError(f"empty Pauli label {label!r}")
        x = z = 0
        n_y = 0
        for q, ch in enumerate(body.upper()):
            if ch == "X":
                x |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
                n_y += 1
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
        # Y = i X Z
        return cls(len(body), x, z, _PHASE_TOKENS[token] + n_y)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        chars = ["I"] * n
        chars[qubit] = letter
        return cls.from_label("".join(chars))

    @classmethod
    def from_sparse(cls, n: int, factors: dict[int, str]) -> "PauliString":
        chars = ["I"] * n
        for q, letter in factors.items():
            chars[q] = letter
        return cls.from_label("".join(chars))

    # -- text ---------------------------------------------------------
    @property
    def letters(self) -> str:
        out = []
        for q in range(self.n_qubits):
            xb = (self.x_mask >> q) & 1
            zb = (self.z_mask >> q) & 1
            out.append("IZXY"[2 * xb + zb])
        return "".join(out)

    def to_label(self) -> str:
        n_y = popcount(self.x_mask & self.z_mask)
        return _PHASE_PRINT[(self.phase_exp - n_y) % 4] + self.letters

    def __str__(self) -> str:
        return self.to_label()

    # -- predicates ---------------------------------------------------
    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return popcount(self.support)

    def is_hermitian(self) -> bool:
        return (self.phase_exp + popcount(self.x_mask & self.z_mask)) % 2 == 0

    def is_identity(self) -> bool:
        return self.support == 0 and self.phase_exp == 0

    def is_minus_identity(self) -> bool:
        return self.support == 0 and self.phase_exp == 2

    def factor(self, qubit: int) -> str:
        return self.letters[qubit]

    # -- algebra ------------------------------------------------------
    def _check(self, other: "PauliString"):
        if self.n_qubits != other.n_qubits:
            raise ValueError(f"size mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.phase_exp + 2)

    def restrict(self, subset) -> "PauliString":
        return restrict(self, subset)

    # -- numeric realizations -----------------------------------------
    def to_matrix(self) -> np.ndarray:
        return to_dense(self)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return apply_to_state(self, v)


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Exact product ``p @ q``.

    Moving ``Z**z_p`` past ``X**x_q`` costs ``(-1)**popcount(z_p & x_q)``.
    """
    p._check(q)
    phase = p.phase_exp + q.phase_exp + 2 * popcount(p.z_mask & q.x_mask)
    return PauliString(p.n_qubits, p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask, phase)


def symplectic_product(p: PauliString, q: PauliString, subset: int | None = None) -> int:
    m = (p.x_mask & q.z_mask) ^ (p.z_mask & q.x_mask)
    if subset is not None:
        m &= subset
    return popcount(m) & 1


def commutes(p: PauliString, q: PauliString) -> bool:
    p._check(q)
    return symplectic_product(p, q) == 0


def restrict(p: PauliString, subset) -> PauliString:
    """Factor of ``p`` on the qubits in ``subset``; the whole phase stays here."""
    g = as_mask(subset)
    return PauliString(p.n_qubits, p.x_mask & g, p.z_mask & g, p.phase_exp)


def anticommute_on(p: PauliString, q: PauliString, subset) -> bool:
    p._check(q)
    return symplectic_product(p, q, as_mask(subset)) == 1


def product(strings: Iterable[PauliString], n: int | None = None) -> PauliString:
    strings = list(strings)
    if not strings:
        if n is None:
            raise ValueError("empty product needs n")
        return PauliString.identity(n)
    return reduce(multiply, strings)


# -- numeric realizations ---------------------------------------------

def to_dense(p: PauliString) -> np.ndarray:
    if p.n_qubits > DENSE_QUBIT_CAP:
        raise ValueError(f"dense realization capped at {DENSE_QUBIT_CAP} qubits; use apply_to_state")
    mats = []
    for q in range(p.n_qubits):
        xb = (p.x_mask >> q) & 1
        zb = (p.z_mask >> q) & 1
        m = _I2
        if xb and zb:
            m = _X @ _Z
        elif xb:
            m = _X
        elif zb:
            m = _Z
        mats.append(m)
    return _PHASE_VALUES[p.phase_exp] * reduce(np.kron, mats)


def _index_mask(mask: int, n: int) -> int:
    # qubit q lives at statevector bit n-1-q
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def apply_to_state(p: PauliString, v: np.ndarray) -> np.ndarray:
    """``dense(p) @ v`` via an index permutation and a sign vector, O(2**n).

    ``v`` may carry trailing columns (shape ``(2**n, k)``).
    """
    n = p.n_qubits
    dim = 1 << n
    if v.shape[0] != dim:
        raise ValueError(f"state dimension {v.shape[0]} != 2**{n}")
    x = _index_mask(p.x_mask, n)
    z = _index_mask(p.z_mask, n)
    idx = np.arange(dim, dtype=np.int64)
    src = idx ^ x
    signs = 1 - 2 * (np.bitwise_count(src & z) & 1).astype(np.int8)
    out = v[src]
    coeff = _PHASE_VALUES[p.phase_exp] * signs
    if v.ndim > 1:
        coeff = coeff.reshape((dim,) + (1,) * (v.ndim - 1))
    return coeff * out


def expectation(p: PauliString, v: np.ndarray) -> complex:
    return complex(np.vdot(v, apply_to_state(p, v)))
