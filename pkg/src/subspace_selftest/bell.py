"""Bell expressions built from stabilizer generators.

Parties are 0-based.  On the special party ``j`` the substitution is
``X -> (A0 + A1)/sqrt2`` and ``Z -> (A0 - A1)/sqrt2``; elsewhere ``X -> A0``
and ``Z -> A1``.  Expressions are stored fully expanded as plain correlators.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString
from .stabilizer import five_qubit_generators
from .toric import ToricLattice, toric_generators

SQRT2 = math.sqrt(2.0)

# a correlator key: ((party, input), ...) sorted by party
Support = tuple[tuple[int, int], ...]


def make_support(parties, inputs) -> Support:
    pairs = sorted(zip((int(p) for p in parties), (int(x) for x in inputs)))
    if len({p for p, _ in pairs}) != len(pairs):
        raise ValueError("a party appears twice in one correlator")
    return tuple(pairs)


@dataclass(frozen=True)
class BellExpression:
    n_parties: int
    terms: tuple[tuple[float, Support], ...]
    special_party: int | None = None
    classical_bound_hint: float | None = None
    name: str = ""

    def __post_init__(self):
        seen = set()
        for coef, sup in self.terms:
            if coef == 0:
                raise ValueError("zero coefficient stored")
            if sup in seen:
                raise ValueError(f"duplicate support {sup}")
            seen.add(sup)
            for p, x in sup:
                if not 0 <= p < self.n_parties or x not in (0, 1):
                    raise ValueError(f"bad (party, input) pair {(p, x)}")

    def __len__(self):
        return len(self.terms)

    def coefficients(self) -> dict[Support, float]:
        return {sup: c for c, sup in self.terms}

    def supports(self) -> list[Support]:
        return [sup for _, sup in self.terms]

    def to_json(self) -> str:
        rows = [
            {"coef": c, "parties": [p for p, _ in sup], "inputs": [x for _, x in sup]}
            for c, sup in self.terms
        ]
        return json.dumps(rows, indent=1)

    @classmethod
    def from_json(cls, text: str, n_parties: int | None = None, **kw) -> "BellExpression":
        rows = json.loads(text)
        terms = [(float(r["coef"]), make_support(r["parties"], r["inputs"])) for r in rows]
        if n_parties is None:
            n_parties = 1 + max((p for _, s in terms for p, _ in s), default=0)
        return from_terms(n_parties, terms, **kw)


def from_terms(n_parties: int, terms, tol: float = 1e-14, **kw) -> BellExpression:
    """Merge equal supports, drop cancelled terms, keep first-seen order."""
    merged: dict[Support, float] = {}
    for coef, sup in terms:
        merged[sup] = merged.get(sup, 0.0) + coef
    kept = tuple((c, s) for s, c in merged.items() if abs(c) > tol)
    return BellExpression(n_parties, kept, **kw)


def substitute(term: PauliString, special_party: int, weight: float = 1.0) -> list[tuple[float, Support]]:
    """Expand ``weight * term`` into correlators of the binary observables."""
    if not term.is_hermitian() or term.phase_exp % 2:
        raise ValueError(f"{term} is not a real signed Pauli string")
    coef = weight * (-1.0 if term.phase_exp == 2 else 1.0)
    base: list[tuple[int, int]] = []
    split = None
    for q, letter in enumerate(term.letters):
        if letter == "I":
            continue
        if letter == "Y":
            raise ValueError(f"Y factor on qubit {q} has no substitution rule")
        if q == special_party:
            split = letter
        else:
            base.append((q, 0 if letter == "X" else 1))
    if split is None:
        return [(coef, tuple(base))]
    c = coef / SQRT2
    second = c if split == "X" else -c
    j = special_party
    return [
        (c, tuple(sorted(base + [(j, 0)]))),
        (second, tuple(sorted(base + [(j, 1)]))),
    ]


def from_stabilizers(generators, weights, special_party: int, **kw) -> BellExpression:
    n = generators[0].n_qubits
    terms = []
    for g, w in zip(generators, weights):
        terms.extend(substitute(g, special_party, w))
    return from_terms(n, terms, special_party=special_party, **kw)


I5_WEIGHTS = (SQRT2, 1.0, SQRT2, 2 * SQRT2)


def i5(special_party: int = 0) -> BellExpression:
    return from_stabilizers(
        five_qubit_generators(), I5_WEIGHTS, special_party,
        classical_bound_hint=5.0, name="I5",
    )


def toric_classical_formula(N: int) -> float:
    return N - 2 * SQRT2 * (SQRT2 - 1)


def i_tor(L: int, special_party: int = 0) -> BellExpression:
    lat = ToricLattice(L)
    if not 0 <= special_party < lat.n_qubits:
        raise ValueError(f"special party {special_party} is not an edge of the L={L} lattice")
    gens = toric_generators(L)
    return from_stabilizers(
        gens, [1.0] * len(gens), special_party,
        classical_bound_hint=toric_classical_formula(lat.n_qubits), name=f"Itor_L{L}",
    )


def stabilizer_image(term: PauliString, special_party: int) -> BellExpression:
    """The substituted operator ``S~`` as a (weight one) expression."""
    return from_terms(term.n_qubits, substitute(term, special_party), special_party=special_party)


# -- behaviours -------------------------------------------------------------

@dataclass
class Behaviour:
    n_parties: int
    values: dict[Support, float] = field(default_factory=dict)

    def __post_init__(self):
        for sup, v in self.values.items():
            if not -1 - 1e-9 <= v <= 1 + 1e-9:
                raise ValueError(f"correlator {sup} = {v} outside [-1, 1]")

    def __getitem__(self, sup: Support) -> float:
        return self.values[sup]

    def __contains__(self, sup) -> bool:
        return sup in self.values

    def is_complete(self) -> bool:
        return len(self.values) == 3 ** self.n_parties - 1

    def to_json(self) -> str:
        rows = [
            {"value": v, "parties": [p for p, _ in s], "inputs": [x for _, x in s]}
            for s, v in self.values.items()
        ]
        return json.dumps(rows, indent=1)

    @classmethod
    def from_json(cls, text: str, n_parties: int) -> "Behaviour":
        rows = json.loads(text)
        return cls(n_parties, {make_support(r["parties"], r["inputs"]): float(r["value"]) for r in rows})


def evaluate(expr: BellExpression, behaviour) -> float:
    values = behaviour.values if isinstance(behaviour, Behaviour) else behaviour
    total = 0.0
    for coef, sup in expr.terms:
        if sup not in values:
            raise KeyError(f"behaviour lacks correlator {sup}")
        total += coef * values[sup]
    return total


def deterministic_behaviour(strategy: np.ndarray, supports) -> dict[Support, float]:
    """Correlators of a deterministic strategy ``strategy[party, input] = +-1``."""
    return {sup: float(np.prod([strategy[p, x] for p, x in sup])) for sup in supports}
