"""Resolve a code spec string into generators, labelers and a Bell expression.

Accepted specs: ``five_qubit``, ``toric:L`` or a path to a JSON file::

    {"generators": ["XZZXI", ...], "labelers": ["ZZZZZ"],
     "weights": [1.41, ...], "special_party": 0, "name": "mine"}

Only ``generators`` is required.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .bell import BellExpression, from_stabilizers, i5, i_tor
from .pauli import PauliString
from .stabilizer import StabilizerGroup, five_qubit_code, five_qubit_labeler, from_generators
from .toric import ToricLattice, toric_code, toric_labelers


class SpecError(ValueError):
    pass


@dataclass
class CodeSpec:
    name: str
    group: StabilizerGroup
    labelers: list[PauliString] = field(default_factory=list)
    weights: list[float] | None = None
    kind: str = "custom"          # five_qubit | toric | custom
    L: int | None = None

    @property
    def n(self) -> int:
        return self.group.n_qubits

    def expression(self, special_party: int = 0) -> BellExpression:
        if not 0 <= special_party < self.n:
            raise SpecError(f"special party {special_party} out of range for {self.n} parties")
        if self.kind == "five_qubit":
            return i5(special_party)
        if self.kind == "toric":
            return i_tor(self.L, special_party)
        w = self.weights or [1.0] * len(self.group.generators)
        return from_stabilizers(list(self.group.generators), w, special_party, name=self.name)


def load_code(spec: str) -> CodeSpec:
    if spec == "five_qubit":
        return CodeSpec("five_qubit", five_qubit_code(), [five_qubit_labeler()], kind="five_qubit")
    m = re.fullmatch(r"toric:(\d+)", spec)
    if m:
        L = int(m.group(1))
        try:
            ToricLattice(L)
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        return CodeSpec(spec, toric_code(L), toric_labelers(L), kind="toric", L=L)
    path = Path(spec)
    if not path.is_file():
        raise SpecError(f"unknown code spec {spec!r} (expected five_qubit, toric:L or a JSON file)")
    try:
        data = json.loads(path.read_text())
        gens = [PauliString.from_label(s) for s in data["generators"]]
        labelers = [PauliString.from_label(s) for s in data.get("labelers", [])]
        group = from_generators(gens)
    except (KeyError, TypeError, json.JSONDecodeError, ValueError) as exc:
        raise SpecError(f"{spec}: {exc}") from exc
    weights = data.get("weights")
    if weights is not None and len(weights) != len(gens):
        raise SpecError("weights and generators differ in length")
    return CodeSpec(data.get("name", path.stem), group, labelers, weights)
