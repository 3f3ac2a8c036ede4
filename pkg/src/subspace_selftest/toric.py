"""Toric code on an L x L periodic lattice.

Qubit labelling: row ``r`` holds vertical edges ``2Lr .. 2Lr+L-1`` followed by
horizontal edges ``2Lr+L .. 2Lr+2L-1``.  Vertical edge ``V(r, c)`` runs from
vertex ``u(r-1, c)`` up to vertex ``u(r, c)``; horizontal edge ``H(r, c)``
leaves ``u(r, c)`` to the right.  So ``H(r, c)`` sits at the top-right of
``V(r, c)`` and ``V(r+1, c)`` sits on top of it.

Vertex ``u(r, c)`` touches ``V(r, c)`` (down), ``V(r+1, c)`` (up),
``H(r, c)`` (right) and ``H(r, c-1)`` (left).  Plaquette ``p(r, c)`` is the
face to the right of ``V(r, c)``: edges ``V(r, c)``, ``V(r, c+1)``,
``H(r, c)`` (top) and ``H(r-1, c)`` (bottom).

Generator list order: the ``L**2`` vertex operators (index ``r*L + c``) then
the ``L**2`` plaquette operators (index ``L**2 + r*L + c``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

from .pauli import PauliString, anticommute_on, as_mask
from .stabilizer import StabilizerGroup, from_generators


@dataclass(frozen=True)
class ToricLattice:
    L: int

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("toric lattice needs L >= 2")

    @property
    def n_qubits(self) -> int:
        return 2 * self.L * self.L

    # -- edges ----------------------------------------------------------
    def V(self, r: int, c: int) -> int:
        L = self.L
        return 2 * L * (r % L) + (c % L)

    def H(self, r: int, c: int) -> int:
        L = self.L
        return 2 * L * (r % L) + L + (c % L)

    def is_vertical(self, q: int) -> bool:
        return q % (2 * self.L) < self.L

    def coords(self, q: int) -> tuple[int, int]:
        L = self.L
        return q // (2 * L), q % L

    # -- cells ----------------------------------------------------------
    def vertex_index(self, r: int, c: int) -> int:
        return (r % self.L) * self.L + (c % self.L)

    def plaquette_index(self, r: int, c: int) -> int:
        return self.L * self.L + (r % self.L) * self.L + (c % self.L)

    def vertex_edges(self, r: int, c: int) -> tuple[int, int, int, int]:
        """(up, right, down, left) -- cyclic order around the vertex."""
        return self.V(r + 1, c), self.H(r, c), self.V(r, c), self.H(r, c - 1)

    def plaquette_edges(self, r: int, c: int) -> tuple[int, int, int, int]:
        """(left, top, right, bottom)."""
        return self.V(r, c), self.H(r, c), self.V(r, c + 1), self.H(r - 1, c)

    @cached_property
    def cells(self) -> list[tuple[int, ...]]:
        L = self.L
        out = [self.vertex_edges(r, c) for r in range(L) for c in range(L)]
        out += [self.plaquette_edges(r, c) for r in range(L) for c in range(L)]
        return out

    # -- operators touching a qubit (arrow notation) ---------------------
    def neighbours(self, q: int) -> dict[str, int]:
        """Generator indices of the two vertices and two plaquettes on qubit ``q``.

        Vertical qubit: keys ``v_up, v_down, p_right, p_left``.
        Horizontal qubit: keys ``v_left, v_right, p_up, p_down``.
        """
        r, c = self.coords(q)
        if self.is_vertical(q):
            return {
                "v_up": self.vertex_index(r, c),
                "v_down": self.vertex_index(r - 1, c),
                "p_right": self.plaquette_index(r, c),
                "p_left": self.plaquette_index(r, c - 1),
            }
        return {
            "v_left": self.vertex_index(r, c),
            "v_right": self.vertex_index(r, c + 1),
            "p_up": self.plaquette_index(r + 1, c),
            "p_down": self.plaquette_index(r, c),
        }

    def plaquettes_at_vertex(self, v: int) -> list[int]:
        """The four plaquettes around vertex ``v``, each sharing two of its edges."""
        r, c = divmod(v, self.L)
        return [
            self.plaquette_index(r, c),
            self.plaquette_index(r, c - 1),
            self.plaquette_index(r + 1, c),
            self.plaquette_index(r + 1, c - 1),
        ]

    # -- loops ------------------------------------------------------------
    def horizontal_loop(self, r: int = 0) -> tuple[int, ...]:
        """Horizontal edges of row ``r``: a non-contractible Z cycle."""
        return tuple(self.H(r, c) for c in range(self.L))

    def vertical_loop(self, c: int = 0) -> tuple[int, ...]:
        """Vertical edges of column ``c``."""
        return tuple(self.V(r, c) for r in range(self.L))


def toric_generators(L: int) -> list[PauliString]:
    return list(_toric_generators(L))


@lru_cache(maxsize=None)
def _toric_generators(L: int) -> tuple[PauliString, ...]:
    lat = ToricLattice(L)
    n = lat.n_qubits
    gens = []
    for k, edges in enumerate(lat.cells):
        letter = "X" if k < L * L else "Z"
        gens.append(PauliString.from_sparse(n, {q: letter for q in edges}))
    return tuple(gens)


def toric_code(L: int) -> StabilizerGroup:
    return from_generators(toric_generators(L))


def loop_operator(lattice: ToricLattice, edges) -> PauliString:
    return PauliString.from_sparse(lattice.n_qubits, {q: "Z" for q in edges})


def toric_labelers(L: int) -> list[PauliString]:
    lat = ToricLattice(L)
    return [loop_operator(lat, lat.horizontal_loop(0)), loop_operator(lat, lat.vertical_loop(0))]


@lru_cache(maxsize=None)
def _lattice(L: int) -> ToricLattice:
    return ToricLattice(L)


def toric_gme_witness(L: int, subset) -> tuple[int, int]:
    """Constructive (vertex, plaquette) pair anticommuting on ``subset``.

    Walk the qubits of ``G`` until one of their vertices is divided between
    ``G`` and its complement, then take a plaquette whose corner at that
    vertex holds exactly one ``G`` qubit: restricted to ``G`` the two
    operators overlap on a single site with X against Z.
    """
    lat = _lattice(L)
    n = lat.n_qubits
    g = as_mask(subset)
    full = (1 << n) - 1
    if g == 0 or g == full:
        raise ValueError("bipartition side must be nonempty and proper")
    gens = _toric_generators(L)

    for q in range(n):
        if not (g >> q) & 1:
            continue
        nb = lat.neighbours(q)
        if lat.is_vertical(q):
            vertices = (nb["v_up"], nb["v_down"])
            own_plaquettes = (nb["p_right"], nb["p_left"])
        else:
            vertices = (nb["v_left"], nb["v_right"])
            own_plaquettes = (nb["p_up"], nb["p_down"])
        for v in vertices:
            vmask = as_mask(lat.cells[v])
            inside = vmask & g
            if inside == 0 or inside == vmask:
                continue
            order = list(own_plaquettes) + [
                p for p in lat.plaquettes_at_vertex(v) if p not in own_plaquettes
            ]
            for p in order:
                corner = vmask & as_mask(lat.cells[p])
                if corner and bin(corner & g).count("1") == 1:
                    if anticommute_on(gens[v], gens[p], g):
                        return v, p
    raise AssertionError("no divided vertex found")  # unreachable for proper bipartitions
