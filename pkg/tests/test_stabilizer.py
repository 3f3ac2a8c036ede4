import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subspace_selftest.pauli import PauliString, anticommute_on, apply_to_state, commutes, product, to_dense
from subspace_selftest.stabilizer import (
    StabilizerError,
    bipartition_masks,
    code_basis,
    code_projector,
    five_qubit_code,
    five_qubit_labeler,
    from_generators,
    gme_certificate_exhaustive,
    verify_certificate,
)
from subspace_selftest.toric import (
    ToricLattice,
    toric_code,
    toric_generators,
    toric_gme_witness,
    toric_labelers,
)


def test_five_qubit_group():
    g = five_qubit_code()
    assert (g.rank, g.code_dimension, g.order) == (4, 2, 16)


def test_toric_l2_group():
    g = toric_code(2)
    assert len(g.generators) == 8
    assert (g.rank, g.code_dimension) == (6, 4)


def test_single_generator():
    g = from_generators(["XX"])
    assert (g.rank, g.code_dimension) == (1, 2)


def test_rejects_bad_generators():
    with pytest.raises(StabilizerError, match="0 and 1"):
        from_generators(["XI", "ZI"])
    with pytest.raises(StabilizerError):
        from_generators(["XX", "ZZ", "YY"])  # XX.ZZ = -YY, so YY closes to -1
    with pytest.raises(StabilizerError):
        from_generators(["+iXX"])
    with pytest.raises(StabilizerError):
        from_generators(["-II"])


def test_minus_identity_dependency_matches_dense():
    # dense check of the sign: (X(x)X)(Z(x)Z) = -(Y(x)Y)
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    Y = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(np.kron(X, X) @ np.kron(Z, Z), -np.kron(Y, Y))
    g = from_generators(["XX", "ZZ", "-YY"])
    assert g.rank == 2 and g.independent == (0, 1)
    P = product([PauliString.from_label(s) for s in ["XX", "ZZ", "-YY"]])
    assert P.is_identity()


@pytest.mark.parametrize("L", [2, 3, 4])
def test_toric_generators_structure(L):
    gens = toric_generators(L)
    n = 2 * L * L
    assert all(g.n_qubits == n and g.weight == 4 for g in gens)
    assert all(commutes(a, b) for a, b in itertools.combinations(gens, 2))
    vert = product(gens[: L * L])
    plaq = product(gens[L * L:])
    assert vert.is_identity() and plaq.is_identity()
    assert toric_code(L).rank == 2 * L * L - 2


def test_toric_lattice_errors():
    with pytest.raises(ValueError):
        ToricLattice(1)


@pytest.mark.parametrize("group", [five_qubit_code(), toric_code(2)], ids=["five", "toric2"])
def test_projector_properties(group):
    P = code_projector(group)
    assert np.linalg.norm(P @ P - P) < 1e-12
    assert np.linalg.norm(P - P.conj().T) < 1e-12
    assert abs(np.trace(P) - group.code_dimension) < 1e-12
    for g in group.generators:
        assert np.linalg.norm(to_dense(g) @ P - P) < 1e-12


def test_empty_projector():
    P = code_projector(from_generators([], n_qubits=3))
    assert np.array_equal(P, np.eye(8))


def test_five_qubit_basis():
    b = code_basis(five_qubit_code(), [five_qubit_labeler()])
    S = b.states
    assert S.shape == (32, 2)
    assert np.linalg.norm(S.conj().T @ S - np.eye(2)) < 1e-12
    assert b.labels == [(-1,), (1,)]
    Z5 = five_qubit_labeler()
    for k, (lab,) in enumerate(b.labels):
        assert np.linalg.norm(apply_to_state(Z5, S[:, k]) - lab * S[:, k]) < 1e-12
        for g in five_qubit_code().generators:
            assert np.linalg.norm(apply_to_state(g, S[:, k]) - S[:, k]) < 1e-12


def test_toric_basis_labels():
    b = code_basis(toric_code(2), toric_labelers(2))
    assert b.labels == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    S = b.states
    assert np.linalg.norm(S.conj().T @ S - np.eye(4)) < 1e-12
    for k, lab in enumerate(b.labels):
        for L_op, s in zip(toric_labelers(2), lab):
            assert np.linalg.norm(apply_to_state(L_op, S[:, k]) - s * S[:, k]) < 1e-12
        for g in toric_code(2).generators:
            assert np.linalg.norm(apply_to_state(g, S[:, k]) - S[:, k]) < 1e-12


def test_labeler_errors():
    with pytest.raises(StabilizerError):
        code_basis(five_qubit_code(), ["XIIII"])          # anticommutes with S4
    with pytest.raises(StabilizerError):
        code_basis(five_qubit_code(), ["XZZXI"])          # already in the group


def test_gme_five_qubit():
    c = gme_certificate_exhaustive(five_qubit_code())
    assert (c.n_bipartitions, c.n_witnessed) == (15, 15)
    assert c.verdict == "genuinely entangled"
    assert verify_certificate(five_qubit_code(), c)


def test_gme_toric_two():
    g = toric_code(2)
    c = gme_certificate_exhaustive(g)
    assert (c.n_bipartitions, c.n_witnessed) == (127, 127)
    gens = g.generators
    for mask in c.witnesses:
        v, p = toric_gme_witness(2, mask)
        assert anticommute_on(gens[v], gens[p], mask)


def test_gme_single_generator_inconclusive():
    c = gme_certificate_exhaustive(from_generators(["XI"]))
    assert c.n_bipartitions == 1
    assert c.inconclusive() == [1] and c.verdict == "inconclusive"


def test_bipartition_masks_canonical():
    m = bipartition_masks(4).tolist()
    assert len(m) == 7 and all(x & 1 for x in m) and m == sorted(m) and 15 not in m


def test_toric_witness_single_vertical_qubit():
    lat = ToricLattice(2)
    nb = lat.neighbours(0)
    assert toric_gme_witness(2, {0}) == (nb["v_up"], nb["p_right"])


def test_toric_witness_rejects_trivial_side():
    with pytest.raises(ValueError):
        toric_gme_witness(2, 0)
    with pytest.raises(ValueError):
        toric_gme_witness(2, range(8))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, (1 << 18) - 2))
def test_toric_l3_random_bipartitions(mask):
    v, p = toric_gme_witness(3, mask)
    gens = toric_generators(3)
    full = (1 << 18) - 1
    assert anticommute_on(gens[v], gens[p], mask)
    assert anticommute_on(gens[v], gens[p], full & ~mask)
