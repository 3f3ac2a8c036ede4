"""Code-basis states as points in correlation space.

Every logical state reaches the quantum maximum, so the codewords all lie on
one face of the quantum set. This script measures the affine dimension of
that face and shows which operators tell the codewords apart.
"""
import numpy as np

from subspace_selftest.bell import i_tor, stabilizer_image
from subspace_selftest.bounds import ideal_observables
from subspace_selftest.geometry import (
    behaviour_of, face_dimension, loop_expectations, subfamily_point, toric_subfamily,
)
from subspace_selftest.stabilizer import code_basis, five_qubit_code, five_qubit_labeler
from subspace_selftest.toric import toric_code, toric_labelers

# five-qubit code: two codewords, told apart by the substituted logical Z
basis = code_basis(five_qubit_code(), [five_qubit_labeler()])
pts = [behaviour_of(basis[i], ideal_observables(5)) for i in range(2)]
rep = face_dimension(pts)
zbar = stabilizer_image(five_qubit_labeler(), 0)
print(f"five-qubit code: {len(pts[0].keys)} correlators, face dimension {rep.dimension}")
print("  substituted ZZZZZ on each codeword:", [round(p.evaluate(zbar), 12) for p in pts])

# toric code, L = 2: four codewords, labelled by two Z loops
L = 2
basis = code_basis(toric_code(L), toric_labelers(L))
pts = [behaviour_of(basis[i], ideal_observables(8)) for i in range(4)]
rep = face_dimension(pts)
print(f"toric L=2: {len(pts[0].keys)} correlators, face dimension {rep.dimension}, "
      f"singular values {np.round(rep.singular_values, 3).tolist()}")

# the same question using only the Bell-expression and loop correlators
keys = toric_subfamily(i_tor(L), L)
sub = [subfamily_point(basis[i], keys, 0) for i in range(4)]
rep = face_dimension(sub)
print(f"  loop sub-family ({len(keys)} correlators): dimension >= {rep.dimension}")
for i, p in enumerate(sub):
    loops = loop_expectations(p, L)
    print(f"  codeword {i}: " + ", ".join(f"{k} {v:+.0f}" for k, v in loops.items()))
