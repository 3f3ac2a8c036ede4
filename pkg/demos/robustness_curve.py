"""Robust self-testing of the five-qubit subspace.

Searches for the smallest slope a that makes the operator inequality
K >= a B + b tight at maximal violation, then prints the resulting lower
bound on extractability as the violation grows. Takes about half a minute.
"""
import math
import time

import numpy as np

from subspace_selftest.bell import i5
from subspace_selftest.bounds import I5_QUANTUM, classical_bound
from subspace_selftest.robustness import AngleConfig, find_certificate, g, k_operator, product_overlap_floor, sweep_curve
from subspace_selftest.stabilizer import code_projector, five_qubit_code

expr = i5()
P = code_projector(five_qubit_code()).real
beta_c = classical_bound(expr).value

# at the ideal angles the extraction channels are unitary and K is the projector itself
print("g(pi/4) =", g(math.pi / 4))
print("||K(pi/4) - P|| =", f"{np.linalg.norm(k_operator(AngleConfig.ideal(5), P) - P):.1e}")

t = time.perf_counter()
cert = find_certificate(expr, P, I5_QUANTUM)
print(f"a = {cert.a:.3f}, b = {cert.b:.9f}, a*beta_q + b = {cert.tightness:.9f}  ({time.perf_counter() - t:.0f} s)")

floor = product_overlap_floor(P, 5)
print(f"best product-state overlap with the code space: {floor:.6f}")
print(f"{'rel. violation':>15} {'beta':>10} {'lower bound':>12}")
for row in sweep_curve(cert, beta_c, I5_QUANTUM, floor, n_points=11):
    print(f"{row.relative_violation:15.2f} {row.absolute_violation:10.5f} {max(row.lower_bound, row.trivial_floor):12.6f}")
