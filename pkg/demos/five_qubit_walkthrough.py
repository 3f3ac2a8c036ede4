"""Five-qubit code, end to end.

Builds the Bell expression and checks its classical and quantum values. Then
it hides a logical state behind random local unitaries and reads it back out.
"""
import numpy as np
from scipy.stats import unitary_group

from subspace_selftest.bell import i5
from subspace_selftest.bounds import ObservableAssignment, classical_bound, ideal_observables, quantum_value_ideal
from subspace_selftest.selftest import (
    JointState, apply_local, decompose_onto_code, extract_qubit_frame, frame_state, join_qubits,
    local_operators, stabilization_residual,
)
from subspace_selftest.stabilizer import code_basis, five_qubit_code, five_qubit_labeler

rng = np.random.default_rng(1)
expr = i5()
print(f"{expr.n_parties} parties, {len(expr.terms)} correlators")
print("classical value:", classical_bound(expr).value)
print("quantum value:  ", quantum_value_ideal(expr).value, " 4*sqrt(2)+1 =", 4 * np.sqrt(2) + 1)

group = five_qubit_code()
basis = code_basis(group, [five_qubit_labeler()]).states

# logical state cos(t)|0_L> + sin(t)|1_L>, one junk qubit per party, 2-dim environment
t = 0.3
c = np.array([np.cos(t), np.sin(t)])
aux, env = [2] * 5, 2
junk = rng.normal(size=2 ** 5 * env) + 1j * rng.normal(size=2 ** 5 * env)
junk /= np.linalg.norm(junk)
vec = join_qubits(np.outer(basis @ c, junk), aux, env)

# each party's box is the ideal qubit measurement, padded and scrambled by V_p
dims = [4] * 5
ideal = ideal_observables(5)
Vs = [unitary_group.rvs(4, random_state=rng) for _ in range(5)]
for p, V in enumerate(Vs):
    vec = apply_local(vec, dims + [env], p, V)
state = JointState(vec, tuple(dims), env)
obs = ObservableAssignment([
    tuple(V @ np.kron(ideal[p, x], np.eye(2)) @ V.conj().T for x in (0, 1)) for p, V in enumerate(Vs)
])

res = stabilization_residual(state, obs, group.generators, 0)
print("largest stabilization residual:", f"{max(res):.1e}")
frames = [extract_qubit_frame(a, b) for a, b in local_operators(obs, 0)]
dec = decompose_onto_code(frame_state(state, frames), basis)
print("recovered |c_i|:", np.round(np.abs(dec.coefficients), 10), " prepared:", np.round(c, 10))
print("weight outside the code space:", f"{dec.residual:.1e}")
