# %% [markdown]
# # Teleporting a T gate through a padded qubit
# The server cannot apply T itself without learning the key, so Alice ships
# a padded |A> ancilla. One CNOT and one measurement later the data qubit
# has had A(+n) or A(-n), each with probability 1/2. A second ancilla at
# angle 2n repairs the bad case; a leftover Z goes into Alice's keys.

# %%
import numpy as np

from blindqc.frame import pauli_word
from blindqc.gadget import ancilla_pair, run_cascade
from blindqc.simcore import PureState, apply_matrix, fidelity_up_to_phase, gate_matrix

rng = np.random.default_rng(2)
v = rng.normal(size=2) + 1j * rng.normal(size=2)
psi = PureState(1, v / np.linalg.norm(v))

for n in range(8):
    x, z = rng.integers(2, size=2)
    primary, correction = ancilla_pair(n, rng)
    cipher = apply_matrix(psi, pauli_word(x, z), [0])
    out, state = run_cascade(cipher, 0, n, primary, correction, int(x), rng)
    dx, dz = out.frame_delta
    plain = apply_matrix(state, pauli_word(x ^ dx, z ^ dz).conj().T, [state.num_wires - 1])
    f = fidelity_up_to_phase(plain, apply_matrix(psi, gate_matrix("A", n), [0]))
    print(f"n={n} bits={out.reported_bits} P(1)={out.report_probs} fidelity={f:.12f}")
