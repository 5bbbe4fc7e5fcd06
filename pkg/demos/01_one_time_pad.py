# %% [markdown]
# # Hiding qubits with a one-time pad
# Each qubit gets X^a Z^b with two fresh key bits. Averaged over the keys,
# any product state looks like the maximally mixed state.

# %%
import numpy as np

from blindqc.audit import qotp_mixture
from blindqc.frame import KeyFrame, decrypt, encrypt, update_for_gate
from blindqc.simcore import PureState, apply, fidelity_up_to_phase, gate, kron_all

rng = np.random.default_rng(7)
states = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(3)]
states = [s / np.linalg.norm(s) for s in states]

rho = qotp_mixture(states)
print("max deviation from I/8:", np.abs(rho - np.eye(8) / 8).max())
print("without the pad:       ", np.abs(qotp_mixture(states, encrypt=False) - np.eye(8) / 8).max())

# %% [markdown]
# Clifford gates run directly on the padded state; Alice only rewrites
# her keys. Here H swaps the bits and CNOT spreads them.

# %%
psi = PureState(3, kron_all([s.reshape(2, 1) for s in states]).reshape(-1))
frame = KeyFrame.random(3, rng)
cipher = encrypt(psi, frame)
for g in (gate("H", 0), gate("CNOT", 0, 2), gate("X", 1)):
    cipher = apply(cipher, g)
    frame, _ = update_for_gate(frame, g)
    psi = apply(psi, g)
print("fidelity with the plain run:", fidelity_up_to_phase(decrypt(cipher, frame), psi))
