# %% [markdown]
# # A full session where the server learns only size and CNOT positions
# Alice pads her inputs, announces a slot list and reacts to each reported
# bit. Bob only ever runs H, CNOT and measurements.

# %%
import numpy as np

from blindqc.audit import session_laws
from blindqc.compiler import Circuit
from blindqc.engine import run_session
from blindqc.simcore import apply_all, fidelity_up_to_phase, gate, new_state

circuit = Circuit(2, [gate("H", 0), gate("A", 0, angle=1), gate("CNOT", 0, 1), gate("S", 1)])
result = run_session(circuit, protocol=1, alice_seed=11, bob_seed=12)

print("fidelity:", fidelity_up_to_phase(result.output, apply_all(new_state(2), circuit.instructions)))
print("Bob ran:", sorted(set(result.bob.executed)))
print("transcript bits:", result.transcript.bits())
print("every bit had P(1) = 1/2:", np.allclose(session_laws(result), 0.5, atol=1e-12))
for line in result.transcript.lines()[:6]:
    print("  ", line[:100])
