# %% [markdown]
# # Hiding the CNOTs too
# Every two-qubit spot becomes a brick of layers and two CZ rounds. An
# identity brick and a CNOT brick differ only in their angles, which Bob
# never sees.

# %%
import numpy as np

from blindqc.compiler import Circuit, compile_blind, make_brick
from blindqc.engine import run_session
from blindqc.simcore import apply_all, fidelity_up_to_phase, gate, new_state

ident, cnot = make_brick("identity"), make_brick("cnot", np.random.default_rng(0))
print("same shape:", ident.shape() == cnot.shape())
print("identity brick:\n", np.round(ident.unitary() / ident.unitary()[0, 0], 6).real)
print("cnot brick:\n", np.round(cnot.unitary() / cnot.unitary()[0, 0], 6).real)

# %%
with_cnot = Circuit(2, [gate("H", 0), gate("CNOT", 0, 1)])
without = Circuit(2, [gate("A", 1, angle=3)])
a = compile_blind(with_cnot, np.random.default_rng(1), min_columns=4)
b = compile_blind(without, np.random.default_rng(2), min_columns=4)
print("announced structures equal:", a.shape() == b.shape(), "columns:", a.columns)

r = run_session(with_cnot, protocol=2, alice_seed=5, compile_options={"min_columns": 2})
print("fidelity:", fidelity_up_to_phase(r.output, apply_all(new_state(2), with_cnot.instructions)))
