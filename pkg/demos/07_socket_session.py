# %% [markdown]
# # The same session over a socket
# Messages travel as JSON lines. With equal seeds the socket run and the
# in-process run produce the same transcript byte for byte.

# %%
import numpy as np

from blindqc.compiler import random_circuit
from blindqc.engine import run_session

c = random_circuit(3, 8, np.random.default_rng(4))
local = run_session(c, 2, alice_seed=1, bob_seed=2)
remote = run_session(c, 2, alice_seed=1, bob_seed=2, transport="socket")
print("transcripts equal:", local.transcript.lines() == remote.transcript.lines())
print("outputs equal:", np.array_equal(local.output.amplitudes, remote.output.amplitudes))
print("messages:", len(local.transcript.lines()))
