# %% [markdown]
# # Rotation axes of T-like words and single-qubit approximation
# Words of four gates alternating T-like phases and H give rotations about
# eight irrational axes. Together they approximate any single-qubit gate.

# %%
import numpy as np

from blindqc.compiler import approximate_single_qubit, axis_alignment, axis_table

for row in axis_table():
    print(" ".join(row["word"]).ljust(18), np.round(row["axis"], 4), f"match={row['match']:.12f}")

print("TdgHTdgH vs HTHT:", axis_alignment(("Tdg", "H", "Tdg", "H"), ("H", "T", "H", "T")))

# %% [markdown]
# A random unitary gets closer as the depth budget grows.

# %%
rng = np.random.default_rng(3)
m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
target, _ = np.linalg.qr(m)
for depth in (4, 8, 12):
    approx = approximate_single_qubit(target, depth, beam_width=20000)
    print(f"depth {depth:2d}: distance {approx.distance:.4f} with {len(approx.word)} gates")
