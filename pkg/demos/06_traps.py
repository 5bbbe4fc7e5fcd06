# %% [markdown]
# # Catching a cheating server with trap wires
# Trap wires start in |0> or |+> and carry no work. A server that hits one
# random wire with a Pauli Y gets caught at rate N_d/N per run.

# %%
from blindqc.compiler import Circuit
from blindqc.simcore import gate
from blindqc.verify import detection_rate, formula_rate

for N, N_d, s in ((5, 1, 1), (10, 2, 1), (10, 2, 3)):
    c = Circuit(N - N_d, [gate("H", 0)])
    est = detection_rate(c, N, N_d, s, "single_random_wire", trials=2000, seed=N + s)
    print(f"N={N:2d} N_d={N_d} s={s}: observed {est.rate:.3f}, predicted {formula_rate(N, N_d, s):.3f}, z={est.z:+.2f}")

honest = detection_rate(Circuit(4, [gate("H", 0)]), 5, 1, 1, "none", trials=300)
print("honest server alarms:", honest.detections)
