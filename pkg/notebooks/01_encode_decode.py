# %% [markdown]
# # Encoding, server work and decoding
#
# Split A into row blocks and B into column blocks, hide both behind
# random keys, hand one evaluation of each share polynomial to every
# server, and rebuild AB from any Q answers.

# %%
import numpy as np

from aligned_smm import FieldMatrix, Partition, SchemeParams, decode, encode, server_compute
from aligned_smm.codec import build_exponent_map

# %% [markdown]
# ## Where each product term lands
#
# With r_A = 2, r_B = 2 and one colluding server, Q = (2+1)(2+1) - 1 = 8.
# Four exponents carry the desired blocks A_j B_j'; the other four soak up
# every key-dependent term.

# %%
emap = build_exponent_map(2, 2, 1)
print("Q =", emap.Q)
for e in range(emap.Q):
    if e in emap.desired:
        print(e, "desired", emap.desired[e])
    else:
        print(e, "interference", sorted(emap.interference[e]))

# %% [markdown]
# ## A full round trip with two stragglers

# %%
params = SchemeParams(N=10, ell=1)
part = Partition(2, 2)
rng = np.random.default_rng(0)
A = FieldMatrix.random(4, 5, rng=rng)
B = FieldMatrix.random(5, 6, rng=rng)

shares = encode(A, B, part, params, seed=1)
answers = [server_compute(s) for s in shares]
late = {3, 8}
on_time = [a for a in answers if a.server_index not in late]
C = decode(on_time, part, params, A.rows, B.cols)
print("decoded matches A @ B:", C == A @ B)

# %% [markdown]
# Any other set of Q answers gives the same product.

# %%
print(decode(answers[2:], part, params, 4, 6) == C)
