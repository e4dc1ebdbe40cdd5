# %% [markdown]
# # Collusion security
#
# A coalition of l servers sees its shares masked by l key blocks. When the
# l x l coefficient matrices of those keys are invertible, the keys act as a
# one-time pad and the coalition learns nothing.

# %%
from aligned_smm import SchemeParams
from aligned_smm.security import leakage_oracle, masking_matrices, masking_matrix_check

# %%
m_a, m_b = masking_matrices([1, 2], r_A=1, r_B=1, ell=2, q=7)
print("M_A =", m_a, " M_B =", m_b)

# %%
report = masking_matrix_check(SchemeParams(10, 4), r_A=1, r_B=1)
print(report.to_json())

# %% [markdown]
# ## Brute force on a toy field
#
# Over GF(5) every key can be enumerated, so the coalition view can be
# compared across all inputs directly. A server evaluated at 0 receives A
# in the clear, which the oracle catches.

# %%
print("points 1,2,3 over GF(5), l=2:", leakage_oracle(5, 2, (1, 2, 3)))
print("points 0,2 over GF(3), l=1:  ", leakage_oracle(3, 1, (0, 2)))
