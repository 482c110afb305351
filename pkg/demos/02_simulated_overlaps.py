# coding: utf-8

# # Overlapping communities in a simulated network
#
# Draw a degree-corrected overlapping network, then recover memberships with
# both fitting algorithms.

# In[1]:

from specc import nvi
from specc.metrics import overlap_count
from specc.selection import select_lambda
from specc.simulate import ScenarioSpec, build_scenario, sample_adjacency

params = build_scenario(ScenarioSpec(n=500, K=3, overlap_fraction=0.1, rho=0.1, target_degree=50, seed=7))
g = sample_adjacency(params, seed=7)
print("alpha =", round(params.alpha, 5), " mean degree =", 2 * g.n_edges / g.n)
print("true overlapping nodes:", overlap_count(params.Z))


# In[2]:

for algo in ("eig", "cd"):
    lam, path = select_lambda(g, 3, criterion="bic", fit=algo)
    b = path.best().basis
    print(f"{algo}: lambda={lam:.2f} overlaps={b.overlap_count} NVI={nvi(b, params.Z):.4f}")


# Mixing between communities makes things harder

# In[3]:

for rho in (0.0, 0.2, 0.4):
    p = build_scenario(ScenarioSpec(n=500, K=3, overlap_fraction=0.1, rho=rho, seed=1))
    a = sample_adjacency(p, seed=1)
    _, path = select_lambda(a, 3, criterion="bic", fit="cd")
    print(f"rho={rho}: NVI={nvi(path.best().basis, p.Z):.4f}")
