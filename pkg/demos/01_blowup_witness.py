
# coding: utf-8

# # Guarded transformation and exponential blowup

# A formula is guarded when every bound variable sits under a modality inside its own binder.
# The classic transformation (here `tau0`) gets there by unfolding and replacing unguarded occurrences.
# This notebook runs it on a small family where the output depth doubles with each new binder.

# In[1]:

from mucalc import modal_depth, render, size, tau0, classify_formula
from mucalc.bench import generate_phi


# The family shares a single disjunction node `X1 | ... | Xn`, so the input grows linearly.

# In[2]:

phi = generate_phi(3)
print(render(phi))
print("size", size(phi))


# In[3]:

out = tau0(phi)
print(render(out))


# Every `Xi` now sits under `<a>`. The classifier checks this, using the binder priorities inherited from the input.

# In[4]:

print(classify_formula(out, source=phi).level)


# # Growth

# Sizes count distinct nodes, so sharing hides nothing here. The modal depth doubles every step.

# In[5]:

print(" n  in   out   depth")
for n in range(1, 11):
    phi = generate_phi(n)
    out = tau0(phi)
    print(f"{n:2d} {size(phi):3d} {size(out):5d} {modal_depth(out):6d}")


# The output is left unsimplified on purpose: the `ff` leaves mark where unguarded variables were cut off.
