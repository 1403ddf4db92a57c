
# coding: utf-8

# # Formulas, equation systems and unraveling

# An equation system (HES) lists fixpoint equations in blocks, outermost first.
# Turning a formula into one is linear. Turning a system back into a flat formula can blow up.

# In[1]:

from mucalc import (EqBlock, HES, check_equiv, formula_to_hes, parse, render, size,
                    unravel_hes, classify_guardedness)


# In[2]:

phi = parse("mu X.[a]ff & [b]ff & [c]ff | <a>(mu Y.<b>(Y | X)) | mu Z.<a>X | <c>Z")
h = formula_to_hes(phi)
for i, b in enumerate(h.blocks):
    for x, e in b.eqs.items():
        print(i, b.qual, x, "=", render(e))


# The same property written as one vectorial block, with three mutually recursive equations:

# In[3]:

vec = HES([EqBlock("mu", {
    "X": parse("[a]ff & [b]ff & [c]ff | <a>Y | Z"),
    "Y": parse("<b>(Y | X)"),
    "Z": parse("<a>X | <c>Z"),
})], "X")
flat = unravel_hes(vec)
print(render(flat))
print(check_equiv(flat, phi))


# `check_equiv` samples random LTSs. A pass is evidence only. A failure comes with a replayed counterexample.

# # Guardedness of systems

# Edges of the guardedness graph are unguarded when no modality separates a variable from its use.

# In[4]:

loose = HES([EqBlock("mu", {"X": parse("p | Y"), "Y": parse("<a>X | X")})], "X")
r = classify_guardedness(loose)
print(r.level)
for occ in r.offending():
    print(occ)


# # Blowup of unraveling

# Each of n equations may reference all the others, and unraveling copies sub-systems along every path.

# In[5]:

for n in range(1, 7):
    names = [f"X{i}" for i in range(n)]
    body = " | ".join(f"<a>{y}" for y in names)
    h = HES([EqBlock("mu", {x: parse(body) for x in names})], "X0")
    print(n, h.size(), size(unravel_hes(h)), 2 ** (n - 1) * h.max_equation_size())
