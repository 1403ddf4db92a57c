
# coding: utf-8

# # Removing epsilon edges from an equation system

# In automaton normal form every modality is applied to a single variable, like a transition of an alternating automaton.
# Unguarded references between variables play the role of epsilon transitions. `epsilon_eliminate` removes them.

# In[1]:

from mucalc import (EpsStats, check_equiv, classify_guardedness, epsilon_eliminate,
                    formula_to_hes, normalize_automaton_form, parse, render)


# In[2]:

phi = parse("mu X.q | (mu Y.(q & X) | (~q & Y) | <a>Y)")
h = normalize_automaton_form(formula_to_hes(phi))
for i, b in enumerate(h.blocks):
    for x, e in b.eqs.items():
        print(i, b.qual, x, "=", render(e))
print(classify_guardedness(h).level)


# Right-hand sides are kept in disjunctive normal form over literals and modal atoms. Self references are solved by Kleene iteration. Other references are substituted away, with copies `X'i` remembering the most significant block passed.

# In[3]:

stats = EpsStats()
out = epsilon_eliminate(h, stats=stats)
for i, b in enumerate(out.blocks):
    for x, e in b.eqs.items():
        print(i, b.qual, x, "=", render(e))


# In[4]:

print(classify_guardedness(out).level)
print("lattice height", stats.lattice_height, "kleene steps", stats.kleene_steps)
print(check_equiv(h, out))


# In[5]:

from mucalc import random_hes

for seed in range(5):
    h = random_hes(seed, blocks=2, n_vars=4, props=("p", "q"), actions=("a", "b"),
                   automaton_normal=True)
    out = epsilon_eliminate(h)
    print(seed, len(h), "->", len(out), classify_guardedness(out).level, bool(check_equiv(h, out)))
