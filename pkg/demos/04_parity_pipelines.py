
# coding: utf-8

# # Parity games through the mu-calculus

# A parity game can be solved by compiling it into a formula on a one-state system.
# Two pipelines do this: one goes through guarded transformation, the other through unraveling.
# Both are exponential, and they are checked against Zielonka's algorithm.

# In[1]:

from mucalc import (ParityGame, expand_lower_pipeline, gt_lower_pipeline, random_game,
                    render, size, solve_zielonka, walukiewicz_formula)


# Max parity: player 0 wins a play when the highest priority seen infinitely often is even.

# In[2]:

g = ParityGame(owner=[0, 1, 0, 0], prio=[1, 2, 1, 2],
               edges=[(0, 1), (0, 3), (1, 0), (1, 2), (2, 2), (3, 3)])
w0, w1 = solve_zielonka(g)
print("player 0 wins", [v for v in range(4) if w0 >> v & 1])
print("player 1 wins", [v for v in range(4) if w1 >> v & 1])


# The Walukiewicz formula describes the winning region for d priorities. Its size is linear in d.

# In[3]:

print(render(walukiewicz_formula(2)))
print([size(walukiewicz_formula(d)) for d in range(8)])


# In[4]:

trace = {}
print(gt_lower_pipeline(g, trace=trace), expand_lower_pipeline(g))
for k, v in trace.items():
    print(k, v)


# In[5]:

agree = 0
for seed in range(20):
    g = random_game(seed, max_vertices=4, max_prio=3)
    want = 0 if solve_zielonka(g)[0] >> g.init & 1 else 1
    agree += gt_lower_pipeline(g) == want == expand_lower_pipeline(g)
print(agree, "of 20 agree")
