"""Recognizing where an agent is heading on the SimpleCrossing grid.

Graql keeps one Q-table per candidate goal. Given a few observed
(state, action) pairs, it asks which goal's softmax policy the observed
actions resemble most, measured by KL divergence.

Run:  python demos/01_grid_recognition.py
"""

# %%
import os

from odgr.agents import QLEARNING, obtain_policy
from odgr.envs import make_env, render_ascii
from odgr.recognizers import Graql
from odgr.traces import generate_observation, truncate_by_observability

CACHE = os.environ.get("ODGR_CACHE", "cache")
ENV = "MiniGrid-SimpleCrossingS13N4"
GOALS = [(11, 1), (11, 11), (1, 11)]

# %% [markdown]
# The grid is 13x13 with a border wall and two interior walls, each pierced
# by a door. The agent always starts in the top-left corner facing east.

# %%
print(render_ascii(make_env(ENV, goal=GOALS[1])))

# %% [markdown]
# Goal adaptation trains (or loads from the cache) one policy per goal. A
# Q-learning budget of 100k steps takes about half a second per goal.

# %%
graql = Graql(env_name=ENV, cache_root=CACHE)
graql.goals_adaptation_phase(GOALS, [(QLEARNING, 100_000)])
print(graql)

# %% [markdown]
# The actor is trained separately with its own seed, then rolled out with
# amplified Boltzmann sampling and occasional random actions, so its path
# is not the textbook shortest one.

# %%
actor = obtain_policy(ENV, (11, 11), (QLEARNING, 100_000), seed=1000, cache_root=CACHE)
trace = generate_observation(actor, seed=7)
print(f"full trace: {len(trace)} steps")
print(render_ascii(make_env(ENV, goal=(11, 11)), trace))

# %% [markdown]
# How quickly does the right answer emerge? Score prefixes of growing length.

# %%
for level in (0.1, 0.3, 0.5, 0.7, 1.0):
    seen = truncate_by_observability(trace, level, "consecutive")
    res = graql.inference_phase(seen, (11, 11), level)
    scores = "  ".join(f"{g}: {s:7.3f}" for g, s in res.scores.items())
    print(f"observed {level:4.0%} ({len(seen):3d} steps) -> {res.predicted_goal}   [{scores}]")

# %% [markdown]
# Early on, all three goals share the path through the first door, so the
# scores sit close together. Once the actor commits to a corridor the gap
# opens up.
