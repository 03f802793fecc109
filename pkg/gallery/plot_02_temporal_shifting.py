"""
Suspend-resume under growing slack
==================================

A 24 h job is allowed to finish within ``slack * 24`` hours. It runs in the
cleanest slots of that window and pays a checkpoint and a restore each time it
pauses. We sweep the slack for three overhead sizes and average over every
start hour of a 60-day trace.
"""

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from carbonflex import (
    CheckpointableJob,
    SuspendResume,
    aggregate_family,
    normalize,
    plan_suspend_resume,
    synth_trace,
)

trace = synth_trace(days=60, base=100, amplitude=50)
slacks = [1.0, 1.5, 2.0, 2.5, 3.0]
overheads = {"low (5 min)": 5, "medium (10 min)": 10, "high (15 min)": 15}

# %%
# One schedule up close: with slack 2 the job splits into segments around
# the daily trough.
sched = plan_suspend_resume(CheckpointableJob(24, 120, 10, 10, 2.0), trace, start=6)
print("segments:", sched.segments())
print("overheads:", [(e.slot, e.kind) for e in sched.overhead_events])

# %%
# All configurations share the same start hours so their means compare.
labels, policies = [], []
for name, minutes in overheads.items():
    for s in slacks:
        labels.append((name, s))
        policies.append(SuspendResume(CheckpointableJob(24, 120, minutes, minutes, s)))
aggs = aggregate_family(policies, trace)
normed = dict(zip(labels, normalize(aggs)))

fig, (ax_c, ax_e) = plt.subplots(1, 2, figsize=(9, 3.5))
for name in overheads:
    ax_c.plot(slacks, [normed[name, s][1] for s in slacks], marker="o", label=name)
    ax_e.plot(slacks, [normed[name, s][0] for s in slacks], marker="o", label=name)
ax_c.set(xlabel="slack factor", ylabel="normalized carbon efficiency")
ax_e.set(xlabel="slack factor", ylabel="normalized energy efficiency")
ax_e.legend()
fig.tight_layout()
fig.savefig("temporal_shifting.png", dpi=120)

for name in overheads:
    print(name, [f"{normed[name, s][1]:.3f}/{normed[name, s][0]:.4f}" for s in slacks])
