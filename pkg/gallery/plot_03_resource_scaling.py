"""
Wait&Scale and the scaling tipping point
========================================

A job with sub-linear scaling runs on ``k`` nodes during clean hours and
sleeps otherwise, finishing no later than an uninterrupted single-node run.
More nodes buy more room to dodge dirty hours but waste energy, so carbon
efficiency peaks and then falls.
"""

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from carbonflex import (
    CarbonTrace,
    ScalabilityProfile,
    ScalableJob,
    WaitAndScale,
    aggregate_family,
    energy_efficiency_at_scale,
    normalize,
    synth_trace,
    throughput_at_scale,
)

profiles = {
    "excellent (5%)": ScalabilityProfile.largest(0.05, limit=10),
    "high (10%)": ScalabilityProfile.largest(0.10, limit=10),
    "moderate (15%)": ScalabilityProfile.largest(0.15, limit=10),
}

# %%
# Throughput and per-node efficiency of each profile.
for name, prof in profiles.items():
    ks = range(1, prof.max_nodes + 1)
    print(name, [round(throughput_at_scale(prof, k), 2) for k in ks])
    print("   efficiency", [round(energy_efficiency_at_scale(prof, k), 2) for k in ks])

# %%
traces = {
    "diurnal": synth_trace(days=60, base=100, amplitude=50),
    "alternating 50/150": CarbonTrace(np.tile([50.0, 150.0], 24 * 60)),
}
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
for ax, (tname, trace) in zip(axes, traces.items()):
    for name, prof in profiles.items():
        job = ScalableJob(24, 120, prof)
        ks = list(range(1, prof.max_nodes + 1))
        normed = normalize(aggregate_family([WaitAndScale(job, k) for k in ks], trace))
        ax.plot(ks, [c for _, c in normed], marker="o", label=name)
    ax.set(title=tname, xlabel="scale factor k")
axes[0].set_ylabel("normalized carbon efficiency")
axes[1].legend()
fig.tight_layout()
fig.savefig("resource_scaling.png", dpi=120)
