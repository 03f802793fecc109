"""
Carbon-aware DVFS
=================

The job never stops; it runs at one frequency while the grid is cleaner than
its mean over the job's nominal duration and at another frequency otherwise.
We evaluate every frequency pair on the reference server.
"""

# %%
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from carbonflex import (
    E5_2620V4,
    DvfsJob,
    dvfs_starts,
    energy_per_work,
    most_efficient_frequency,
    normalize,
    sweep_dvfs,
    synth_trace,
)

server = E5_2620V4
levels = np.array(server.levels)

# %%
# Energy per unit of work relative to full speed. IO-heavy jobs lose little
# throughput at low clocks, so they gain the most.
fig, ax = plt.subplots(figsize=(5, 3.5))
for io in (0.0, 0.4, 0.7):
    epw = np.array([energy_per_work(server, io, f) for f in levels])
    ax.plot(levels, epw[-1] / epw, marker=".", label=f"io={io:.0%}")
    print(f"io={io}: most efficient at {most_efficient_frequency(server, io):g} MHz")
ax.set(xlabel="frequency (MHz)", ylabel="normalized energy efficiency")
ax.legend()
fig.tight_layout()
fig.savefig("dvfs_energy_efficiency.png", dpi=120)

# %%
# The full grid on a 60-day diurnal trace, for CPU-bound and IO-bound jobs.
trace = synth_trace(days=60, base=100, amplitude=50)
fig, axes = plt.subplots(2, 2, figsize=(9, 8))
for row, io in zip(axes, (0.0, 0.7)):
    job = DvfsJob(24, io, server)
    cells = sweep_dvfs(job, trace, list(dvfs_starts(job, trace)))
    normed = np.array(normalize([c.aggregate for c in cells])).reshape(len(levels), len(levels), 2)
    best = max(cells, key=lambda c: c.aggregate.carbon_efficiency)
    print(f"io={io}: carbon-optimal pair {best.f_low_carbon:g}/{best.f_high_carbon:g} MHz")
    for ax, k, label in zip(row, (1, 0), ("carbon", "energy")):
        im = ax.imshow(normed[:, :, k], origin="lower", cmap="viridis")
        ax.set_xticks(range(0, len(levels), 3), levels[::3].astype(int))
        ax.set_yticks(range(0, len(levels), 3), levels[::3].astype(int))
        ax.set(title=f"io={io:.0%} {label} efficiency", xlabel="F2 (high carbon)",
               ylabel="F1 (low carbon)")
        fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig("dvfs_grid.png", dpi=120)
