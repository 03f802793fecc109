"""
Carbon-intensity traces
=======================

Load a trace from CSV, or synthesize a diurnal one, and query window means.
"""

# %%
# A synthetic trace: two weeks of a daily cosine with some noise. Slot 0 is
# the cleanest hour of the first day.
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from carbonflex import load_trace, render_csv, synth_trace, window_mean

trace = synth_trace(days=14, base=120, amplitude=60, period_hours=24, noise_std=8, seed=3)
print(len(trace), "slots of", trace.slot_duration, "h starting", trace.start_time)

# %%
# Traces round-trip through the two-column CSV format.
text = render_csv(trace)
print(text.splitlines()[:3])
assert load_trace(io.StringIO(text)) == trace

# %%
# The mean over any full period sits near the base value.
print("mean of day 3:", round(window_mean(trace, 48, 24), 2))

# %%
fig, ax = plt.subplots(figsize=(8, 3))
ax.plot(np.arange(len(trace)), trace.intensities, lw=1)
ax.set_xlabel("hour")
ax.set_ylabel("gCO2eq/kWh")
ax.set_title("synthetic diurnal trace")
fig.tight_layout()
fig.savefig("trace.png", dpi=120)
