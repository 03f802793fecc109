"""Trace-driven simulation of carbon efficiency versus energy efficiency for
suspend-resume, Wait&Scale and carbon-aware DVFS."""

from .engine import (
    Aggregate,
    AccountingError,
    RunAccounting,
    Summary,
    account,
    aggregate_family,
    aggregate_over_starts,
    normalize,
)
from .policies import (
    Baseline,
    DvfsCell,
    OverheadEvent,
    RateShift,
    Run,
    Schedule,
    SuspendResume,
    WaitAndScale,
    dvfs_starts,
    plan_baseline,
    plan_dvfs,
    plan_suspend_resume,
    plan_wait_and_scale,
    select_lowest_slots,
    sweep_dvfs,
)
from .powermodel import (
    E5_2620V4,
    ScalabilityProfile,
    ServerPowerModel,
    energy_efficiency_at_scale,
    energy_per_work,
    frequency_levels,
    get_server,
    load_server_model,
    most_efficient_frequency,
    power_at,
    slowdown,
    throughput_at_scale,
    voltage_for_frequency,
)
from .trace import (
    CarbonTrace,
    TraceError,
    load_trace,
    read_trace,
    render_csv,
    synth_trace,
    window_mean,
    write_trace,
)
from .workload import (
    CheckpointableJob,
    DvfsJob,
    ScalableJob,
    deadline_slots,
    execution_slots,
)

__version__ = "0.1.0"
