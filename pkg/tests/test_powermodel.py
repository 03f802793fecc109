import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carbonflex.powermodel import (
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


def test_paper_server_ladder():
    levels = frequency_levels(E5_2620V4)
    assert levels == [900.0 + 100 * i for i in range(13)]


def test_degenerate_single_level():
    m = ServerPowerModel(1.0, 0.0, 1000.0, 1000.0, 1000.0, 1.0, 1.0)
    assert frequency_levels(m) == [1000.0]
    assert voltage_for_frequency(m, 1000.0) == 1.0


def test_small_ladder():
    m = ServerPowerModel(1.0, 0.0, 900.0, 1100.0, 100.0, 0.8, 1.0)
    assert frequency_levels(m) == [900.0, 1000.0, 1100.0]


@pytest.mark.parametrize("f, v", [(900, 0.8), (2100, 1.2), (1500, 1.0)])
def test_voltage_map(f, v):
    assert voltage_for_frequency(E5_2620V4, f) == pytest.approx(v, abs=1e-12)


def test_off_ladder_frequency_rejected():
    with pytest.raises(ValueError):
        voltage_for_frequency(E5_2620V4, 1050)
    with pytest.raises(ValueError):
        power_at(E5_2620V4, 2200)


def test_power_at_top_frequency():
    p = power_at(E5_2620V4, 2100)
    assert p == pytest.approx(0.03 * 2100 * 1.2**2 + 30, abs=1e-9)
    assert p == pytest.approx(120.72, abs=1e-9)
    assert 0.24 <= 30 / p <= 0.26


def test_power_at_bottom_frequency():
    assert power_at(E5_2620V4, 900) == pytest.approx(47.28, abs=1e-9)


def test_power_unit_model():
    m = ServerPowerModel(1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    assert power_at(m, 1.0) == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(freq_min=2000.0, freq_max=1000.0),
        dict(freq_step=0.0),
        dict(freq_step=70.0),
        dict(volt_min=1.3),
        dict(static_power=-1.0),
        dict(capacitance_coeff=float("nan")),
    ],
)
def test_invalid_models(kwargs):
    base = dict(capacitance_coeff=0.03, static_power=30.0, freq_min=900.0, freq_max=2100.0,
                freq_step=100.0, volt_min=0.8, volt_max=1.2)
    base.update(kwargs)
    with pytest.raises(ValueError):
        ServerPowerModel(**base)


def test_power_strictly_increasing_on_ladder():
    powers = [power_at(E5_2620V4, f) for f in E5_2620V4.levels]
    assert all(b > a for a, b in zip(powers, powers[1:]))


def test_slowdown_worked_example():
    assert slowdown(0.5, 0.5) == pytest.approx(2 / 3, abs=1e-12)
    assert 1 - slowdown(0.5, 0.5) == pytest.approx(0.34, abs=0.01)


def test_slowdown_extremes():
    assert slowdown(0.0, 0.5) == 0.5
    for fn in (0.1, 0.5, 1.0):
        assert slowdown(1.0, fn) == 1.0


@pytest.mark.parametrize("io, fn", [(-0.1, 0.5), (1.1, 0.5), (0.5, 0.0), (0.5, 1.2)])
def test_slowdown_domain(io, fn):
    with pytest.raises(ValueError):
        slowdown(io, fn)


unit = st.floats(0, 1)
fnorm = st.floats(1e-3, 1)


@settings(max_examples=200)
@given(io=unit, a=fnorm, b=fnorm)
def test_slowdown_monotone_in_frequency(io, a, b):
    lo, hi = min(a, b), max(a, b)
    assert slowdown(io, lo) <= slowdown(io, hi) + 1e-15
    assert 0 < slowdown(io, lo) <= 1
    assert slowdown(io, 1.0) == pytest.approx(1.0, abs=1e-15)


@given(x=fnorm)
def test_cpu_bound_slowdown_is_identity(x):
    assert slowdown(0.0, x) == pytest.approx(x, abs=1e-12)


@settings(max_examples=100)
@given(a=unit, b=unit, level=st.integers(0, 11))
def test_io_bound_jobs_gain_more(a, b, level):
    lo, hi = min(a, b), max(a, b)
    f = E5_2620V4.levels[level]
    top = power_at(E5_2620V4, 2100)
    assert energy_per_work(E5_2620V4, hi, f) / top <= energy_per_work(E5_2620V4, lo, f) / top + 1e-12


def test_energy_per_work_at_top_frequency():
    for io in (0.0, 0.4, 0.7):
        assert energy_per_work(E5_2620V4, io, 2100) == pytest.approx(power_at(E5_2620V4, 2100))


def test_most_efficient_frequency_by_brute_force():
    for io in (0.0, 0.4, 0.7, 1.0):
        costs = {f: power_at(E5_2620V4, f) / slowdown(io, f / 2100) for f in E5_2620V4.levels}
        best = min(costs.values())
        expected = min(f for f, c in costs.items() if c == best)
        assert most_efficient_frequency(E5_2620V4, io) == expected
    # CPU-bound jobs are most efficient mid-ladder, IO-heavy ones at the bottom
    assert most_efficient_frequency(E5_2620V4, 0.0) == 1300.0
    assert most_efficient_frequency(E5_2620V4, 0.7) == 900.0


@pytest.mark.parametrize("r, k, s", [(0.05, 1, 1.0), (0.05, 2, 1.9), (0.15, 4, 2.2)])
def test_throughput_at_scale(r, k, s):
    prof = ScalabilityProfile(r, max_nodes=4)
    assert throughput_at_scale(prof, k) == pytest.approx(s, abs=1e-12)


@pytest.mark.parametrize("r, k, e", [(0.05, 1, 1.0), (0.10, 1, 1.0), (0.05, 2, 0.95), (0.15, 5, 0.40)])
def test_energy_efficiency_at_scale(r, k, e):
    prof = ScalabilityProfile(r, max_nodes=5)
    assert energy_efficiency_at_scale(prof, k) == pytest.approx(e, abs=1e-12)


def test_scale_out_of_range():
    prof = ScalabilityProfile(0.05, max_nodes=4)
    for k in (0, 5, 1.5):
        with pytest.raises(ValueError):
            throughput_at_scale(prof, k)


def test_profile_construction_limits():
    ScalabilityProfile(0.05)
    with pytest.raises(ValueError):
        ScalabilityProfile(0.15)  # throughput turns non-positive before 10 nodes
    with pytest.raises(ValueError):
        ScalabilityProfile(0.15, max_nodes=6)
    with pytest.raises(ValueError):
        ScalabilityProfile(1.0)
    assert ScalabilityProfile.largest(0.15, limit=10).max_nodes == 5
    assert ScalabilityProfile.largest(0.10, limit=10).max_nodes == 6
    assert ScalabilityProfile.largest(0.05, limit=10).max_nodes == 10


def test_geometric_model():
    prof = ScalabilityProfile(0.1, max_nodes=5, model="geometric")
    assert throughput_at_scale(prof, 3) == pytest.approx(3 * 0.9**2)


@settings(max_examples=100)
@given(r=st.floats(0, 0.2))
def test_diminishing_returns(r):
    prof = ScalabilityProfile.largest(r, limit=12)
    s = [throughput_at_scale(prof, k) for k in range(1, prof.max_nodes + 1)]
    gains = [b - a for a, b in zip(s, s[1:])]
    assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gains, gains[1:]))
    assert all(x > 0 for x in s)


def test_builtin_server_lookup():
    assert get_server("e5-2620v4") is E5_2620V4
    with pytest.raises(KeyError):
        get_server("nope")


def test_load_server_model(tmp_path):
    path = tmp_path / "lab.cfg"
    path.write_text(
        "# test server\ncapacitance_coeff = 0.03\nstatic_power = 30\nfreq_min = 900\n"
        "freq_max = 2100\nfreq_step = 100  # MHz\nvolt_min = 0.8\nvolt_max = 1.2\n"
    )
    m = load_server_model(path)
    assert m.name == "lab"
    assert power_at(m, 2100) == pytest.approx(120.72)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("static_power = 30\n", "missing"),
        ("bogus = 1\n", "unknown"),
    ],
)
def test_load_server_model_errors(tmp_path, text, msg):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ValueError, match=msg):
        load_server_model(path)
