import math

import pytest
from pydantic import ValidationError

from src.channel.channel_model import LedConfig, OpticalFrontEnd, ReceiverPose, channel_dc_gain
from src.exceptions import GenerationError
from src.experiments.generator import RoomConfig, SimulationDefaults, gen_scenario, sample_users
from src.experiments.report import solve_report
from src.experiments.sweep import CSV_HEADER, SweepSpec, run_sweep, write_sweep_csv
from src.noma.noma_model import dbm_to_mw
from src.noma.scenario_io import save_scenario
from src.optim.solver import SolverConfig, SolverStatus, solve
from tests.conftest import make_scenario

DEFAULTS = SimulationDefaults(pam_coefficient=1.0)


def test_generator_is_seeded(tmp_path):
    first = gen_scenario(RoomConfig(seed=42), DEFAULTS)
    second = gen_scenario(RoomConfig(seed=42), DEFAULTS)
    assert first == second
    save_scenario(first, str(tmp_path / "a.json"))
    save_scenario(second, str(tmp_path / "b.json"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert gen_scenario(RoomConfig(seed=43), DEFAULTS).gains != first.gains


def test_default_drop(room_scenario):
    assert room_scenario.num_users == 20
    assert all(g > 0.0 for g in room_scenario.gains)
    assert room_scenario.noise_power_mw == pytest.approx(dbm_to_mw(-104.0))
    assert room_scenario.u_max == 10.0
    assert room_scenario.provenance["seed"] == 11
    assert len(room_scenario.provenance["users"]) == 20


def test_users_stay_inside_room_and_fov():
    room = RoomConfig(seed=3, num_users=50)
    positions, gains = sample_users(room, DEFAULTS)
    fov_radius = room.led_position[2] * math.tan(DEFAULTS.optics.fov)
    for (x, y, z), g in zip(positions, gains):
        assert 0.0 <= x <= 10.0 and 0.0 <= y <= 10.0 and z == 0.0
        assert math.hypot(x - 5.0, y - 5.0) <= fov_radius + 1e-9
        assert g > 0.0


def test_user_under_the_led_has_the_largest_gain(room_scenario):
    led = LedConfig(position=(5.0, 5.0, 3.0), semiangle_half_power=DEFAULTS.semiangle_half_power)
    center = channel_dc_gain(led, ReceiverPose(position=(5.0, 5.0, 0.0)), OpticalFrontEnd()).g
    assert center >= max(room_scenario.gains)


def test_narrow_fov_fails_generation():
    narrow = SimulationDefaults(optics=OpticalFrontEnd(fov=math.radians(0.1)), pam_coefficient=1.0)
    with pytest.raises(GenerationError):
        gen_scenario(RoomConfig(seed=1), narrow)


def test_missing_pam_coefficient_falls_back(caplog):
    with caplog.at_level("WARNING"):
        s = gen_scenario(RoomConfig(seed=1, num_users=2))
    assert s.pam_coefficient == 1.0
    assert "PAM coefficient" in caplog.text


@pytest.mark.parametrize("kwargs", [
    {"led_position": (5.0, 5.0, 4.0)},
    {"receiver_plane_z": 3.0},
    {"num_users": 0},
    {"dimensions": (10.0, -1.0, 3.0)},
])
def test_room_config_invariants(kwargs):
    with pytest.raises(ValidationError):
        RoomConfig(**kwargs)


@pytest.mark.parametrize("values", [(), (8.0, 8.0), (10.0, 8.0), (0.0, 8.0)])
def test_sweep_spec_invariants(values):
    with pytest.raises(ValidationError):
        SweepSpec(p_max_values=values)


def test_sweep_shape(room_scenario):
    rows = run_sweep(room_scenario)
    assert [r.p_max_mw for r in rows] == [8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0]
    assert all(r.status is SolverStatus.OPTIMAL for r in rows)
    sum_rates = [r.sum_rate_nats for r in rows]
    objectives = [r.harmonic_objective for r in rows]
    assert all(b >= a - 1e-6 for a, b in zip(sum_rates, sum_rates[1:]))
    assert all(b <= a + 1e-7 for a, b in zip(objectives, objectives[1:]))
    # the amplitude budget caps the total power, so larger P_max stops helping
    by_p_max = {r.p_max_mw: r.sum_rate_nats for r in rows}
    assert (by_p_max[20.0] - by_p_max[16.0]) / by_p_max[16.0] <= 0.01


def test_sweep_rows_carry_non_optimal_status(two_user_scenario):
    rows = run_sweep(two_user_scenario, SweepSpec(p_max_values=(4.0, 8.0)), SolverConfig(max_outer=1))
    assert [r.status for r in rows] == [SolverStatus.MAX_ITERATIONS] * 2


def test_sweep_threads_match_sequential(two_user_scenario):
    sweep = SweepSpec(p_max_values=(4.0, 8.0, 12.0))
    assert run_sweep(two_user_scenario, sweep, threads=3) == run_sweep(two_user_scenario, sweep)


def test_sweep_csv_is_byte_identical(tmp_path, two_user_scenario):
    sweep = SweepSpec(p_max_values=(8.0, 12.0, 16.0))
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(run_sweep(two_user_scenario, sweep), str(first))
    write_sweep_csv(run_sweep(two_user_scenario, sweep), str(second))
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 4
    assert lines[1].split(",")[3] == "optimal"


def test_solve_report_in_input_order():
    s = make_scenario([4e-9, 1e-9, 9e-9], noise_power=1e-10)
    result = solve(s)
    report = solve_report(s, result)
    assert report["status"] == "optimal"
    assert report["powers_mw"] == list(result.allocation.powers)
    assert len(report["rates_nats"]) == 3
    assert min(report["rates_nats"]) > 0.0
    assert report["harmonic_objective"] <= report["equal_power_objective"]
