import numpy as np
import pytest

from src.exceptions import GridError
from src.experiments.generator import RoomConfig, SimulationDefaults, gen_scenario
from src.experiments.sweep import validate_against_oracle
from src.noma.noma_model import check_feasibility
from src.optim.oracle import GridSpec, grid_axis, grid_search
from src.optim.solver import SolverStatus, solve
from tests.conftest import make_scenario


def seeded_drop(seed, users):
    return gen_scenario(RoomConfig(seed=seed, num_users=users), SimulationDefaults(pam_coefficient=1.0))


def test_axis_is_log_spaced_and_ends_at_cap():
    s = make_scenario([1e-10, 2e-10], p_max=16.0, pam_coefficient=2.0)
    axis = grid_axis(s, 100, 1e-6)
    assert axis[-1] == min(s.p_max_mw, s.u_max ** 2)
    ratios = axis[1:] / axis[:-1]
    assert ratios == pytest.approx(np.full(99, ratios[0]), rel=1e-9)


def test_axis_excludes_p_floor():
    s = make_scenario([1e-10, 2e-10])
    cap = min(s.p_max_mw, s.u_max ** 2)
    axis = grid_axis(s, 100, 1e-6)
    assert axis.size == 100
    assert 1e-6 not in axis
    assert axis[0] == pytest.approx(1e-6 * (cap / 1e-6) ** 0.01, rel=1e-12)


def test_axis_nests_under_refinement():
    s = make_scenario([1e-10, 2e-10])
    coarse = grid_axis(s, 50, 1e-6)
    fine = grid_axis(s, 100, 1e-6)
    assert np.array_equal(fine[1::2], coarse)


def test_single_user_minimizer_is_the_cap():
    s = make_scenario([1e-10], p_max=16.0, pam_coefficient=2.0)
    result = grid_search(s)
    assert result.allocation.powers[0] == min(s.p_max_mw, s.u_max ** 2)
    assert result.grid_index == (result.resolution - 1,)


def test_minimizer_passes_feasibility(two_user_scenario):
    result = grid_search(two_user_scenario, GridSpec(resolution=300))
    assert check_feasibility(two_user_scenario, result.allocation, tol=0.0).feasible
    assert result.error_bound >= 0.0
    assert 0 < result.feasible_points <= 300 ** 2


def test_refinement_never_worsens(two_user_scenario):
    coarse = grid_search(two_user_scenario, GridSpec(resolution=250))
    fine = grid_search(two_user_scenario, GridSpec(resolution=500))
    assert fine.objective <= coarse.objective


def test_threads_do_not_change_the_answer(two_user_scenario):
    sequential = grid_search(two_user_scenario, GridSpec(resolution=200))
    threaded = grid_search(two_user_scenario, GridSpec(resolution=200), threads=4)
    assert threaded == sequential


def test_symmetric_gains_reproducible():
    s = make_scenario([5e-11, 5e-11], p_max=16.0)
    first = grid_search(s)
    second = grid_search(s)
    assert first == second
    result = solve(s)
    assert result.status is SolverStatus.OPTIMAL
    gap = first.objective - result.objective
    assert gap <= max(1e-3 * result.objective, first.error_bound)


def test_two_user_matches_solver(two_user_scenario):
    report = validate_against_oracle(two_user_scenario, GridSpec(resolution=2000))
    assert report.passed, report.summary()
    # grid points are feasible, so the solver can never lose to the grid by more than its tolerance
    assert report.solver_objective <= report.oracle_objective + report.oracle_bound


def test_three_user_matches_solver():
    report = validate_against_oracle(seeded_drop(5, 3), GridSpec(resolution=120))
    assert report.passed, report.summary()


def test_too_many_users():
    with pytest.raises(GridError):
        grid_search(make_scenario([1e-10] * 5))


def test_floor_above_cap():
    s = make_scenario([1e-10, 2e-10], p_max=1e-3)
    with pytest.raises(GridError):
        grid_search(s, GridSpec(p_floor=1e-2))


@pytest.mark.slow
@pytest.mark.parametrize("users, resolution", [(2, 2000), (3, 400)])
def test_oracle_agreement_suite(users, resolution):
    failures = []
    for seed in range(50):
        report = validate_against_oracle(seeded_drop(1000 + seed, users), GridSpec(resolution=resolution))
        if not report.passed:
            failures.append((seed, report.summary()))
    assert not failures
