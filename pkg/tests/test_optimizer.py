import numpy as np
import pytest

from nfmasim.beamforming import minimize_power
from nfmasim.harness import Scenario, build_context, drop_scenario
from nfmasim.optimizer import (FitnessEval, SwarmConfig,
                               INFEASIBLE_POWER_SENTINEL, inertia_weight,
                               make_power_fitness, prune_neighborhood,
                               residual_count, run_swarm, update_position,
                               update_velocity)


def _sphere(u):
    value = float(np.sum(u * u))
    return FitnessEval(total=value, power_w=value, penalty=0.0,
                       solver_optimal=True)


class _OnesRng:
    """Stand-in RNG forcing both random weight vectors to one."""

    def uniform(self, low, high, size=None):
        return np.ones(size)


def test_inertia_weight_schedule_endpoints():
    assert inertia_weight(0, 50, 0.4, 0.9) == pytest.approx(0.9)
    assert inertia_weight(50, 50, 0.4, 0.9) == pytest.approx(0.4)
    assert inertia_weight(25, 50, 0.4, 0.9) == pytest.approx(0.65)


def test_residual_count_linear_schedule():
    assert residual_count(1, 50, 0.02, 50) == 50
    assert residual_count(50, 50, 0.02, 50) == 1
    counts = [residual_count(q, 50, 0.02, 50) for q in range(1, 51)]
    assert counts == list(range(50, 0, -1))
    # Evaluation-reduction mechanism: loop ratio equals (1 + ratio) / 2.
    assert sum(counts) / (50 * 50) == pytest.approx(0.51)


def test_residual_count_never_below_floor():
    for q in range(1, 31):
        assert residual_count(q, 20, 0.02, 30) >= 1
    assert residual_count(30, 20, 0.02, 30) == 1


def test_residual_count_degenerate_schedules():
    assert residual_count(1, 10, 1.0, 40) == 10
    assert residual_count(40, 10, 1.0, 40) == 10
    assert residual_count(1, 10, 0.5, 1) == 10


def test_residual_count_rounds_half_away_from_zero():
    # Interpolated value 2.5 at the midpoint must round to 3, not 2.
    assert residual_count(2, 4, 0.25, 3) == 3


def test_update_velocity_pure_inertia_at_consensus():
    u = np.array([1.0, -2.0])
    v = np.array([0.3, 0.4])
    rng = np.random.default_rng(0)
    out = update_velocity(v, u, u, u, 0.7, 1.4, 1.4, rng)
    np.testing.assert_allclose(out, 0.7 * v, rtol=1e-15)


def test_update_velocity_forced_unit_weights():
    u = np.zeros(3)
    pbest = np.array([1.0, 0.0, -1.0])
    gbest = np.array([2.0, 2.0, 2.0])
    out = update_velocity(np.zeros(3), u, pbest, gbest, 0.9, 1.4, 0.5,
                          _OnesRng())
    np.testing.assert_allclose(out, 1.4 * pbest + 0.5 * gbest, rtol=1e-15)


def test_update_velocity_deterministic_replay():
    u = np.array([0.1, 0.2])
    args = (np.array([0.0, 0.0]), u, np.array([1.0, 1.0]),
            np.array([-1.0, 2.0]), 0.8, 1.4, 1.4)
    v1 = update_velocity(*args, np.random.default_rng(99))
    v2 = update_velocity(*args, np.random.default_rng(99))
    np.testing.assert_array_equal(v1, v2)


def test_update_position_inside_box_is_plain_sum():
    out = update_position(np.array([0.1, 0.2]), np.array([0.3, -0.1]),
                          -np.ones(2), np.ones(2))
    np.testing.assert_allclose(out, [0.4, 0.1], rtol=1e-15)


def test_update_position_pins_at_bounds():
    out = update_position(np.array([0.9]), np.array([5.0]),
                          np.array([-1.0]), np.array([1.0]))
    np.testing.assert_array_equal(out, [1.0])


def test_prune_removes_nearest_first():
    positions = np.array([[1.0, 0], [2.0, 0], [3.0, 0]])
    keep = prune_neighborhood(positions, np.zeros(2), 2, protected_index=2)
    assert list(keep) == [1, 2]


def test_prune_matches_independent_sort():
    rng = np.random.default_rng(13)
    for _ in range(30):
        m = int(rng.integers(4, 30))
        positions = rng.standard_normal((m, 5))
        gbest = rng.standard_normal(5)
        target = int(rng.integers(1, m))
        protected = int(rng.integers(0, m))
        keep = prune_neighborhood(positions, gbest, target, protected)
        dist = np.linalg.norm(positions - gbest, axis=1)
        order = np.lexsort((np.arange(m), dist))
        removed = [i for i in order if i != protected][:m - target]
        expected = sorted(set(range(m)) - set(removed))
        assert list(keep) == expected


def test_prune_never_removes_protected_incumbent():
    positions = np.vstack([np.zeros(3), np.ones((4, 3))])
    keep = prune_neighborhood(positions, np.zeros(3), 1, protected_index=0)
    assert list(keep) == [0]


def test_prune_breaks_ties_by_lower_index():
    positions = np.array([[1.0, 0], [1.0, 0], [1.0, 0]])
    keep = prune_neighborhood(positions, np.zeros(2), 2, protected_index=None)
    assert list(keep) == [1, 2]


def test_prune_noop_at_target():
    positions = np.random.default_rng(0).standard_normal((5, 2))
    keep = prune_neighborhood(positions, np.zeros(2), 5)
    assert list(keep) == [0, 1, 2, 3, 4]


def test_run_trace_is_non_increasing_across_seeds():
    lower, upper = -np.ones(4), np.ones(4)
    for seed in range(5):
        cfg = SwarmConfig(n_particles=10, n_iterations=20, prune_ratio=0.1,
                          seed=seed)
        result = run_swarm(_sphere, lower, upper, cfg)
        best = [rec.best_fitness for rec in result.trace]
        assert all(b <= a for a, b in zip(best, best[1:]))
        assert result.success


def test_run_without_pruning_matches_standard_evaluation_count():
    cfg = SwarmConfig(n_particles=15, n_iterations=12, prune_ratio=1.0,
                      seed=1)
    result = run_swarm(_sphere, -np.ones(3), np.ones(3), cfg)
    assert result.evaluations == 15 + 15 * 12
    assert [rec.residual_particles for rec in result.trace] == [15] * 13


def test_run_evaluations_follow_pruning_schedule():
    cfg = SwarmConfig(n_particles=50, n_iterations=50, prune_ratio=0.02,
                      seed=2)
    result = run_swarm(_sphere, -np.ones(3), np.ones(3), cfg)
    expected = 50 + sum(residual_count(q, 50, 0.02, 50)
                        for q in range(1, 51))
    assert result.evaluations == expected
    assert result.trace[-1].cumulative_evaluations == expected
    # Mechanism ratio against the unpruned loop count.
    loop_ratio = (result.evaluations - 50) / (50 * 50)
    assert loop_ratio == pytest.approx(0.51)


def test_run_is_bit_deterministic():
    cfg = SwarmConfig(n_particles=8, n_iterations=15, prune_ratio=0.25,
                      seed=3)
    r1 = run_swarm(_sphere, -np.ones(5), np.ones(5), cfg)
    r2 = run_swarm(_sphere, -np.ones(5), np.ones(5), cfg)
    assert np.array_equal(r1.best_position, r2.best_position)
    assert r1.best_fitness == r2.best_fitness
    assert [rec.best_fitness for rec in r1.trace] == \
        [rec.best_fitness for rec in r2.trace]


def test_run_workers_do_not_change_results():
    cfg1 = SwarmConfig(n_particles=8, n_iterations=10, prune_ratio=0.5,
                       seed=4, workers=1)
    cfg4 = SwarmConfig(n_particles=8, n_iterations=10, prune_ratio=0.5,
                       seed=4, workers=4)
    r1 = run_swarm(_sphere, -np.ones(4), np.ones(4), cfg1)
    r4 = run_swarm(_sphere, -np.ones(4), np.ones(4), cfg4)
    assert np.array_equal(r1.best_position, r4.best_position)
    assert r1.evaluations == r4.evaluations


def test_run_personal_bests_never_increase():
    cfg = SwarmConfig(n_particles=10, n_iterations=20, prune_ratio=1.0,
                      seed=5, record_pbest=True)
    result = run_swarm(_sphere, -np.ones(4), np.ones(4), cfg)
    history = np.array(result.pbest_history)
    assert np.all(np.diff(history, axis=0) <= 0.0)


def test_run_positions_always_respect_bounds():
    lower = np.array([-1.0, 0.0, -2.0])
    upper = np.array([1.0, 0.0, 2.0])  # middle coordinate pinned

    def checked(u):
        assert np.all(u >= lower - 1e-15) and np.all(u <= upper + 1e-15)
        assert u[1] == 0.0
        return _sphere(u)

    cfg = SwarmConfig(n_particles=12, n_iterations=25, prune_ratio=0.1,
                      seed=6)
    result = run_swarm(checked, lower, upper, cfg)
    assert result.success


def test_run_reports_failure_when_solver_never_succeeds():
    def hopeless(u):
        return FitnessEval(total=INFEASIBLE_POWER_SENTINEL,
                           power_w=INFEASIBLE_POWER_SENTINEL, penalty=0.0,
                           solver_optimal=False)

    cfg = SwarmConfig(n_particles=5, n_iterations=5, seed=7,
                      prune_ratio=1.0)
    result = run_swarm(hopeless, -np.ones(2), np.ones(2), cfg)
    assert not result.success
    assert "solver" in result.diagnostics


def test_run_rejects_invalid_bounds():
    cfg = SwarmConfig(n_particles=4, n_iterations=3)
    with pytest.raises(ValueError):
        run_swarm(_sphere, np.ones(2), -np.ones(2), cfg)


def test_swarm_config_validation():
    with pytest.raises(ValueError):
        SwarmConfig(n_particles=0)
    with pytest.raises(ValueError):
        SwarmConfig(prune_ratio=0.0)
    with pytest.raises(ValueError):
        SwarmConfig(omega_min=0.9, omega_max=0.4)


def test_power_fitness_matches_out_of_band_resolve():
    scenario = Scenario.desk()
    placement = drop_scenario(scenario, 0)
    ctx = build_context(scenario, placement)
    fitness = make_power_fitness(ctx)

    rng = np.random.default_rng(20)
    half = scenario.region_tx_wavelengths * scenario.wavelength / 2
    t = rng.uniform(-half, half, size=(scenario.n_transmit, 3))
    t[:, 1] = 0.0
    r_local = np.zeros((scenario.n_users, 3))
    u = np.concatenate([t.ravel(), r_local.ravel()])
    assert ctx.split(u)[0].shape == (scenario.n_transmit, 3)

    result = fitness(u)
    assert result.penalty == 0.0
    h = ctx.channels(u)
    budget = scenario.link_budget()
    resolved = minimize_power(h, budget.sinr_targets, budget.noise_w)
    assert result.power_w == pytest.approx(resolved.total_power_w,
                                           rel=1e-9)
    assert result.total == pytest.approx(resolved.total_power_w, rel=1e-9)


def test_power_fitness_penalizes_coincident_antennas():
    scenario = Scenario.desk(n_users=1)
    placement = drop_scenario(scenario, 1)
    ctx = build_context(scenario, placement, penalty_factor=100.0)
    fitness = make_power_fitness(ctx)

    t = np.zeros((scenario.n_transmit, 3))
    t[:, 0] = np.arange(scenario.n_transmit) * 0.1  # well spaced
    t[1] = t[0]  # two coincident antennas -> both violate
    u = np.concatenate([t.ravel(), np.zeros(3 * scenario.n_users)])
    result = fitness(u)
    assert result.penalty == pytest.approx(200.0)
    assert result.total == pytest.approx(result.power_w + 200.0)


def test_power_fitness_sentinel_on_unsolvable_channels():
    # Single antenna, two users, targets beyond one antenna's reach.
    scenario = Scenario.desk(n_transmit=1, n_users=2,
                             rate_target_bps_hz=2.0)
    placement = drop_scenario(scenario, 2)
    ctx = build_context(scenario, placement)
    fitness = make_power_fitness(ctx)
    u = np.zeros(3 * (1 + 2))
    result = fitness(u)
    assert not result.solver_optimal
    assert result.power_w == INFEASIBLE_POWER_SENTINEL
