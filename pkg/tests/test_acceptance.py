"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s``. The trend sweeps
dominate the runtime (the receive-region and kappa comparisons run at the
full reference configuration, where their physical effects are decisive;
everything else runs at the desk-scale default).
"""

import time

import numpy as np
import pytest

from nfmasim.geometry import count_spacing_violations
from nfmasim.harness import (Scenario, apply_axis, drop_scenario,
                             run_scheme)
from nfmasim.optimizer import FitnessEval, SwarmConfig, run_swarm
from nfmasim.validation import (beamforming_suite, channel_suite,
                                single_user_grid_optimum,
                                tiny_instance_scenario)

N_SEEDS = 20
DESK = Scenario.desk()  # 4 transmit antennas, 3 users, 5 scatterers, R=3
DESK_CFG = SwarmConfig(n_particles=20, n_iterations=30, prune_ratio=0.02)
FULL_CFG = SwarmConfig(n_particles=50, n_iterations=50, prune_ratio=0.02)


def _verdict(number: int, name: str, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {number} ({name}): "
          f"{'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"


@pytest.fixture(scope="module")
def desk_results():
    """All four schemes on the 20 shared desk-scale drops."""
    t0 = time.perf_counter()
    out = {scheme: [] for scheme in ("proposed", "ma_pso", "ma_bs", "fpa")}
    for seed in range(N_SEEDS):
        placement = drop_scenario(DESK, seed)
        for scheme in out:
            out[scheme].append(
                run_scheme(scheme, DESK, DESK_CFG, seed,
                           placement=placement))
    out["elapsed_s"] = time.perf_counter() - t0
    return out


def _mean_dbm(results):
    """Mean of per-seed dBm values (log-domain average).

    Used for every paired comparison: it reflects typical drops, matching
    the dBm framing of the reported numbers, where watt-domain means are
    dominated by rare near-singular fixed-array cells.
    """
    return float(np.mean([r.power_dbm for r in results]))


def test_acceptance_1_convergence_invariant(desk_results):
    runs = desk_results["proposed"]
    non_increasing = 0
    stagnant = 0
    for result in runs:
        best = [rec.best_fitness for rec in result.trace]
        non_increasing += all(b <= a for a, b in zip(best, best[1:]))
        improvement_db = 10 * np.log10(best[-6] / best[-1])
        stagnant += improvement_db < 0.1
    passed = non_increasing == N_SEEDS and stagnant >= 0.8 * N_SEEDS
    _verdict(1, "convergence invariant", passed,
             f"traces exactly non-increasing {non_increasing}/{N_SEEDS}; "
             f"last-5-iteration improvement < 0.1 dB on "
             f"{stagnant}/{N_SEEDS} seeds (need >= 16); "
             f"proposed-scheme runtime within the shared sweep "
             f"{desk_results['elapsed_s']:.0f} s for all four schemes")


def test_acceptance_2_evaluation_count_reduction():
    t0 = time.perf_counter()

    def stub(u):
        value = float(np.sum(u * u))
        return FitnessEval(total=value, power_w=value, penalty=0.0,
                           solver_optimal=True)

    bounds = (-np.ones(6), np.ones(6))
    pruned = run_swarm(stub, *bounds,
                       SwarmConfig(n_particles=50, n_iterations=50,
                                   prune_ratio=0.02, seed=11))
    standard = run_swarm(stub, *bounds,
                         SwarmConfig(n_particles=50, n_iterations=50,
                                     prune_ratio=1.0, seed=11))
    target = (1.0 + 0.02) / 2.0
    ratio_total = pruned.evaluations / standard.evaluations
    ratio_loop = ((pruned.evaluations - 50)
                  / (standard.evaluations - 50))
    passed = (abs(ratio_total - target) <= 0.02 * target
              and abs(ratio_loop - target) <= 0.02 * target)
    _verdict(2, "evaluation-count reduction", passed,
             f"measured ratio {ratio_total:.4f} incl. init "
             f"({pruned.evaluations}/{standard.evaluations}), "
             f"{ratio_loop:.4f} excl. init, target (1+beta)/2 = "
             f"{target:.4f} +/- 2%; {time.perf_counter() - t0:.2f} s")


def test_acceptance_3_pruning_near_equivalence(desk_results):
    gap = abs(_mean_dbm(desk_results["proposed"])
              - _mean_dbm(desk_results["ma_pso"]))
    _verdict(3, "pruned vs standard swarm", gap <= 0.5,
             f"paired mean power gap {gap:.3f} dB over {N_SEEDS} seeds "
             f"(bound 0.5 dB)")


def _paired_trend(scenario, axis, values, schemes, config, n_seeds):
    """Mean power (dB-domain) per scheme along one sweep axis, on drops
    shared across schemes and values."""
    means = {scheme: [] for scheme in schemes}
    for value in values:
        swept = apply_axis(scenario, axis, value)
        cells = {scheme: [] for scheme in schemes}
        for seed in range(n_seeds):
            placement = drop_scenario(swept, seed)
            for scheme in schemes:
                result = run_scheme(scheme, swept, config, seed,
                                    placement=placement)
                assert result.feasible, (
                    f"infeasible cell {scheme} {axis}={value} seed {seed}")
                cells[scheme].append(result.power_dbm)
        for scheme in schemes:
            means[scheme].append(float(np.mean(cells[scheme])))
    return means


def test_acceptance_4_scheme_ordering_and_trends(desk_results):
    t0 = time.perf_counter()
    details = []
    passed = True

    # Ordering with separation at the desk-scale default.
    prop = _mean_dbm(desk_results["proposed"])
    ma_bs = _mean_dbm(desk_results["ma_bs"])
    fpa = _mean_dbm(desk_results["fpa"])
    ordering = prop <= ma_bs <= fpa and (fpa - prop) >= 0.5
    passed &= ordering
    details.append(f"ordering proposed {prop:.2f} <= ma_bs {ma_bs:.2f} "
                   f"<= fpa {fpa:.2f} dBm, separation "
                   f"{fpa - prop:.2f} dB (need >= 0.5): "
                   f"{'ok' if ordering else 'VIOLATED'}")

    # Monotone trends at the desk default (paired drops, 20 seeds).
    for axis, values, direction in (
            ("user_count", (2, 3, 4), "increasing"),
            ("rate_target", (1.0, 3.0, 5.0), "increasing"),
            ("distance", (50.0, 100.0, 200.0), "increasing")):
        means = _paired_trend(DESK, axis, values,
                              ("proposed", "ma_bs", "fpa"), DESK_CFG,
                              N_SEEDS)
        for scheme, series in means.items():
            monotone = all(b > a for a, b in zip(series, series[1:]))
            passed &= monotone
            details.append(
                f"{axis} {scheme} means "
                f"{np.round(series, 2).tolist()} {direction}: "
                f"{'ok' if monotone else 'VIOLATED'}")

    # Receive-region trend at the full reference configuration, where the
    # receive-side fading physics is decisive (see decisions ledger).
    full = Scenario.full(rate_target_bps_hz=5.0)
    means = _paired_trend(full, "region_size", (0.0, 0.25, 0.5, 1.0),
                          ("proposed", "ma_pso"), FULL_CFG, N_SEEDS)
    for scheme, series in means.items():
        monotone = all(b <= a for a, b in zip(series, series[1:]))
        passed &= monotone
        details.append(
            f"region_size {scheme} means "
            f"{np.round(series, 2).tolist()} non-increasing: "
            f"{'ok' if monotone else 'VIOLATED'}")

    _verdict(4, "scheme ordering and trends", passed,
             "; ".join(details)
             + f"; {time.perf_counter() - t0:.0f} s")


def test_acceptance_5_beamforming_oracle_equivalence():
    t0 = time.perf_counter()
    checks = beamforming_suite(seed=0, n_instances=100)
    by_name = {c.name: c for c in checks}
    passed = all(c.passed for c in checks)
    _verdict(5, "beamforming oracle equivalence", passed,
             f"{by_name['duality_vs_conic'].detail}; "
             f"{by_name['single_user_closed_form'].detail}; "
             f"{by_name['sinr_constraints_active'].detail}; "
             f"{time.perf_counter() - t0:.1f} s")


def test_acceptance_6_tiny_instance_global_check():
    t0 = time.perf_counter()
    scenario = tiny_instance_scenario()
    hits = 0
    worst = 0.0
    for seed in range(10):
        placement = drop_scenario(scenario, seed)
        grid_power = single_user_grid_optimum(scenario, placement)
        result = run_scheme("proposed", scenario, DESK_CFG, seed,
                            placement=placement)
        assert result.feasible
        t_best = result.run.best_position[:6].reshape(2, 3)
        assert count_spacing_violations(t_best,
                                        scenario.min_spacing_m) == 0
        gap_db = abs(10 * np.log10(result.power_w / grid_power))
        worst = max(worst, gap_db)
        hits += gap_db <= 0.2
    _verdict(6, "tiny-instance grid check", hits >= 9,
             f"within 0.2 dB of the exhaustive-grid optimum on "
             f"{hits}/10 seeds (worst gap {worst:.4f} dB); "
             f"{time.perf_counter() - t0:.0f} s")


def test_acceptance_7_channel_invariant_suite():
    t0 = time.perf_counter()
    checks = channel_suite(seed=0)
    by_name = {c.name: c for c in checks}
    passed = all(c.passed for c in checks)
    _verdict(7, "channel invariants", passed,
             f"{by_name['steering_unit_modulus'].detail}; "
             f"{by_name['rician_power_split'].detail}; "
             f"{by_name['drop_determinism'].detail}; "
             f"{time.perf_counter() - t0:.1f} s")


def test_harness_example_kappa_comparison():
    """Sweep example: stronger direct-path weighting lowers power.

    Tested on the fixed-array baseline, where the effect is a pure
    channel-statistics property (deeper scattering fades at low factor
    raise the power a non-adaptive array needs). Position-optimizing
    schemes can legitimately invert it under power-calibrated scattering
    by monetizing those same fades; see the decisions ledger.
    """
    t0 = time.perf_counter()
    means = {}
    for kappa_db in (3.0, 15.0):
        swept = DESK.replace(kappa_db=kappa_db)
        powers = []
        for seed in range(N_SEEDS):
            placement = drop_scenario(swept, seed)
            result = run_scheme("fpa", swept, DESK_CFG, seed,
                                placement=placement)
            assert result.feasible
            powers.append(result.power_dbm)
        means[kappa_db] = float(np.mean(powers))
    passed = means[15.0] < means[3.0]
    detail = (f"fpa mean power 3 dB {means[3.0]:.2f} dBm vs 15 dB "
              f"{means[15.0]:.2f} dBm (paired, {N_SEEDS} seeds); "
              f"{time.perf_counter() - t0:.0f} s")
    print(f"\nHARNESS EXAMPLE (kappa comparison): "
          f"{'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail
