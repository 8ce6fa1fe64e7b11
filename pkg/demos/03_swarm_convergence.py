"""Two-loop swarm on one drop: convergence trace and pruning schedule.

The global best fitness never increases; the particle count follows the
linear pruning schedule, cutting fitness evaluations roughly in half
compared with the standard swarm while landing at nearly the same power.

Run:  python demos/03_swarm_convergence.py
"""

import numpy as np

from nfmasim import Scenario, SwarmConfig, drop_scenario, run_scheme

scenario = Scenario.desk()
config = SwarmConfig(n_particles=20, n_iterations=30, prune_ratio=0.02)
placement = drop_scenario(scenario, seed_index=0)

result = run_scheme("proposed", scenario, config, 0, placement=placement)
print(f"{'iter':>4} {'particles':>9} {'best [dBm]':>11} {'penalty':>8} "
      f"{'cum evals':>9}")
for rec in result.trace:
    if rec.iteration % 3 == 0 or rec.iteration == config.n_iterations:
        dbm = 10 * np.log10(rec.best_fitness / 1e-3)
        print(f"{rec.iteration:>4} {rec.residual_particles:>9} "
              f"{dbm:>11.3f} {rec.penalty:>8.1f} "
              f"{rec.cumulative_evaluations:>9}")

best = [rec.best_fitness for rec in result.trace]
print("\ntrace non-increasing:", all(b <= a for a, b in zip(best, best[1:])))

standard = run_scheme("ma_pso", scenario, config, 0, placement=placement)
ratio = result.evaluations / standard.evaluations
print(f"evaluations: pruned {result.evaluations}, "
      f"standard {standard.evaluations} (ratio {ratio:.3f})")
print(f"final power: pruned {result.power_dbm:.3f} dBm, "
      f"standard {standard.power_dbm:.3f} dBm")

replay = run_scheme("proposed", scenario, config, 0, placement=placement)
print("bit-identical replay:", replay.power_dbm == result.power_dbm
      and np.array_equal(replay.run.best_position,
                         result.run.best_position))
