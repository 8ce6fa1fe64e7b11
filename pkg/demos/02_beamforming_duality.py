"""The inner subproblem, solved two independent ways.

Minimum transmit power under per-user SINR targets is computed by the
production fixed point (virtual uplink powers + MMSE directions + downlink
rebalancing) and cross-checked against a conic interior-point formulation.
At the optimum every SINR constraint is active.

Run:  python demos/02_beamforming_duality.py
"""

import time

import numpy as np

from nfmasim import minimize_power, minimize_power_socp

rng = np.random.default_rng(7)

print(f"{'K':>2} {'N':>2} {'fixed point [W]':>16} {'conic [W]':>16} "
      f"{'rel gap':>9} {'max SINR slack':>14}")
for _ in range(8):
    k = int(rng.integers(2, 5))
    n = int(rng.integers(k, 9))
    h = (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n)))
    gamma = rng.uniform(1.0, 15.0, k)
    noise = rng.uniform(0.5, 2.0, k)
    fp = minimize_power(h, gamma, noise)
    cone = minimize_power_socp(h, gamma, noise)
    gap = abs(fp.total_power_w - cone.total_power_w) / cone.total_power_w
    slack = np.max(np.abs(fp.achieved_sinr - gamma) / gamma)
    print(f"{k:>2} {n:>2} {fp.total_power_w:>16.9f} "
          f"{cone.total_power_w:>16.9f} {gap:>9.1e} {slack:>14.1e}")

# The fixed point is the in-loop path; the conic solve is the referee.
h = (rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8)))
gamma = np.full(4, 7.0)
noise = np.ones(4)
t0 = time.perf_counter()
for _ in range(200):
    minimize_power(h, gamma, noise)
fp_ms = (time.perf_counter() - t0) / 200 * 1e3
t0 = time.perf_counter()
for _ in range(10):
    minimize_power_socp(h, gamma, noise)
cone_ms = (time.perf_counter() - t0) / 10 * 1e3
print(f"\nper-solve time: fixed point {fp_ms:.2f} ms, "
      f"conic {cone_ms:.1f} ms "
      f"(x{cone_ms / fp_ms:.0f} slower, why it stays out of the swarm loop)")
