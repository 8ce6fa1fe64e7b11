"""Two-loop particle swarm with dynamic neighborhood pruning.

The outer loop moves particles through the space of antenna positions
(one flat vector per particle: all transmit coordinates followed by all
local receive coordinates). The inner loop is the per-particle fitness:
the minimum transmit power at the channels induced by those positions,
plus a penalty proportional to the number of antennas violating the
minimum spacing. After each outer iteration the particles nearest the
global best are removed on a predetermined schedule, which cuts the
number of fitness evaluations roughly in half at a linear schedule while
the neighborhood of the incumbent is already well explored.

The swarm engine is generic over the fitness callable, so evaluation
counting can be exercised with stub objectives and the same machinery
serves schemes that pin subsets of coordinates via degenerate bounds.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beamforming import (LinkBudget, minimize_power, STATUS_OPTIMAL)
from .channel import ChannelDrop, channel_matrix
from .geometry import count_spacing_violations, local_to_global, project_into_box

__all__ = [
    "SwarmConfig",
    "FitnessEval",
    "TraceRecord",
    "RunResult",
    "FitnessContext",
    "INFEASIBLE_POWER_SENTINEL",
    "inertia_weight",
    "residual_count",
    "update_velocity",
    "update_position",
    "prune_neighborhood",
    "run_swarm",
    "make_power_fitness",
]

# Stand-in power (watts) when the inner solver reports no valid solution;
# far above any feasible power at simulated scales, so such particles are
# dominated but still comparable.
INFEASIBLE_POWER_SENTINEL = 1e6


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm parameters.

    Attributes:
        n_particles: initial particle count.
        n_iterations: outer iteration count.
        prune_ratio: final particle count as a fraction of the initial one
            (1.0 disables pruning and recovers the standard swarm).
        c1, c2: personal and global learning factors.
        omega_min, omega_max: bounds of the linearly decreasing inertia.
        penalty_factor: weight multiplying the spacing-violation count.
        velocity_init_scale: initial velocities are uniform in
            +/- scale * (upper - lower) per component.
        seed: RNG seed; identical seeds give bit-identical runs.
        workers: fitness evaluations run in a thread pool when > 1.
        record_pbest: keep per-iteration snapshots of personal bests
            (testing aid).
    """

    n_particles: int = 50
    n_iterations: int = 50
    prune_ratio: float = 0.02
    c1: float = 1.4
    c2: float = 1.4
    omega_min: float = 0.4
    omega_max: float = 0.9
    penalty_factor: float = 100.0
    velocity_init_scale: float = 0.5
    seed: int = 0
    workers: int = 1
    record_pbest: bool = False

    def __post_init__(self):
        if self.n_particles < 1 or self.n_iterations < 1:
            raise ValueError("n_particles and n_iterations must be >= 1")
        if not 0.0 < self.prune_ratio <= 1.0:
            raise ValueError("prune_ratio must be in (0, 1]")
        if self.omega_min > self.omega_max:
            raise ValueError("omega_min must not exceed omega_max")


@dataclass
class FitnessEval:
    """One fitness evaluation: total value and its decomposition."""

    total: float
    power_w: float
    penalty: float
    solver_optimal: bool
    solution: object | None = None


@dataclass
class TraceRecord:
    """Per-iteration convergence record (iteration 0 is initialization)."""

    iteration: int
    residual_particles: int
    best_fitness: float
    best_power_w: float
    penalty: float
    cumulative_evaluations: int


@dataclass
class RunResult:
    """Outcome of one swarm run."""

    best_position: np.ndarray
    best_fitness: float
    best_eval: FitnessEval
    trace: list[TraceRecord]
    evaluations: int
    success: bool
    diagnostics: str = ""
    pbest_history: list[np.ndarray] = field(default_factory=list)


def inertia_weight(iteration: int, n_iterations: int, omega_min: float,
                   omega_max: float) -> float:
    """Linearly decreasing inertia: omega_max at the start, omega_min at
    the final iteration."""
    return omega_max - (omega_max - omega_min) * iteration / n_iterations


def residual_count(iteration: int, n_particles: int, prune_ratio: float,
                   n_iterations: int) -> int:
    """Scheduled particle count at a 1-based iteration.

    Linear interpolation from ``n_particles`` down to
    ``prune_ratio * n_particles``, rounded half away from zero, never below
    max(1, ceil(prune_ratio * n_particles)). A single-iteration schedule
    keeps all particles.
    """
    if n_iterations <= 1:
        return n_particles
    final = prune_ratio * n_particles
    value = (n_particles
             - (n_particles - final) * (iteration - 1) / (n_iterations - 1))
    rounded = int(np.floor(value + 0.5))
    floor_count = max(1, int(np.ceil(final)))
    return max(rounded, floor_count)


def update_velocity(velocity: np.ndarray, position: np.ndarray,
                    personal_best: np.ndarray, global_best: np.ndarray,
                    omega: float, c1: float, c2: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Inertia plus randomly weighted pulls toward the two best positions.

    The per-component random weights are drawn fresh on every call. No
    velocity clamping is applied; positions are projected separately.
    """
    e1 = rng.uniform(0.0, 1.0, size=position.shape)
    e2 = rng.uniform(0.0, 1.0, size=position.shape)
    return (omega * velocity
            + c1 * e1 * (personal_best - position)
            + c2 * e2 * (global_best - position))


def update_position(position: np.ndarray, velocity: np.ndarray,
                    lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Step by the velocity, then clamp componentwise into the box."""
    return project_into_box(position + velocity, lower, upper)


def prune_neighborhood(positions: np.ndarray, global_best: np.ndarray,
                       target_count: int,
                       protected_index: int | None = None) -> np.ndarray:
    """Indices of surviving particles after pruning to ``target_count``.

    Removes the particles nearest the global best in Euclidean distance
    over the full position vector (smallest neighborhood radius containing
    exactly the number to remove). Ties are broken by particle index, the
    lower index being pruned first. ``protected_index`` is never pruned.

    Returns:
        Sorted indices of the survivors (original ordering preserved).
    """
    positions = np.atleast_2d(positions)
    current = positions.shape[0]
    if target_count > current:
        raise ValueError("target_count exceeds current particle count")
    n_remove = current - target_count
    if n_remove == 0:
        return np.arange(current)
    dist = np.linalg.norm(positions - np.asarray(global_best), axis=1)
    order = np.lexsort((np.arange(current), dist))  # distance, then index
    removable = [i for i in order if i != protected_index]
    removed = set(removable[:n_remove])
    return np.array([i for i in range(current) if i not in removed])


def _evaluate_all(fitness, positions, workers):
    if workers > 1 and positions.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fitness, positions))
    return [fitness(u) for u in positions]


def run_swarm(fitness, lower: np.ndarray, upper: np.ndarray,
              config: SwarmConfig) -> RunResult:
    """Run the two-loop pruning swarm and return the best position found.

    Args:
        fitness: callable mapping a position vector to a FitnessEval.
        lower: (D,) componentwise lower bounds. Components pinned by
            lower == upper stay fixed for the whole run.
        upper: (D,) componentwise upper bounds.
        config: swarm parameters.

    Returns:
        RunResult. ``success`` is False when the incumbent at termination
        has no valid inner solution or still violates the spacing
        constraint; its fitness is then a sentinel, not a usable power.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise ValueError("invalid bounds")
    dim = lower.shape[0]
    span = upper - lower
    rng = np.random.default_rng(config.seed)

    n = config.n_particles
    positions = lower + rng.uniform(0.0, 1.0, size=(n, dim)) * span
    velocities = ((rng.uniform(0.0, 1.0, size=(n, dim)) - 0.5)
                  * (2.0 * config.velocity_init_scale) * span)

    evals = _evaluate_all(fitness, positions, config.workers)
    n_evaluations = n
    pbest = positions.copy()
    pbest_fitness = np.array([e.total for e in evals])
    pbest_evals = list(evals)

    best_idx = int(np.argmin(pbest_fitness))
    gbest = pbest[best_idx].copy()
    gbest_fitness = float(pbest_fitness[best_idx])
    gbest_eval = pbest_evals[best_idx]

    trace = [TraceRecord(0, n, gbest_fitness, gbest_eval.power_w,
                         gbest_eval.penalty, n_evaluations)]
    pbest_history = [pbest_fitness.copy()] if config.record_pbest else []

    for q in range(1, config.n_iterations + 1):
        omega = inertia_weight(q, config.n_iterations, config.omega_min,
                               config.omega_max)
        scheduled = residual_count(q, config.n_particles, config.prune_ratio,
                                   config.n_iterations)
        assert positions.shape[0] == scheduled, \
            "particle count diverged from the pruning schedule"

        for p in range(positions.shape[0]):
            velocities[p] = update_velocity(velocities[p], positions[p],
                                            pbest[p], gbest, omega,
                                            config.c1, config.c2, rng)
            positions[p] = update_position(positions[p], velocities[p],
                                           lower, upper)
        evals = _evaluate_all(fitness, positions, config.workers)
        n_evaluations += positions.shape[0]

        current_fitness = np.array([e.total for e in evals])
        for p in range(positions.shape[0]):
            if current_fitness[p] < pbest_fitness[p]:
                pbest[p] = positions[p].copy()
                pbest_fitness[p] = current_fitness[p]
                pbest_evals[p] = evals[p]
            if current_fitness[p] < gbest_fitness:
                gbest = positions[p].copy()
                gbest_fitness = float(current_fitness[p])
                gbest_eval = evals[p]

        trace.append(TraceRecord(q, positions.shape[0], gbest_fitness,
                                 gbest_eval.power_w, gbest_eval.penalty,
                                 n_evaluations))
        if config.record_pbest:
            pbest_history.append(pbest_fitness.copy())

        if q < config.n_iterations:
            target = residual_count(q + 1, config.n_particles,
                                    config.prune_ratio, config.n_iterations)
            if target < positions.shape[0]:
                protected = int(np.argmin(current_fitness))
                keep = prune_neighborhood(positions, gbest, target, protected)
                positions = positions[keep]
                velocities = velocities[keep]
                pbest = pbest[keep]
                pbest_fitness = pbest_fitness[keep]
                pbest_evals = [pbest_evals[i] for i in keep]

    best_values = [rec.best_fitness for rec in trace]
    assert all(b <= a + 0.0 for a, b in zip(best_values, best_values[1:])), \
        "global best fitness increased during the run"

    success = gbest_eval.solver_optimal and gbest_eval.penalty == 0.0
    diagnostics = ""
    if not success:
        reasons = []
        if not gbest_eval.solver_optimal:
            reasons.append("inner solver failed at the incumbent")
        if gbest_eval.penalty > 0:
            reasons.append("incumbent violates minimum antenna spacing")
        diagnostics = "; ".join(reasons)
    return RunResult(best_position=gbest, best_fitness=gbest_fitness,
                     best_eval=gbest_eval, trace=trace,
                     evaluations=n_evaluations, success=success,
                     diagnostics=diagnostics, pbest_history=pbest_history)


@dataclass
class FitnessContext:
    """Everything needed to score one antenna-position vector.

    Attributes:
        n_transmit: number of transmit antennas N.
        n_users: number of users K.
        wavelength: carrier wavelength, meters.
        drop: frozen channel randomness (scatterers, coefficients, gains).
        user_origins: (K, 3) global local-frame origins.
        rotations: (K, 3, 3) local-to-global rotations.
        budget: noise powers and SINR targets.
        min_spacing: minimum transmit inter-antenna distance, meters.
        penalty_factor: fitness penalty per violating antenna.
    """

    n_transmit: int
    n_users: int
    wavelength: float
    drop: ChannelDrop
    user_origins: np.ndarray
    rotations: np.ndarray
    budget: LinkBudget
    min_spacing: float
    penalty_factor: float = 100.0

    def split(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Decode a flat particle vector into (N, 3) transmit positions and
        (K, 3) local receive positions."""
        u = np.asarray(u, dtype=float)
        t = u[:3 * self.n_transmit].reshape(self.n_transmit, 3)
        r_local = u[3 * self.n_transmit:].reshape(self.n_users, 3)
        return t, r_local

    def receive_global(self, r_local: np.ndarray) -> np.ndarray:
        out = np.empty_like(r_local)
        for k in range(self.n_users):
            out[k] = local_to_global(self.user_origins[k], self.rotations[k],
                                     r_local[k])
        return out

    def channels(self, u: np.ndarray) -> np.ndarray:
        """(K, N) channel matrix induced by a particle vector."""
        t, r_local = self.split(u)
        return channel_matrix(t, self.receive_global(r_local), self.drop,
                              self.wavelength)


def make_power_fitness(ctx: FitnessContext):
    """Fitness callable: minimum transmit power plus spacing penalty.

    The power term is the inner subproblem's optimum at the channels
    induced by the particle's antenna positions; a failed inner solve is
    replaced by a large sentinel so the particle stays comparable. The
    penalty term is the violating-antenna count times the penalty factor.
    """

    def fitness(u: np.ndarray) -> FitnessEval:
        t, _ = ctx.split(u)
        violations = count_spacing_violations(t, ctx.min_spacing)
        penalty = ctx.penalty_factor * violations
        h = ctx.channels(u)
        solution = minimize_power(h, ctx.budget.sinr_targets,
                                  ctx.budget.noise_w)
        if solution.status == STATUS_OPTIMAL:
            power = solution.total_power_w
            optimal = True
        else:
            power = INFEASIBLE_POWER_SENTINEL
            optimal = False
        return FitnessEval(total=power + penalty, power_w=power,
                           penalty=penalty, solver_optimal=optimal,
                           solution=solution)

    return fitness
