"""SINR computation and the power-minimizing downlink beamformer.

The inner subproblem — minimize total transmit power subject to per-user
SINR targets — is solved by an uplink-downlink duality fixed point:
iterate virtual uplink powers against MMSE receive directions until they
stabilize, then rebalance downlink powers through a K x K linear system so
every SINR constraint holds with equality. The iteration is monotone from
zero, so unbounded growth certifies infeasibility.

A direct second-order-cone formulation (``minimize_power_socp``) is kept
alongside as an independent cross-check; it is solved by an interior-point
conic solver and is never on the optimizer's hot path.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "STATUS_OPTIMAL",
    "STATUS_INFEASIBLE",
    "STATUS_MAX_ITERATIONS",
    "LinkBudget",
    "BeamformingSolution",
    "dbm_to_watts",
    "watts_to_dbm",
    "sinr",
    "achievable_rate",
    "minimize_power",
    "minimize_power_socp",
    "check_rate_constraints",
]

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max_iterations"

# Virtual uplink powers growing this much past the interference-free first
# iterate certify an (at least numerically) infeasible target set: the
# fixed point is monotone non-decreasing from zero and bounded iff
# feasible, and a layout demanding 1e12 times the interference-free power
# is indistinguishable from infeasible in float64.
_DIVERGENCE_GROWTH = 1e12


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError("power must be positive for dBm conversion")
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class LinkBudget:
    """Per-user noise powers and rate/SINR targets.

    Attributes:
        noise_w: (K,) noise power per user, watts.
        rate_targets: (K,) minimum rate per user, bps/Hz.
        sinr_targets: (K,) equivalent SINR targets 2**rate - 1, linear.
    """

    noise_w: np.ndarray
    rate_targets: np.ndarray
    sinr_targets: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "noise_w",
                           np.asarray(self.noise_w, dtype=float))
        object.__setattr__(self, "rate_targets",
                           np.asarray(self.rate_targets, dtype=float))
        if np.any(self.noise_w <= 0):
            raise ValueError("noise powers must be positive")
        object.__setattr__(self, "sinr_targets",
                           2.0 ** self.rate_targets - 1.0)

    @classmethod
    def from_dbm(cls, noise_dbm: float, rate_target: float,
                 n_users: int) -> "LinkBudget":
        """Common noise level (dBm) and rate target replicated over users."""
        return cls(noise_w=np.full(n_users, dbm_to_watts(noise_dbm)),
                   rate_targets=np.full(n_users, float(rate_target)))


@dataclass
class BeamformingSolution:
    """Result of the power-minimization subproblem.

    Attributes:
        beamformers: (K, N) complex; row k carries user k's stream.
        total_power_w: sum of squared beamformer norms, watts.
        achieved_sinr: (K,) SINR at the returned beamformers.
        status: one of the STATUS_* constants. Only "optimal" solutions
            may be used as a power value; the others signal failure.
        iterations: fixed-point iterations spent.
    """

    beamformers: np.ndarray
    total_power_w: float
    achieved_sinr: np.ndarray
    status: str
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


def sinr(channels: np.ndarray, beamformers: np.ndarray, noise_w: np.ndarray,
         user: int) -> float:
    """Receive SINR of one user under the given beamformer set.

    Args:
        channels: (K, N) complex channel matrix, row per user.
        beamformers: (K, N) complex beamformers, row per user.
        noise_w: (K,) noise powers, watts.
        user: index of the user whose SINR is evaluated.
    """
    h = np.asarray(channels)[user]
    gains = np.abs(np.conj(h) @ np.asarray(beamformers).T) ** 2
    signal = gains[user]
    interference = gains.sum() - signal
    return float(signal / (interference + noise_w[user]))


def achievable_rate(sinr_value: float) -> float:
    """Shannon rate log2(1 + SINR) in bps/Hz."""
    if sinr_value < 0:
        raise ValueError("SINR must be non-negative")
    return float(np.log2(1.0 + sinr_value))


def check_rate_constraints(channels: np.ndarray, beamformers: np.ndarray,
                           noise_w: np.ndarray, rate_targets: np.ndarray,
                           tol: float = 1e-9) -> np.ndarray:
    """Per-user flags: achieved rate >= target - tol."""
    n_users = np.asarray(channels).shape[0]
    rates = np.array([achievable_rate(sinr(channels, beamformers, noise_w, k))
                      for k in range(n_users)])
    return rates >= np.asarray(rate_targets, dtype=float) - tol


def _achieved_sinrs(channels, beamformers, noise_w):
    k = channels.shape[0]
    return np.array([sinr(channels, beamformers, noise_w, i)
                     for i in range(k)])


def minimize_power(channels: np.ndarray, sinr_targets: np.ndarray,
                   noise_w: np.ndarray, max_iterations: int = 2000,
                   tol: float = 1e-12) -> BeamformingSolution:
    """Minimum-total-power beamformers meeting every SINR target.

    Production path: uplink-downlink duality fixed point. The virtual
    uplink powers q are iterated with MMSE combining,

        q_k <- gamma_k / (h_k^H (I + sum_{j != k} q_j h_j h_j^H)^{-1} h_k),

    using noise-normalized channels. On convergence the MMSE directions are
    reused downlink and per-user powers solve a K x K linear system that
    makes every SINR constraint active. Beamformer phases are canonicalized
    so h_k^H w_k is real non-negative.

    Args:
        channels: (K, N) complex channel matrix.
        sinr_targets: (K,) linear SINR targets, all positive.
        noise_w: (K,) noise powers, watts.
        max_iterations: budget for the fixed point.
        tol: relative step size below which the fixed point is converged.

    Returns:
        BeamformingSolution; status "infeasible" when no beamformer set can
        meet the targets, "max_iterations" when the budget ran out first.
    """
    h = np.atleast_2d(np.asarray(channels, dtype=complex))
    gamma = np.asarray(sinr_targets, dtype=float)
    noise = np.asarray(noise_w, dtype=float)
    n_users, n_ant = h.shape
    if np.any(gamma <= 0):
        raise ValueError("SINR targets must be positive")
    if np.any(noise <= 0):
        raise ValueError("noise powers must be positive")

    norms = np.linalg.norm(h, axis=1)
    if np.any(norms == 0):
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE)

    # Noise-normalized channels: unit-noise problem with identical optimum.
    hn = h / np.sqrt(noise)[:, None]

    if n_users == 1:
        # Closed form: matched transmission at exactly the target SINR.
        power = float(gamma[0] / (np.linalg.norm(hn[0]) ** 2))
        w = np.sqrt(power) * (h[0] / np.linalg.norm(h[0]))
        w = w[None, :] * np.exp(-1j * np.angle(np.conj(h[0]) @ w))
        return BeamformingSolution(
            beamformers=w, total_power_w=power,
            achieved_sinr=_achieved_sinrs(h, w, noise),
            status=STATUS_OPTIMAL, iterations=0)

    q = np.zeros(n_users)
    iterations = 0
    converged = False
    eye = np.eye(n_ant, dtype=complex)
    # Rank-one terms q_k h_k h_k^H, kept separate so each user's
    # leave-one-out covariance is formed by subtraction and stays positive
    # definite for any non-negative q (no downdate identities that lose
    # precision when q grows large on near-degenerate channels).
    outers = hn[:, :, None] * np.conj(hn[:, None, :])  # (K, N, N)
    q_reference = None
    for iterations in range(1, max_iterations + 1):
        total = np.tensordot(q, outers, axes=1)  # sum_k q_k h_k h_k^H
        loo = eye[None, :, :] + total[None, :, :] - q[:, None, None] * outers
        try:
            sol = np.linalg.solve(loo, hn[:, :, None])[..., 0]  # (K, N)
        except np.linalg.LinAlgError:
            return BeamformingSolution(
                beamformers=np.zeros_like(h), total_power_w=np.nan,
                achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE,
                iterations=iterations)
        g = np.real(np.einsum("kn,kn->k", np.conj(hn), sol))
        q_new = gamma / g
        step = np.max(np.abs(q_new - q) / np.maximum(q_new, 1e-300))
        q = q_new
        if q_reference is None:
            q_reference = q.sum()  # interference-free power lower bound
        if (not np.all(np.isfinite(q)) or g.min() <= 0
                or q.sum() > _DIVERGENCE_GROWTH * q_reference):
            return BeamformingSolution(
                beamformers=np.zeros_like(h), total_power_w=np.nan,
                achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE,
                iterations=iterations)
        if step < tol:
            converged = True
            break
    if not converged:
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_MAX_ITERATIONS,
            iterations=iterations)

    # MMSE directions at the fixed point.
    t_mat = eye + (hn.T * q) @ np.conj(hn)
    try:
        directions = np.linalg.solve(t_mat, hn.T).T  # (K, N), rows ~ u_k
    except np.linalg.LinAlgError:
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE,
            iterations=iterations)
    directions /= np.linalg.norm(directions, axis=1)[:, None]

    # Downlink power rebalancing: make every SINR constraint active.
    cross = np.abs(np.conj(hn) @ directions.T) ** 2  # [k, i] = |h_k^H u_i|^2
    m_mat = -cross
    np.fill_diagonal(m_mat, np.diag(cross) / gamma)
    try:
        powers = np.linalg.solve(m_mat, np.ones(n_users))
    except np.linalg.LinAlgError:
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE,
            iterations=iterations)
    if np.any(powers <= 0) or not np.all(np.isfinite(powers)):
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE,
            iterations=iterations)

    w = np.sqrt(powers)[:, None] * directions
    # Canonical phase: h_k^H w_k real non-negative.
    phases = np.angle(np.einsum("kn,kn->k", np.conj(h), w))
    w = w * np.exp(-1j * phases)[:, None]

    achieved = _achieved_sinrs(h, w, noise)
    if np.any(achieved < gamma * (1.0 - 1e-6)):
        return BeamformingSolution(
            beamformers=w, total_power_w=float(powers.sum()),
            achieved_sinr=achieved, status=STATUS_MAX_ITERATIONS,
            iterations=iterations)
    return BeamformingSolution(
        beamformers=w, total_power_w=float(powers.sum()),
        achieved_sinr=achieved, status=STATUS_OPTIMAL, iterations=iterations)


def minimize_power_socp(channels: np.ndarray, sinr_targets: np.ndarray,
                        noise_w: np.ndarray,
                        solver: str = "CLARABEL") -> BeamformingSolution:
    """Conic-programming solution of the same subproblem (cross-check path).

    Each SINR constraint becomes a second-order cone
    sqrt(1 + 1/gamma_k) * Re(h_k^H w_k) >= || [h_k^H w_1 .. h_k^H w_K, 1] ||
    on noise-normalized channels; the objective is the total power. Solved
    with an interior-point conic solver via cvxpy.
    """
    import cvxpy as cp

    h = np.atleast_2d(np.asarray(channels, dtype=complex))
    gamma = np.asarray(sinr_targets, dtype=float)
    noise = np.asarray(noise_w, dtype=float)
    n_users, n_ant = h.shape
    hn = h / np.sqrt(noise)[:, None]

    w = cp.Variable((n_ant, n_users), complex=True)
    constraints = []
    for k in range(n_users):
        received = np.conj(hn[k]) @ w  # (K,) row of h_k^H w_i
        stacked = cp.hstack([received, np.array([1.0])])
        constraints.append(
            np.sqrt(1.0 + 1.0 / gamma[k]) * cp.real(received[k])
            >= cp.norm(stacked, 2))
    problem = cp.Problem(cp.Minimize(cp.sum_squares(w)), constraints)
    problem.solve(solver=solver)

    if problem.status in ("infeasible", "infeasible_inaccurate"):
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_INFEASIBLE)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        return BeamformingSolution(
            beamformers=np.zeros_like(h), total_power_w=np.nan,
            achieved_sinr=np.zeros(n_users), status=STATUS_MAX_ITERATIONS)

    w_val = np.asarray(w.value).T  # (K, N)
    phases = np.angle(np.einsum("kn,kn->k", np.conj(h), w_val))
    w_val = w_val * np.exp(-1j * phases)[:, None]
    achieved = _achieved_sinrs(h, w_val, noise)
    return BeamformingSolution(
        beamformers=w_val,
        total_power_w=float(np.sum(np.abs(w_val) ** 2)),
        achieved_sinr=achieved, status=STATUS_OPTIMAL)
