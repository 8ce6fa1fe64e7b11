"""Scenario construction, random drops, benchmark schemes, and sweeps.

A scenario fixes the physical configuration (carrier, antenna counts,
region sizes, user geometry, link budget). A drop freezes one random
realization of user placements, scatterers, and reflection coefficients.
Schemes differ only in which antenna coordinates they are allowed to move:

* ``proposed``  - transmit and receive antennas move; pruning swarm.
* ``ma_pso``    - same search without pruning (prune ratio forced to 1).
* ``ma_bs``     - only transmit antennas move; receive pinned at centers.
* ``fpa``       - nothing moves: half-wavelength uniform linear array at
  the base station, receive antennas at region centers; a single inner
  beamforming solve.

Sweeps share drops across schemes at each (value, seed) cell so scheme
comparisons are paired, and derive all randomness from the scenario seed
so every cell is exactly replayable.
"""

import csv
import dataclasses
import logging
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .beamforming import LinkBudget, watts_to_dbm
from .channel import SPEED_OF_LIGHT, ChannelDrop
from .geometry import random_rotation
from .optimizer import (FitnessContext, RunResult, SwarmConfig,
                        make_power_fitness, run_swarm)

__all__ = [
    "Scenario",
    "ScenarioError",
    "Placement",
    "ExperimentResult",
    "SCHEMES",
    "SWEEP_AXES",
    "parse_scenario_file",
    "drop_scenario",
    "build_context",
    "scheme_bounds",
    "ula_positions",
    "run_scheme",
    "sweep",
    "apply_axis",
    "write_csv_atomic",
    "result_row",
    "trace_rows",
    "RESULT_HEADER",
    "TRACE_HEADER",
]

SCHEMES = ("proposed", "ma_pso", "ma_bs", "fpa")
SWEEP_AXES = ("region_size", "user_count", "rate_target", "distance")

RESULT_HEADER = ["scheme", "axis", "value", "seed", "power_dbm", "evals",
                 "feasible", "trace_file"]
TRACE_HEADER = ["iteration", "residual_particles", "best_fitness_dbm",
                "penalty", "cum_evals"]

# Azimuth sector users and scatterers are dropped into, facing the array.
_SECTOR_HALF_ANGLE = np.pi / 3.0

# Seed-derivation domains, so drop and swarm streams never collide.
_DOMAIN_DROP = 1
_DOMAIN_SWARM = 2

_log = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Malformed scenario input (unknown key, bad value, inconsistency)."""


@dataclass(frozen=True)
class Scenario:
    """Physical configuration of one experiment.

    Region sizes and the minimum antenna spacing are expressed in carrier
    wavelengths; distances in meters; the noise level in dBm; the Rician
    factor in dB.
    """

    frequency_hz: float = 28e9
    n_transmit: int = 4
    n_users: int = 3
    n_scatterers: int = 5
    region_tx_wavelengths: float = 100.0
    region_rx_wavelengths: float = 1.0
    user_distance_min_m: float = 50.0
    user_distance_max_m: float = 200.0
    kappa_db: float = 3.0
    noise_dbm: float = -80.0
    rate_target_bps_hz: float = 3.0
    min_spacing_wavelengths: float = 0.5
    rotation_mode: str = "identity"
    seed: int = 1

    def __post_init__(self):
        if self.user_distance_min_m > self.user_distance_max_m:
            raise ScenarioError(
                "user_distance_min_m exceeds user_distance_max_m")
        if self.user_distance_min_m <= 0:
            raise ScenarioError("user distances must be positive")
        if self.rotation_mode not in ("identity", "random"):
            raise ScenarioError(
                f"rotation_mode must be 'identity' or 'random', "
                f"got {self.rotation_mode!r}")
        if self.n_transmit < 1 or self.n_users < 1 or self.n_scatterers < 0:
            raise ScenarioError("antenna/user/scatterer counts out of range")
        if self.region_tx_wavelengths < 0 or self.region_rx_wavelengths < 0:
            raise ScenarioError("region sizes must be non-negative")
        if self.min_spacing_wavelengths <= 0:
            raise ScenarioError("min_spacing_wavelengths must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def kappa_linear(self) -> float:
        return 10.0 ** (self.kappa_db / 10.0)

    @property
    def min_spacing_m(self) -> float:
        return self.min_spacing_wavelengths * self.wavelength

    def link_budget(self) -> LinkBudget:
        return LinkBudget.from_dbm(self.noise_dbm, self.rate_target_bps_hz,
                                   self.n_users)

    def replace(self, **kwargs) -> "Scenario":
        return dataclasses.replace(self, **kwargs)

    @classmethod
    def desk(cls, **kwargs) -> "Scenario":
        """Small configuration sized for laptop-speed experiments."""
        base = dict(n_transmit=4, n_users=3, n_scatterers=5)
        base.update(kwargs)
        return cls(**base)

    @classmethod
    def full(cls, **kwargs) -> "Scenario":
        """Reference configuration (10 transmit antennas, 6 users,
        10 scatterers per user)."""
        base = dict(n_transmit=10, n_users=6, n_scatterers=10)
        base.update(kwargs)
        return cls(**base)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown scenario key "
                                f"{sorted(unknown)[0]!r}")
        return cls(**data)


_INT_KEYS = {"n_transmit", "n_users", "n_scatterers", "seed"}
_STR_KEYS = {"rotation_mode"}


def parse_scenario_file(path: str) -> Scenario:
    """Read a flat key = value scenario file.

    Blank lines and ``#`` comments are ignored. Unknown keys are a hard
    error naming the key; values must parse to the field's type. Missing
    keys keep their defaults.
    """
    known = {f.name for f in dataclasses.fields(Scenario)}
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ScenarioError(f"unknown scenario key {key!r} "
                                    f"({path}:{lineno})")
            try:
                if key in _STR_KEYS:
                    values[key] = value
                elif key in _INT_KEYS:
                    values[key] = int(value)
                else:
                    values[key] = float(value)
            except ValueError as exc:
                raise ScenarioError(
                    f"bad value for key {key!r} ({path}:{lineno}): "
                    f"{value!r}") from exc
    return Scenario(**values)


@dataclass
class Placement:
    """One random realization of the scene geometry and channel drop."""

    user_origins: np.ndarray     # (K, 3) global
    rotations: np.ndarray        # (K, 3, 3)
    drop: ChannelDrop
    rayleigh_distance_m: float
    users_in_near_field: np.ndarray  # (K,) bool

    def to_dict(self) -> dict:
        return {
            "user_origins": self.user_origins.tolist(),
            "rotations": self.rotations.tolist(),
            "drop": self.drop.to_dict(),
            "rayleigh_distance_m": self.rayleigh_distance_m,
            "users_in_near_field": self.users_in_near_field.tolist(),
        }


def _amplitude(distance: float, wavelength: float) -> float:
    return wavelength / (4.0 * np.pi * distance)


def _draw_annulus_point(rng: np.random.Generator, d_min: float,
                        d_max: float) -> np.ndarray:
    """Uniform-in-area point of the horizontal annulus sector facing the
    array (+y side), at height zero."""
    angle = rng.uniform(-_SECTOR_HALF_ANGLE, _SECTOR_HALF_ANGLE)
    u = rng.uniform(0.0, 1.0)
    radius = np.sqrt(d_min ** 2 + u * (d_max ** 2 - d_min ** 2))
    return np.array([radius * np.sin(angle), radius * np.cos(angle), 0.0])


def drop_seed_sequence(master_seed: int, seed_index: int, domain: int):
    return np.random.SeedSequence(master_seed, spawn_key=(domain, seed_index))


def drop_scenario(scenario: Scenario, seed_index: int = 0) -> Placement:
    """Draw one frozen random realization of the scenario.

    Users (with their rotation and scatterers) are drawn in per-user
    blocks, so realizations with fewer users are prefixes of those with
    more at the same seed. All amplitude gains are evaluated once, at the
    drop geometry.
    """
    rng = np.random.default_rng(
        drop_seed_sequence(scenario.seed, seed_index, _DOMAIN_DROP))
    wl = scenario.wavelength
    k_users, l_scat = scenario.n_users, scenario.n_scatterers

    origins = np.zeros((k_users, 3))
    rotations = np.zeros((k_users, 3, 3))
    scatterers = np.zeros((k_users, l_scat, 3))
    coeffs = np.zeros((k_users, l_scat), dtype=complex)
    los_gains = np.zeros(k_users)
    first_hop = np.zeros((k_users, l_scat))
    second_hop = np.zeros((k_users, l_scat))

    for k in range(k_users):
        origins[k] = _draw_annulus_point(rng, scenario.user_distance_min_m,
                                         scenario.user_distance_max_m)
        if scenario.rotation_mode == "random":
            rotations[k] = random_rotation(rng)
        else:
            rotations[k] = np.eye(3)
        los_gains[k] = _amplitude(np.linalg.norm(origins[k]), wl)
        for l in range(l_scat):
            scatterers[k, l] = _draw_annulus_point(
                rng, scenario.user_distance_min_m,
                scenario.user_distance_max_m)
            # Relative bounce-path weight: free-space spreading over the
            # total traveled distance, so nearer detours scatter stronger.
            total_path = (np.linalg.norm(scatterers[k, l])
                          + np.linalg.norm(scatterers[k, l] - origins[k]))
            first_hop[k, l] = _amplitude(total_path, wl)
            second_hop[k, l] = 1.0
        if l_scat:
            # Calibrate the aggregate scattered power to the direct-path
            # power, so the Rician factor alone fixes the LoS/NLoS power
            # ratio (its definition) while relative path weights keep the
            # total-distance spreading above.
            first_hop[k] *= los_gains[k] / np.sqrt(np.mean(first_hop[k] ** 2))
            draws = rng.standard_normal(2 * l_scat)
            coeffs[k] = (draws[:l_scat] + 1j * draws[l_scat:]) / np.sqrt(2.0)

    drop = ChannelDrop(scatterers=scatterers, reflection_coeffs=coeffs,
                       los_gains=los_gains, first_hop_gains=first_hop,
                       second_hop_gains=second_hop,
                       rician_factor=scenario.kappa_linear,
                       seed=seed_index)

    aperture = scenario.region_tx_wavelengths * wl * np.sqrt(2.0)
    rayleigh = 2.0 * aperture ** 2 / wl
    distances = np.linalg.norm(origins, axis=1)
    in_near_field = distances <= rayleigh
    _log.debug("drop %d: Rayleigh distance %.1f m, user distances %s",
               seed_index, rayleigh, np.round(distances, 1))
    if not in_near_field.all():
        _log.warning(
            "drop %d: %d of %d users beyond the Rayleigh distance "
            "(%.1f m) of the transmit region; spherical-wave model still "
            "applies but the scenario is not near-field for them",
            seed_index, int((~in_near_field).sum()), k_users, rayleigh)
    return Placement(user_origins=origins, rotations=rotations, drop=drop,
                     rayleigh_distance_m=rayleigh,
                     users_in_near_field=in_near_field)


def build_context(scenario: Scenario, placement: Placement,
                  penalty_factor: float = 100.0) -> FitnessContext:
    return FitnessContext(
        n_transmit=scenario.n_transmit, n_users=scenario.n_users,
        wavelength=scenario.wavelength, drop=placement.drop,
        user_origins=placement.user_origins, rotations=placement.rotations,
        budget=scenario.link_budget(),
        min_spacing=scenario.min_spacing_m,
        penalty_factor=penalty_factor)


def scheme_bounds(scenario: Scenario,
                  scheme: str) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise position bounds for a scheme's particle vector.

    The transmit region spans the global x-z plane centered at the origin;
    each receive region spans its user's local x-z plane centered at the
    local origin. Pinned coordinates (the in-plane third axis, and every
    receive coordinate for schemes without user-side movement) carry equal
    lower and upper bounds.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    wl = scenario.wavelength
    half_t = scenario.region_tx_wavelengths * wl / 2.0
    half_r = scenario.region_rx_wavelengths * wl / 2.0
    if scheme in ("ma_bs", "fpa"):
        half_r = 0.0

    dim = 3 * (scenario.n_transmit + scenario.n_users)
    lower = np.zeros(dim)
    upper = np.zeros(dim)
    for n in range(scenario.n_transmit):
        lower[3 * n:3 * n + 3] = [-half_t, 0.0, -half_t]
        upper[3 * n:3 * n + 3] = [half_t, 0.0, half_t]
    offset = 3 * scenario.n_transmit
    for k in range(scenario.n_users):
        lower[offset + 3 * k:offset + 3 * k + 3] = [-half_r, 0.0, -half_r]
        upper[offset + 3 * k:offset + 3 * k + 3] = [half_r, 0.0, half_r]
    return lower, upper


def ula_positions(n_antennas: int, wavelength: float) -> np.ndarray:
    """(N, 3) horizontal uniform linear array, half-wavelength spacing,
    centered at the origin along the global x axis."""
    idx = np.arange(n_antennas) - (n_antennas - 1) / 2.0
    pos = np.zeros((n_antennas, 3))
    pos[:, 0] = idx * wavelength / 2.0
    return pos


@dataclass
class ExperimentResult:
    """Outcome of one (scheme, scenario, seed) cell."""

    scheme: str
    seed_index: int
    power_w: float
    power_dbm: float
    evaluations: int
    feasible: bool
    run: RunResult | None = None
    placement: Placement | None = None

    @property
    def trace(self):
        return self.run.trace if self.run is not None else []


def _swarm_seed(scenario: Scenario, seed_index: int) -> int:
    ss = drop_seed_sequence(scenario.seed, seed_index, _DOMAIN_SWARM)
    return int(ss.generate_state(1)[0])


def run_scheme(scheme: str, scenario: Scenario, config: SwarmConfig,
               seed_index: int = 0,
               placement: Placement | None = None) -> ExperimentResult:
    """Run one scheme on one drop.

    The swarm seed is derived from (scenario seed, seed index) only, so
    schemes and sweep values share random streams at a cell and compare
    under common random numbers; drops are shared explicitly via
    ``placement``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if placement is None:
        placement = drop_scenario(scenario, seed_index)
    ctx = build_context(scenario, placement,
                        penalty_factor=config.penalty_factor)
    fitness = make_power_fitness(ctx)

    if scheme == "fpa":
        t = ula_positions(scenario.n_transmit, scenario.wavelength)
        u = np.concatenate([t.ravel(),
                            np.zeros(3 * scenario.n_users)])
        result = fitness(u)
        feasible = result.solver_optimal and result.penalty == 0.0
        power_w = result.power_w if feasible else float("nan")
        return ExperimentResult(
            scheme=scheme, seed_index=seed_index, power_w=power_w,
            power_dbm=watts_to_dbm(power_w) if feasible else float("nan"),
            evaluations=1, feasible=feasible, run=None, placement=placement)

    prune_ratio = 1.0 if scheme == "ma_pso" else config.prune_ratio
    cfg = dataclasses.replace(config, prune_ratio=prune_ratio,
                              seed=_swarm_seed(scenario, seed_index))
    lower, upper = scheme_bounds(scenario, scheme)
    run = run_swarm(fitness, lower, upper, cfg)
    feasible = run.success
    power_w = run.best_eval.power_w if feasible else float("nan")
    return ExperimentResult(
        scheme=scheme, seed_index=seed_index, power_w=power_w,
        power_dbm=watts_to_dbm(power_w) if feasible else float("nan"),
        evaluations=run.evaluations, feasible=feasible, run=run,
        placement=placement)


def apply_axis(scenario: Scenario, axis: str, value: float) -> Scenario:
    """Scenario with one sweep axis set to ``value``."""
    if axis == "region_size":
        return scenario.replace(region_rx_wavelengths=float(value))
    if axis == "user_count":
        return scenario.replace(n_users=int(value))
    if axis == "rate_target":
        return scenario.replace(rate_target_bps_hz=float(value))
    if axis == "distance":
        return scenario.replace(user_distance_min_m=float(value),
                                user_distance_max_m=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; "
                     f"expected one of {SWEEP_AXES}")


def _format_float(x: float) -> str:
    return repr(float(x))


def result_row(result: ExperimentResult, axis: str = "", value="",
               trace_file: str = "") -> list[str]:
    """Formatted result-CSV row (strings, stable across rewrites)."""
    return [
        result.scheme,
        axis,
        "" if value == "" else _format_float(value),
        str(result.seed_index),
        _format_float(result.power_dbm),
        str(result.evaluations),
        str(bool(result.feasible)),
        trace_file,
    ]


def trace_rows(result: ExperimentResult) -> list[list[str]]:
    """Formatted trace-CSV rows for one run (empty for single-shot
    schemes). The best-fitness column is the fitness expressed in dBm of
    its watt value (penalty included in the fitness, also reported
    separately)."""
    rows = []
    for rec in result.trace:
        rows.append([
            str(rec.iteration),
            str(rec.residual_particles),
            _format_float(watts_to_dbm(rec.best_fitness)),
            _format_float(rec.penalty),
            str(rec.cumulative_evaluations),
        ])
    return rows


def write_csv_atomic(path: str, header: list[str],
                     rows: list[list[str]]) -> None:
    """Write a CSV via a temp file and rename, so readers never observe a
    partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _cell_key(scheme: str, axis: str, value: float, seed_index: int) -> str:
    return f"{scheme}_{axis}_{value:g}_{seed_index}"


def sweep(scenario: Scenario, axis: str, values, schemes, n_seeds: int,
          config: SwarmConfig, out_dir: str | None = None,
          resume: bool = True, workers: int = 1,
          progress=None) -> list[list[str]]:
    """Full factorial (scheme x value x seed) sweep.

    Drops are shared across schemes at each (value, seed) cell. When
    ``out_dir`` is given, each finished cell is persisted immediately
    (results under ``cells/``, traces under ``traces/``) and, with
    ``resume``, existing cell files are loaded instead of recomputed, so
    an interrupted sweep continues where it stopped. Cells run
    concurrently when ``workers`` exceeds one; row order, cell files, and
    all numbers are independent of the worker count.

    Returns:
        Formatted result rows (strings), ordered by (value, seed, scheme).
    """
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")

    cells_dir = traces_dir = None
    if out_dir is not None:
        cells_dir = os.path.join(out_dir, "cells")
        traces_dir = os.path.join(out_dir, "traces")
        os.makedirs(cells_dir, exist_ok=True)
        os.makedirs(traces_dir, exist_ok=True)

    # Enumerate cells in output order; load cached ones, compute the rest.
    cells = []
    for value in values:
        swept = apply_axis(scenario, axis, value)
        for seed_index in range(n_seeds):
            placement = drop_scenario(swept, seed_index)
            for scheme in schemes:
                cells.append((scheme, swept, value, seed_index, placement))

    cached: dict[int, list[str]] = {}
    pending: list[int] = []
    for i, (scheme, _, value, seed_index, _) in enumerate(cells):
        key = _cell_key(scheme, axis, value, seed_index)
        cell_path = (os.path.join(cells_dir, key + ".csv")
                     if cells_dir else None)
        if cell_path and resume and os.path.exists(cell_path):
            with open(cell_path, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                next(reader)  # header
                cached[i] = next(reader)
            if progress:
                progress(f"cell {key}: cached")
        else:
            pending.append(i)

    results: dict[int, ExperimentResult] = {}
    if workers > 1 and len(pending) > 1:
        from concurrent.futures import ThreadPoolExecutor, as_completed
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_scheme, cells[i][0], cells[i][1], config,
                            cells[i][3], placement=cells[i][4]): i
                for i in pending}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for i in pending:
            scheme, swept, value, seed_index, placement = cells[i]
            results[i] = run_scheme(scheme, swept, config, seed_index,
                                    placement=placement)

    rows = []
    for i, (scheme, _, value, seed_index, _) in enumerate(cells):
        if i in cached:
            rows.append(cached[i])
            continue
        key = _cell_key(scheme, axis, value, seed_index)
        result = results[i]
        trace_name = ""
        if result.trace and traces_dir:
            trace_name = f"trace_{key}.csv"
            write_csv_atomic(os.path.join(traces_dir, trace_name),
                             TRACE_HEADER, trace_rows(result))
        row = result_row(result, axis=axis, value=value,
                         trace_file=trace_name)
        if cells_dir:
            write_csv_atomic(os.path.join(cells_dir, key + ".csv"),
                             RESULT_HEADER, [row])
        rows.append(row)
        if progress:
            progress(f"cell {key}: power_dbm={row[4]} evals={row[5]} "
                     f"feasible={row[6]}")
    return rows
