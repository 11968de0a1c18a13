"""Scenario generation: users, UAV cells, access rates, antenna patterns.

Users are dropped uniformly over a square service region and grouped into a
fixed number of cells by deterministic centroid clustering (grid-seeded
Lloyd iterations); each UAV hovers over its cell centroid and its access
throughput follows from a free-space access link with a down-tilted
directional antenna. Those throughputs are the per-UAV backhaul rate targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .geometry import AntennaPattern
from .units import db_to_lin

_KMEANS_MAX_ITER = 200
_KMEANS_ATTEMPTS = 10


def antenna_gain(theta_deg: float, phi_deg: float, pattern: AntennaPattern) -> float:
    """Directional gain (linear) at vertical angle theta, horizontal angle phi.

    Boresight is (theta=90, phi=0). Vertical and horizontal attenuations are
    ``min(12*((theta-90)/theta_H)^2, SLA_v)`` and ``min(12*(phi/phi_H)^2,
    A_max)``; their sum saturates at ``A_max``.
    """
    if not 0.0 <= theta_deg <= 180.0:
        raise GeometryError(f"vertical angle out of [0, 180]: {theta_deg}")
    if not -180.0 <= phi_deg < 180.0:
        raise GeometryError(f"horizontal angle out of [-180, 180): {phi_deg}")
    a_v = min(12.0 * ((theta_deg - 90.0) / pattern.theta_h_deg) ** 2, pattern.sla_v_db)
    a_h = min(12.0 * (phi_deg / pattern.phi_h_deg) ** 2, pattern.a_max_db)
    g_db = pattern.g_max_db - min(a_v + a_h, pattern.a_max_db)
    return float(db_to_lin(g_db))


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs of the random scenario generator (region, access link, rates)."""

    region_side: float = 500.0  # m
    region_center: np.ndarray = field(default_factory=lambda: np.array([1000.0, 0.0]))
    n_users: int = 240
    m0: int = 12
    cluster_refine_steps: int = 1
    uav_altitude: float = 45.0  # m
    bandwidth_f: float = 1e6  # Hz, access bandwidth per cell
    p_f_tx: float = 1e-3  # W, access transmit power per user link
    sigma_f_sq: float = 10 ** (-7.7) * 1e-3  # W, access noise (-77 dBm)
    beta0_f: float = 1.4229e-4  # access path gain at 1 m (2 GHz free space)
    pattern: AntennaPattern = field(default_factory=AntennaPattern)

    def __post_init__(self):
        object.__setattr__(self, "region_center", np.asarray(self.region_center, dtype=float))
        if self.region_side <= 0:
            raise ValueError("region side must be positive")
        if self.n_users < self.m0:
            raise ValueError("need at least one user per cell")
        if self.m0 < 1:
            raise ValueError("need at least one UAV")


@dataclass(frozen=True)
class Scenario:
    """Immutable world description consumed by the backhaul planner."""

    users: np.ndarray  # (N0, 2)
    uav_xy: np.ndarray  # (M0, 2)
    uav_alt: np.ndarray  # (M0,)
    assignments: tuple  # tuple of index tuples, disjoint and covering
    p_f_rx: np.ndarray  # (N0,) received access power per user
    c_m: np.ndarray  # (M0,) per-UAV rate targets, bit/s
    bandwidth_f: float
    sigma_f_sq: float
    seed: int
    clustering_iterations: int = 0

    @property
    def m0(self) -> int:
        return self.uav_xy.shape[0]

    @property
    def uav_positions(self) -> np.ndarray:
        return np.column_stack([self.uav_xy, self.uav_alt])


def _grid_init(m0: int, center: np.ndarray, side: float) -> np.ndarray:
    """Deterministic 2 x ceil(M0/2) grid of initial centroids over the region."""
    cols = (m0 + 1) // 2
    rows = 2 if m0 > 1 else 1
    xs = (np.arange(cols) + 0.5) / cols - 0.5
    ys = (np.arange(rows) + 0.5) / rows - 0.5
    grid = np.array([(x, y) for y in ys for x in xs])[:m0]
    return center + side * grid


def _lloyd(users: np.ndarray, centroids: np.ndarray, max_steps: int):
    """Lloyd iterations from the given centroids; returns labels or None."""
    labels = None
    n_iter = 0
    for n_iter in range(1, max_steps + 1):
        d2 = np.sum((users[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        if np.any(np.bincount(new_labels, minlength=len(centroids)) == 0):
            return None, None, n_iter
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = np.array([users[labels == k].mean(axis=0) for k in range(len(centroids))])
    return labels, centroids, n_iter


def cluster_users(users: np.ndarray, m0: int, center, side: float, refine_steps: int = 1):
    """Deterministic M0-way centroid clustering of the user drop.

    Users are binned to a fixed anchor grid over the region and the
    centroids are then refined by ``refine_steps`` Lloyd updates. The small
    fixed budget keeps cell layouts statistically stable across seeds
    (running to convergence wanders between local optima with widely varying
    angular extents, which destabilizes everything downstream of the
    partitioning stage).
    """
    labels, centroids, n_iter = _lloyd(
        users,
        _grid_init(m0, np.asarray(center, float), side),
        max_steps=max(1, min(refine_steps, _KMEANS_MAX_ITER)),
    )
    if labels is None:
        raise RuntimeError("clustering produced an empty cell")
    return labels, centroids, n_iter


def access_rate(
    users: np.ndarray,
    uav_xy: np.ndarray,
    uav_alt: float,
    cfg: ScenarioConfig,
):
    """Per-user received powers and the cell throughput.

    The cell bandwidth is split evenly over the users; each user's SNR uses
    free-space loss over the 3D distance and the down-tilted antenna's
    vertical cut (the down-pointing antenna has no preferred azimuth).
    """
    rel = users - uav_xy
    r = np.linalg.norm(rel, axis=1)
    d3 = np.sqrt(r**2 + uav_alt**2)
    depression = np.degrees(np.arctan2(uav_alt, r))  # 90 deg = straight down
    gains = np.array([antenna_gain(180.0 - e, 0.0, cfg.pattern) for e in depression])
    p_rx = cfg.p_f_tx * gains * cfg.beta0_f / d3**2
    share = cfg.bandwidth_f / len(users)
    rate = float(np.sum(share * np.log2(1.0 + p_rx / cfg.sigma_f_sq)))
    return p_rx, rate


def generate_scenario(cfg: ScenarioConfig, seed: int) -> Scenario:
    """Drop users, cluster them into cells, and derive per-cell rate targets.

    Deterministic given ``(cfg, seed)``. A degenerate drop that leaves a cell
    empty is re-rolled with a derived seed, up to a small retry budget.
    """
    half = cfg.region_side / 2.0
    last_err = None
    for attempt in range(_KMEANS_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        users = cfg.region_center + rng.uniform(-half, half, size=(cfg.n_users, 2))
        try:
            labels, centroids, n_iter = cluster_users(
                users, cfg.m0, cfg.region_center, cfg.region_side,
                refine_steps=cfg.cluster_refine_steps,
            )
        except RuntimeError as exc:
            last_err = exc
            continue
        assignments = tuple(
            tuple(np.nonzero(labels == k)[0].tolist()) for k in range(cfg.m0)
        )
        p_f_rx = np.empty(cfg.n_users)
        c_m = np.empty(cfg.m0)
        for k, members in enumerate(assignments):
            idx = np.array(members)
            p_rx, rate = access_rate(users[idx], centroids[k], cfg.uav_altitude, cfg)
            p_f_rx[idx] = p_rx
            c_m[k] = rate
        return Scenario(
            users=users,
            uav_xy=centroids,
            uav_alt=np.full(cfg.m0, cfg.uav_altitude),
            assignments=assignments,
            p_f_rx=p_f_rx,
            c_m=c_m,
            bandwidth_f=cfg.bandwidth_f,
            sigma_f_sq=cfg.sigma_f_sq,
            seed=seed,
            clustering_iterations=n_iter,
        )
    raise RuntimeError(f"scenario generation failed after {_KMEANS_ATTEMPTS} attempts: {last_err}")
