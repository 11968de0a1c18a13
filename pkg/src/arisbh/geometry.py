"""Coordinate geometry, path loss, ULA responses and LoS channel construction.

Conventions
-----------
* Positions are numpy arrays: 3D ``[x, y, z]`` in meters, 2D ``[x, y]``.
* Both linear arrays (source and aerial surface) are aligned with the x-axis,
  so every steering angle enters only through
  ``sin(angle) = x-displacement / 3D distance``.
* All gains/powers are linear; dB appears only at I/O boundaries.
* The deterministic distance phase ``-2*pi*d/lambda`` and the random phase of
  a link are stored separately so tests can zero the random part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

_MIN_DISTANCE = 1e-12  # below this, two points are treated as coincident


def as_vec3(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise GeometryError(f"expected finite 3D point, got {p!r}")
    return p


def as_vec2(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise GeometryError(f"expected finite 2D point, got {p!r}")
    return p


def ris_position_3d(q, altitude: float) -> np.ndarray:
    """3D coordinates of the surface reference element from its 2D point."""
    q = as_vec2(q)
    return np.array([q[0], q[1], float(altitude)])


@dataclass(frozen=True)
class AntennaPattern:
    """Directional element pattern: parabolic attenuation with floors, in dB."""

    g_max_db: float = 8.0
    theta_h_deg: float = 65.0  # vertical half-power beamwidth
    phi_h_deg: float = 65.0  # horizontal half-power beamwidth
    sla_v_db: float = 30.0  # vertical side-lobe attenuation floor
    a_max_db: float = 30.0  # total attenuation floor

    @property
    def g_max(self) -> float:
        return float(10 ** (self.g_max_db / 10.0))


@dataclass(frozen=True)
class SourceArray:
    """Ground source: x-aligned ULA with a directional antenna.

    ``gain`` is the linear antenna gain toward the aerial surface (the source
    beam tracks the platform, so the boresight gain applies); ``pattern``
    describes the full directional characteristic.
    """

    m_antennas: int
    spacing_wavelengths: float = 0.5
    gain: float = 10 ** 0.8  # 8 dB
    p_max: float = 0.1  # W, 20 dBm
    pattern: AntennaPattern = None

    def __post_init__(self):
        if self.pattern is None:
            object.__setattr__(self, "pattern", AntennaPattern())
        if self.m_antennas < 1:
            raise ValueError("source array needs at least one antenna")
        if self.spacing_wavelengths <= 0:
            raise ValueError("antenna spacing must be positive")
        if self.gain <= 0:
            raise ValueError("antenna gain must be positive (linear scale)")


@dataclass(frozen=True)
class RisGeometry:
    """Aerial reflective surface: x-aligned ULA at fixed altitude."""

    n_elements: int
    spacing_wavelengths: float = 0.1
    altitude: float = 180.0  # m
    wavelength: float = 0.0857  # m, sub-6 GHz carrier

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("surface needs at least one element")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")


@dataclass(frozen=True)
class LosChannel:
    """One deterministic-LoS link with unit-modulus array structure.

    ``matrix`` holds the complex gains: shape (N, M) for the source->surface
    link, (N,) for a surface->UAV link (the vector ``h`` whose conjugate
    transpose multiplies from the left). Every entry has magnitude
    ``sqrt(path_loss)``.
    """

    matrix: np.ndarray
    path_loss: float
    random_phase: float
    distance_phase: float
    sin_arrival: float
    sin_departure: float

    @property
    def total_phase(self) -> float:
        return self.random_phase + self.distance_phase


def path_loss(beta0: float, a, b) -> float:
    """Inverse-square law: ``beta0 / ||a - b||^2``.

    ``beta0`` is the linear reference gain at 1 m. Raises
    :class:`GeometryError` for coincident endpoints.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.linalg.norm(a - b))
    if d < _MIN_DISTANCE:
        raise GeometryError("path loss undefined at zero distance")
    return beta0 / d**2


def sin_aod(q, altitude: float, target) -> float:
    """Sine of the departure angle from the surface toward ``target``.

    For an x-aligned ULA the steering phase depends only on
    ``(target.x - q.x) / ||[q, H] - target||``, which this returns.
    """
    q = as_vec2(q)
    target = as_vec3(target)
    ref = ris_position_3d(q, altitude)
    d = float(np.linalg.norm(ref - target))
    if d < _MIN_DISTANCE:
        raise GeometryError("angle undefined for coincident points")
    return float(target[0] - q[0]) / d


def sin_arrival_from_source(q, altitude: float, source=(0.0, 0.0, 0.0)) -> float:
    """Sine of the arrival angle at the surface of the wave from the source."""
    return sin_aod(q, altitude, source)


def sin_departure_at_source(q, altitude: float, source=(0.0, 0.0, 0.0)) -> float:
    """Sine of the departure angle at the (x-aligned) source ULA toward the surface."""
    source = as_vec3(source)
    ref = ris_position_3d(q, altitude)
    d = float(np.linalg.norm(ref - source))
    if d < _MIN_DISTANCE:
        raise GeometryError("source and surface coincide")
    return float(ref[0] - source[0]) / d


def array_response(count: int, spacing_wavelengths: float, sin_angle: float) -> np.ndarray:
    """Steering vector of an x-aligned ULA, entries ``exp(-j*2*pi*k*d*sin)``."""
    if count < 1:
        raise ValueError("array needs at least one element")
    k = np.arange(count)
    return np.exp(-2j * np.pi * k * spacing_wavelengths * sin_angle)


def build_channels(
    beta0: float,
    source: SourceArray,
    ris: RisGeometry,
    q,
    uav_positions,
    rng_seed: int,
    zero_random_phase: bool = False,
) -> tuple[LosChannel, list[LosChannel]]:
    """Construct the source->surface matrix and one surface->UAV vector per UAV.

    The source->surface link is the rank-1 outer product of the two steering
    vectors scaled by ``sqrt(path_loss)`` and a scalar phase; each
    surface->UAV link is a steering vector likewise scaled. Random phases are
    drawn uniform over [0, 2*pi) from a generator seeded with ``rng_seed``
    (set ``zero_random_phase`` to suppress them in tests).
    """
    q = as_vec2(q)
    ref = ris_position_3d(q, ris.altitude)
    rng = np.random.default_rng(rng_seed)

    d_s = float(np.linalg.norm(ref))
    beta_s = path_loss(beta0, ref, np.zeros(3))
    phi_h = 0.0 if zero_random_phase else float(rng.uniform(0.0, 2.0 * np.pi))
    dist_phase_h = -2.0 * np.pi * d_s / ris.wavelength
    sin_r = sin_arrival_from_source(q, ris.altitude)
    sin_t_s = sin_departure_at_source(q, ris.altitude)
    a_ris = array_response(ris.n_elements, ris.spacing_wavelengths, sin_r)
    a_src = array_response(source.m_antennas, source.spacing_wavelengths, sin_t_s)
    h_mat = (
        np.sqrt(beta_s)
        * np.exp(1j * (phi_h + dist_phase_h))
        * np.outer(a_ris, a_src.conj())
    )
    src_link = LosChannel(
        matrix=h_mat,
        path_loss=beta_s,
        random_phase=phi_h,
        distance_phase=dist_phase_h,
        sin_arrival=sin_r,
        sin_departure=sin_t_s,
    )

    uav_links = []
    for rho in uav_positions:
        rho = as_vec3(rho)
        beta_m = path_loss(beta0, ref, rho)
        d_m = float(np.linalg.norm(ref - rho))
        phi = 0.0 if zero_random_phase else float(rng.uniform(0.0, 2.0 * np.pi))
        dist_phase = -2.0 * np.pi * d_m / ris.wavelength
        sin_t = sin_aod(q, ris.altitude, rho)
        # Stored as the vector h; the receiver applies its conjugate transpose.
        h_vec = np.sqrt(beta_m) * np.exp(-1j * (phi + dist_phase)) * array_response(
            ris.n_elements, ris.spacing_wavelengths, sin_t
        )
        uav_links.append(
            LosChannel(
                matrix=h_vec,
                path_loss=beta_m,
                random_phase=phi,
                distance_phase=dist_phase,
                sin_arrival=sin_r,
                sin_departure=sin_t,
            )
        )
    return src_link, uav_links
