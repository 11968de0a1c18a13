"""Electrical model of the amplifying surface.

Amplification matrix, phase configuration, MRT precoding, the exact
matrix-product SNR oracle, the analytic (array-factor) SNR, beamforming gain
and its half-power width, and the power drawn by the amplifying array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .geometry import LosChannel, RisGeometry, SourceArray, sin_aod, sin_arrival_from_source

# |sin(pi*d*dphi)| below this is treated as a removable singularity of the
# array factor: avoids catastrophic cancellation on the main lobe where the
# optimizer operates.
_SINGULARITY_EPS = 1e-12


@dataclass(frozen=True)
class RisElectrical:
    """Per-deployment electrical state of the amplifying surface.

    ``alpha`` is the uniform per-element amplification factor (linear).
    Dynamic noise of power ``sigma_a_sq`` is injected per amplifying element;
    ``p_element`` is drawn by each element's control/bias hardware.
    """

    alpha: float
    alpha_max: float
    sigma_a_sq: float  # W
    p_element: float  # W
    p_max_a: float  # W

    def __post_init__(self):
        if not 1.0 < self.alpha <= self.alpha_max:
            raise ValueError(
                f"amplification factor must satisfy 1 < alpha <= alpha_max, "
                f"got alpha={self.alpha}, alpha_max={self.alpha_max}"
            )
        if min(self.sigma_a_sq, self.p_element, self.p_max_a) < 0:
            raise ValueError("powers must be non-negative")


@dataclass(frozen=True)
class LinkBudget:
    """Resolved SNR and rate of one backhaul link."""

    snr: float  # linear
    bandwidth: float  # Hz, total backhaul bandwidth
    n_shares: int  # equal sub-band split count
    noise_power: float  # W at the receiver

    @property
    def rate(self) -> float:
        return self.bandwidth / self.n_shares * np.log2(1.0 + self.snr)


def rate_from_snr(snr: float, bandwidth: float, n_shares: int) -> float:
    return bandwidth / n_shares * float(np.log2(1.0 + snr))


def snr_for_rate(rate: float, bandwidth: float, n_shares: int) -> float:
    """Inverse of :func:`rate_from_snr`: required SNR for a target rate."""
    return float(2.0 ** (n_shares * rate / bandwidth) - 1.0)


def mrt_precoder(source: SourceArray, sin_departure_source: float) -> np.ndarray:
    """Maximum-ratio transmit vector: steering vector scaled to unit norm."""
    from .geometry import array_response

    a = array_response(source.m_antennas, source.spacing_wavelengths, sin_departure_source)
    return a / np.sqrt(source.m_antennas)


def phase_shifts(
    q,
    ris: RisGeometry,
    align_point,
    n_elements: int,
    theta_bar: float = 0.0,
) -> np.ndarray:
    """Phases that combine the reflections coherently at ``align_point``.

    Element k of the (locally indexed) block gets
    ``theta_bar - 2*pi*k*d*(sin_departure(align) - sin_arrival(source))``,
    reduced mod 2*pi.
    """
    delta = sin_aod(q, ris.altitude, align_point) - sin_arrival_from_source(q, ris.altitude)
    k = np.arange(n_elements)
    theta = theta_bar - 2.0 * np.pi * k * ris.spacing_wavelengths * delta
    return np.mod(theta, 2.0 * np.pi)


def snr_exact(
    src_link: LosChannel,
    uav_link: LosChannel,
    gains,
    theta,
    precoder: np.ndarray,
    p_tx: float,
    source_gain: float,
    sigma_a_sq: float,
    sigma_sq: float,
) -> float:
    """Received SNR by direct matrix products; oracle for the analytic forms.

    ``gains`` may be a scalar (uniform amplification) or a length-N vector
    (arbitrary per-element amplification, e.g. zeros on idle elements).
    """
    n = src_link.matrix.shape[0]
    alphas = np.broadcast_to(np.asarray(gains, dtype=float), (n,))
    amp_phase = alphas * np.exp(1j * np.asarray(theta, dtype=float))  # diag(A @ Theta)

    h_conj = uav_link.matrix.conj()
    signal_amp = h_conj @ (amp_phase * (src_link.matrix @ precoder))
    signal = p_tx * source_gain * np.abs(signal_amp) ** 2
    # The phase matrix is unitary, so it drops out of the amplified-noise
    # norm; verified against the phase-carrying form in tests.
    dyn_noise = sigma_a_sq * float(np.sum((alphas * np.abs(uav_link.matrix)) ** 2))
    return float(signal / (dyn_noise + sigma_sq))


def beamforming_gain(delta_phi: float, n_bar: int, spacing_wavelengths: float) -> float:
    """Squared array factor ``|sin(pi*n*d*x) / sin(pi*d*x)|^2`` of an n-element block.

    At removable singularities (denominator and numerator both zero) returns
    the limit ``n_bar**2``. Peak gain is ``n_bar**2`` at ``delta_phi = 0``.
    """
    if n_bar < 1:
        raise ValueError("block needs at least one element")
    den = np.sin(np.pi * spacing_wavelengths * delta_phi)
    if abs(den) < _SINGULARITY_EPS:
        return float(n_bar**2)
    num = np.sin(np.pi * n_bar * spacing_wavelengths * delta_phi)
    return float((num / den) ** 2)


def block_response(delta_phi: float, n_bar: int, spacing_wavelengths: float) -> complex:
    """Complex block sum ``sum_k exp(j*2*pi*k*d*delta_phi)`` in closed form."""
    den = np.sin(np.pi * spacing_wavelengths * delta_phi)
    if abs(den) < _SINGULARITY_EPS:
        return complex(n_bar)
    num = np.sin(np.pi * n_bar * spacing_wavelengths * delta_phi)
    centroid = np.exp(1j * np.pi * (n_bar - 1) * spacing_wavelengths * delta_phi)
    return complex(centroid * num / den)


def assembled_gain(
    sin_uav: float,
    sin_arrival: float,
    group_offsets,
    group_align_sins,
    n_bar: int,
    spacing_wavelengths: float,
) -> float:
    """Array gain of a multi-block phase assembly toward one UAV, analytically.

    Block i starts at (0-based) element ``group_offsets[i]`` and is phase
    aligned to ``group_align_sins[i]``; the inter-block phase offsets are kept
    so the result matches the exact matrix evaluation for any geometry.
    """
    total = 0.0 + 0.0j
    for off, s_align in zip(group_offsets, group_align_sins):
        dphi = sin_uav - s_align
        chi = 2.0 * np.pi * off * spacing_wavelengths * (sin_uav - sin_arrival)
        total += np.exp(1j * chi) * block_response(dphi, n_bar, spacing_wavelengths)
    return float(np.abs(total) ** 2)


def hpbw(n_bar: int, spacing_wavelengths: float) -> float:
    """Half-power beamwidth of the block gain, in sin-angle units.

    Full width between the half-power points: ``0.8858 / (n_bar * d)``. The
    half-power level itself is reached at half this value on either side of
    the peak.
    """
    if n_bar < 1:
        raise ValueError("block needs at least one element")
    if spacing_wavelengths <= 0:
        raise ValueError("spacing must be positive")
    return 0.8858 / (n_bar * spacing_wavelengths)


def snr_closed_form(
    p_tx: float,
    source_gain: float,
    m_antennas: int,
    beta0: float,
    d_source: float,
    d_uav: float,
    gain_g: float,
    alpha: float,
    n_active: int,
    sigma_a_sq: float,
    sigma_sq: float,
) -> float:
    """Analytic SNR under MRT and uniform amplification.

    ``gain_g`` is the (alpha-free) array gain toward the UAV; the cascade
    distances enter as the product of squared link lengths.
    """
    beta_uav = beta0 / d_uav**2
    base = p_tx * source_gain * beta0**2 * m_antennas / (
        sigma_a_sq * beta_uav * n_active * alpha**2 + sigma_sq
    )
    return float(base * alpha**2 * gain_g / (d_source**2 * d_uav**2))


def active_power(
    alpha: float,
    n_active: int,
    m_antennas: int,
    beta_source: float,
    source_gain: float,
    sum_p_tx: float,
    sigma_a_sq: float,
    p_element: float,
    n_hardware: int | None = None,
) -> tuple[float, float]:
    """Reflected power and total power drawn by the amplifying surface.

    Returns ``(P_R, P_tot_a)`` with
    ``P_R = alpha^2 (n_active * M * beta_s * G_s * sum_P + n_active * sigma_a^2)``
    and ``P_tot_a = P_R + n_hardware * p_element`` (hardware power is drawn by
    every element, amplifying or idle; ``n_hardware`` defaults to ``n_active``).
    """
    if min(alpha, n_active, m_antennas, beta_source, source_gain, sum_p_tx, sigma_a_sq, p_element) < 0:
        raise ValueError("inputs must be non-negative")
    if n_hardware is None:
        n_hardware = n_active
    p_r = alpha**2 * (
        n_active * m_antennas * beta_source * source_gain * sum_p_tx + n_active * sigma_a_sq
    )
    return float(p_r), float(p_r + n_hardware * p_element)
