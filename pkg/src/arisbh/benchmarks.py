"""End-to-end planning pipeline and the benchmark schemes.

``solve_backhaul`` runs the one-pass pipeline (placement -> partitioning ->
amplification gain -> transmit powers -> certificates) for the amplifying
surface; the passive benchmark reuses the identical pipeline with unit gain,
no amplifier noise and no element hardware power; the AF-relay benchmark
replaces the surface with a two-hop amplify-and-forward platform and accounts
its RF-chain circuit power.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import RisGeometry, SourceArray, ris_position_3d
from .partition import Partition, assemble_phases, choose_partition
from .placement import PlacementProblem, PlacementSolution, consensus_placement
from .power import (
    AlphaStar,
    PowerProblem,
    PowerReport,
    alpha_star,
    energy_efficiency,
    feasibility,
    transmit_powers,
)
from .riscore import beamforming_gain
from .scenario import Scenario


class WorkMeter:
    """Deterministic algorithmic-work counter (1 unit ~ one elementary step).

    Used for the reproducible ``runtime_ms`` column: wall-clock timing is not
    byte-stable across runs, counted work is.
    """

    def __init__(self):
        self.units = 0.0

    def add(self, n: float):
        self.units += float(n)

    @property
    def runtime_ms(self) -> float:
        return self.units / 1000.0


@dataclass(frozen=True)
class SystemParams:
    """Backhaul-system constants shared by every scheme."""

    source: SourceArray
    ris: RisGeometry
    beta0: float  # backhaul reference path gain at 1 m, linear
    bandwidth_b: float  # Hz
    sigma_sq: float  # W, receiver noise
    sigma_a_sq: float  # W, per-element amplifier noise
    p_element: float  # W
    alpha_max: float  # linear
    p_max: float  # W, source transmit budget
    p_max_a: float  # W, surface reflection budget
    delta0_db: float = -5.0  # detuning of alpha^2, dB
    placement_delta: float = 0.1
    placement_repass: bool = False
    p_gbs: float = 0.0  # W, constant offsets entering only the efficiency
    p_ap: float = 0.0
    p_uav_bs: float = 0.0  # W per UAV


@dataclass(frozen=True)
class Deployment:
    """Full decision vector of one solved scheme plus its power report."""

    method: str
    q_star: np.ndarray
    placement: PlacementSolution
    partition: Partition
    theta: np.ndarray
    active_mask: np.ndarray
    alpha: AlphaStar
    problem: PowerProblem
    report: PowerReport


def placement_regularizers(sys: SystemParams, alpha_seed: float, sigma_a_sq: float):
    """Amplification-dependent placement regularizers (m^2).

    The placement stage precedes the gain stage, so the gain entering the
    regularizers is seeded with the hardware maximum (the later-solved gain
    can only be smaller; an optional re-pass re-places at the solved gain).
    """
    n = sys.ris.n_elements
    om1 = alpha_seed**2 * n * sys.source.m_antennas * sys.beta0 * sys.source.gain
    om2 = alpha_seed**2 * (sigma_a_sq / sys.sigma_sq) * n * sys.beta0
    return om1, om2


def _place(scenario: Scenario, sys: SystemParams, alpha_seed: float, sigma_a_sq: float,
           work: WorkMeter | None):
    om1, om2 = placement_regularizers(sys, alpha_seed, sigma_a_sq)
    problem = PlacementProblem(
        uav_xy=scenario.uav_xy,
        uav_alt=scenario.uav_alt,
        ris_altitude=sys.ris.altitude,
        omega_tilde_1=om1,
        omega_tilde_2=om2,
        delta=sys.placement_delta,
    )
    sol = consensus_placement(problem)
    if work is not None:
        work.add(scenario.m0 * (1 + sol.iterations))
    return sol


def build_power_problem(scenario: Scenario, sys: SystemParams, q_star, part: Partition,
                        sigma_a_sq: float, p_element: float) -> PowerProblem:
    ref = ris_position_3d(q_star, sys.ris.altitude)
    d_m = np.linalg.norm(scenario.uav_positions - ref, axis=1)
    g_m = np.array(
        [beamforming_gain(d, part.n_bar, sys.ris.spacing_wavelengths) for d in part.delta_phi]
    )
    return PowerProblem(
        c_m=scenario.c_m,
        d_m=d_m,
        g_m=g_m,
        d_source=float(np.linalg.norm(ref)),
        bandwidth=sys.bandwidth_b,
        m0_shares=scenario.m0,
        source_gain=sys.source.gain,
        beta0=sys.beta0,
        m_antennas=sys.source.m_antennas,
        n_active=part.l * part.n_bar,
        n_hardware=sys.ris.n_elements,
        sigma_sq=sys.sigma_sq,
        sigma_a_sq=sigma_a_sq,
        p_element=p_element,
        p_max=sys.p_max,
        p_max_a=sys.p_max_a,
        alpha_max=sys.alpha_max,
    )


def _make_report(problem: PowerProblem, alpha: AlphaStar, p_m, scenario: Scenario,
                 sys: SystemParams, include_reflection: bool) -> PowerReport:
    sum_p = float(np.sum(p_m))
    if include_reflection:
        refl = alpha.value**2 * (
            problem.n_active * problem.m_antennas * problem.beta_source * problem.source_gain * sum_p
            + problem.n_active * problem.sigma_a_sq
        )
    else:
        refl = 0.0  # passive surface: nothing is drawn to re-radiate
    p_tot_a = refl + problem.n_hardware * problem.p_element
    obj = sum_p + p_tot_a
    feas = feasibility(problem, alpha.value, p_m)
    eta = energy_efficiency(
        sum_rates=float(np.sum(scenario.c_m)),
        sum_p_tx=sum_p,
        p_surface_total=p_tot_a,
        p_gbs=sys.p_gbs,
        p_ap=sys.p_ap,
        p_uav_bs_total=sys.p_uav_bs * scenario.m0,
    )
    return PowerReport(
        alpha_star=alpha.value,
        alpha_clamped=alpha.clamped,
        p_m=np.asarray(p_m, dtype=float),
        sum_pm=sum_p,
        p_tot_s=problem.source_gain * sum_p,
        p_r=refl,
        p_tot_a=p_tot_a,
        obj=obj,
        eta=eta,
        feasible_source=feas.feasible_source,
        feasible_ris=feas.feasible_ris,
        binding=feas.binding,
        c_m=scenario.c_m.copy(),
    )


def solve_backhaul(
    scenario: Scenario,
    sys: SystemParams,
    mode: str = "active",
    forced_alpha: float | None = None,
    work: WorkMeter | None = None,
) -> Deployment:
    """One-pass planning of the aerial surface for a scenario.

    ``mode`` is ``"active"`` (gain optimized, clamped at the hardware cap) or
    ``"passive"`` (unit gain, no amplifier noise, no element hardware power,
    objective reduces to the transmit-power sum). ``forced_alpha`` overrides
    the optimizer, e.g. for detuning studies.
    """
    if mode == "active":
        sigma_a_sq, p_element = sys.sigma_a_sq, sys.p_element
        alpha_seed = sys.alpha_max
    elif mode == "passive":
        sigma_a_sq, p_element = 0.0, 0.0
        alpha_seed = 1.0
    else:
        raise ValueError(f"unknown mode {mode!r}")

    sol = _place(scenario, sys, alpha_seed, sigma_a_sq, work)
    part = choose_partition(sol.q_star, sys.ris, scenario.uav_positions)
    theta, active_mask = assemble_phases(sol.q_star, sys.ris, part)
    if work is not None:
        work.add(part.l * scenario.m0 + sys.ris.n_elements)

    problem = build_power_problem(scenario, sys, sol.q_star, part, sigma_a_sq, p_element)
    if mode == "passive":
        alpha = AlphaStar(value=1.0, clamped=False, interior=1.0)
    elif forced_alpha is not None:
        alpha = AlphaStar(value=float(forced_alpha), clamped=False, interior=float(forced_alpha))
    else:
        alpha = alpha_star(problem)
        if sys.placement_repass and not alpha.clamped:
            sol = _place(scenario, sys, alpha.value, sigma_a_sq, work)
            part = choose_partition(sol.q_star, sys.ris, scenario.uav_positions)
            theta, active_mask = assemble_phases(sol.q_star, sys.ris, part)
            problem = build_power_problem(scenario, sys, sol.q_star, part, sigma_a_sq, p_element)
            alpha = alpha_star(problem)
    p_m = transmit_powers(problem, alpha.value)
    if work is not None:
        work.add(4 * scenario.m0)

    report = _make_report(problem, alpha, p_m, scenario, sys, include_reflection=(mode == "active"))
    return Deployment(
        method=mode,
        q_star=sol.q_star,
        placement=sol,
        partition=part,
        theta=theta,
        active_mask=active_mask,
        alpha=alpha,
        problem=problem,
        report=report,
    )


def passive_baseline(scenario: Scenario, sys: SystemParams,
                     work: WorkMeter | None = None) -> Deployment:
    """Aerial passive surface: identical pipeline at unit gain."""
    return solve_backhaul(scenario, sys, mode="passive", work=work)


def detuned_deployment(scenario: Scenario, sys: SystemParams,
                       work: WorkMeter | None = None) -> Deployment:
    """Amplifying surface with the gain detuned by ``delta0_db`` (on alpha^2)."""
    optimal = solve_backhaul(scenario, sys, mode="active", work=work)
    alpha_det = optimal.alpha.value * 10.0 ** (sys.delta0_db / 20.0)
    p_m = transmit_powers(optimal.problem, alpha_det)
    alpha = AlphaStar(value=alpha_det, clamped=False, interior=optimal.alpha.interior)
    report = _make_report(optimal.problem, alpha, p_m, scenario, sys, include_reflection=True)
    return replace(optimal, method="detuned", alpha=alpha, report=report)


@dataclass(frozen=True)
class AfRelayConfig:
    """Aerial AF relay: element count, per-chain component powers, placement."""

    n_elements: int
    p_dac_mix_filt: float  # W per element (DAC + mixer + filter)
    p_syn: float = 0.05  # W, frequency synthesizer
    relay_frac: float = 0.5  # position along the source -> region-center axis
    relay_p_max: float = 0.1  # W, relay transmit budget

    def __post_init__(self):
        if min(self.p_dac_mix_filt, self.p_syn, self.relay_p_max) < 0:
            raise ValueError("powers must be non-negative")
        if not 0.0 < self.relay_frac < 1.0:
            raise ValueError("relay must sit strictly between source and cells")

    @property
    def p_circ(self) -> float:
        return self.n_elements * self.p_dac_mix_filt + self.p_syn


@dataclass(frozen=True)
class AfRelayResult:
    relay_position: np.ndarray
    p_src: np.ndarray  # per-UAV source transmit power
    p_relay: np.ndarray  # per-UAV relay transmit power
    p_circ: float
    obj: float
    eta: float
    feasible: bool
    snr_hop1: np.ndarray


def af_end_to_end_snr(snr1: float, snr2: float) -> float:
    """Variable-gain AF cascade: ``g1*g2 / (g1 + g2 + 1)``."""
    return snr1 * snr2 / (snr1 + snr2 + 1.0)


def _bisect_relay_power(gamma_target, snr1, hop2_coeff, p_cap, iters=80):
    """Smallest relay power meeting the target SNR, or None above the cap."""

    def achieved(p):
        return af_end_to_end_snr(snr1, hop2_coeff * p)

    if achieved(p_cap) < gamma_target:
        return None
    lo, hi = 0.0, p_cap
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if achieved(mid) >= gamma_target:
            hi = mid
        else:
            lo = mid
    return hi


def af_baseline(scenario: Scenario, sys: SystemParams, cfg: AfRelayConfig,
                region_center, work: WorkMeter | None = None) -> AfRelayResult:
    """Two-hop AF relay benchmark at matched per-UAV rates.

    The relay hovers on the source -> region-center axis at the surface
    altitude. Hop 1 uses MRT at the source and combining over the relay
    array; hop 2 uses MRT from the relay to each (single-antenna) UAV. The
    source spends an equal share of its budget per UAV; each relay power is
    bisected so the end-to-end rate meets the target. Totals follow the
    relay power accounting with per-chain circuit power.
    """
    center = np.asarray(region_center, dtype=float)
    relay = np.array([cfg.relay_frac * center[0], cfg.relay_frac * center[1], sys.ris.altitude])
    d1 = float(np.linalg.norm(relay))
    gamma = 2.0 ** (scenario.m0 * scenario.c_m / sys.bandwidth_b) - 1.0

    p_src = np.full(scenario.m0, sys.p_max / sys.source.gain / scenario.m0)
    snr1 = (
        p_src
        * sys.source.gain
        * sys.source.m_antennas
        * cfg.n_elements
        * sys.beta0
        / (d1**2 * sys.sigma_sq)
    )

    p_relay = np.empty(scenario.m0)
    feasible = True
    for m in range(scenario.m0):
        d2 = float(np.linalg.norm(scenario.uav_positions[m] - relay))
        hop2_coeff = cfg.n_elements * sys.beta0 / (d2**2 * sys.sigma_sq)
        p = _bisect_relay_power(gamma[m], snr1[m], hop2_coeff, cfg.relay_p_max)
        if p is None:
            feasible = False
            p = cfg.relay_p_max
        p_relay[m] = p
        if work is not None:
            work.add(160)
    if float(np.sum(p_relay)) > cfg.relay_p_max:
        feasible = False

    obj = float(np.sum(p_src) + np.sum(p_relay) + cfg.p_circ)
    eta = energy_efficiency(
        sum_rates=float(np.sum(scenario.c_m)),
        sum_p_tx=float(np.sum(p_src)),
        p_surface_total=float(np.sum(p_relay)) + cfg.p_circ,
        p_gbs=sys.p_gbs,
        p_ap=sys.p_ap,
        p_uav_bs_total=sys.p_uav_bs * scenario.m0,
    )
    return AfRelayResult(
        relay_position=relay,
        p_src=p_src,
        p_relay=p_relay,
        p_circ=cfg.p_circ,
        obj=obj,
        eta=eta,
        feasible=feasible,
        snr_hop1=snr1,
    )
