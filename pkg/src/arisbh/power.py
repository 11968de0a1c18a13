"""Closed-form amplification gain, per-UAV transmit powers, and certificates.

With placement, partitioning and phases fixed, the total consumed power is a
convex function ``A*alpha^2 + B/alpha^2 + C`` of the squared amplification
gain; its interior optimum follows from AM-GM equality and is clamped at the
hardware maximum. Per-UAV transmit powers then invert the rate equation
exactly. Budget feasibility is certified post hoc, and a log-power
sensitivity of the objective to detuning the gain is available in closed
form whenever the clamp is inactive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SensitivityUndefinedError, UnreachableUavError


@dataclass(frozen=True)
class PowerProblem:
    """Everything the power stage needs, after geometry is frozen.

    Per-UAV arrays: target rates ``c_m`` (bit/s), surface-to-UAV distances
    ``d_m`` (m) and array gains ``g_m``. ``n_active`` counts amplifying
    elements (noise injection and reflected power scale with it);
    ``n_hardware`` counts powered elements (control/bias power).
    """

    c_m: np.ndarray
    d_m: np.ndarray
    g_m: np.ndarray
    d_source: float
    bandwidth: float
    m0_shares: int
    source_gain: float
    beta0: float
    m_antennas: int
    n_active: int
    sigma_sq: float
    sigma_a_sq: float
    p_element: float
    p_max: float
    p_max_a: float
    alpha_max: float
    n_hardware: int | None = None

    def __post_init__(self):
        for name in ("c_m", "d_m", "g_m"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if self.n_hardware is None:
            object.__setattr__(self, "n_hardware", self.n_active)
        if np.any(self.c_m < 0):
            raise ValueError("target rates must be non-negative")
        if np.any(self.d_m <= 0) or self.d_source <= 0:
            raise ValueError("distances must be positive")
        if np.any(self.g_m < 0):
            raise ValueError("array gains must be non-negative")
        if min(self.p_max, self.p_max_a, self.alpha_max) <= 0:
            raise ValueError("budgets and the gain cap must be positive")

    @property
    def m0(self) -> int:
        return self.c_m.shape[0]

    @property
    def gamma_m(self) -> np.ndarray:
        """Required SNR per UAV: ``2^(shares * rate / bandwidth) - 1``."""
        return 2.0 ** (self.m0_shares * self.c_m / self.bandwidth) - 1.0

    @property
    def beta_source(self) -> float:
        return self.beta0 / self.d_source**2

    @property
    def omega0(self) -> np.ndarray:
        """Per-UAV noise-to-link coefficient of the power closed form."""
        if np.any(self.g_m == 0):
            raise UnreachableUavError(
                f"zero array gain for UAV(s) {np.nonzero(self.g_m == 0)[0].tolist()}"
            )
        return self.sigma_sq * self.gamma_m / (
            self.source_gain * self.beta0**2 * self.m_antennas * self.g_m
        )

    @property
    def omega1(self) -> float:
        return self.n_active * self.m_antennas * self.beta0 * self.source_gain

    @property
    def omega2(self) -> float:
        return (self.sigma_a_sq / self.sigma_sq) * self.n_active * self.beta0


@dataclass(frozen=True)
class AlphaStar:
    """Chosen amplification factor and whether the hardware cap clipped it."""

    value: float
    clamped: bool
    interior: float  # unclamped AM-GM optimum


@dataclass(frozen=True)
class FeasibilityReport:
    feasible_source: bool
    feasible_ris: bool
    margin_source_w: float  # budget minus required, at the source
    margin_ris_w: float  # reflection-power budget minus required
    sum_pm_w: float
    rhs_cap_w: float  # binding upper bound on the transmit-power sum
    binding: str  # "source" | "ris"

    @property
    def feasible(self) -> bool:
        return self.feasible_source and self.feasible_ris


@dataclass(frozen=True)
class PowerReport:
    """Objective decomposition and certificates of one solved deployment."""

    alpha_star: float
    alpha_clamped: bool
    p_m: np.ndarray
    sum_pm: float
    p_tot_s: float
    p_r: float
    p_tot_a: float
    obj: float
    eta: float
    feasible_source: bool
    feasible_ris: bool
    binding: str
    c_m: np.ndarray = field(default=None)

    @property
    def feasible(self) -> bool:
        return self.feasible_source and self.feasible_ris


def objective_decomposition(problem: PowerProblem):
    """Coefficients ``(A, B, C)`` of ``obj(alpha) = A*alpha^2 + B/alpha^2 + C``.

    ``C`` already includes the element hardware power.
    """
    om0 = problem.omega0
    d2 = problem.d_m**2
    ds2 = problem.d_source**2
    a = problem.n_active * problem.sigma_a_sq + float(np.sum(om0)) * problem.omega1 * problem.omega2
    b = float(np.sum(om0 * ds2 * d2))
    c = float(np.sum(om0 * (ds2 * problem.omega2 + d2 * problem.omega1)))
    c += problem.n_hardware * problem.p_element
    return a, b, c


def alpha_star(problem: PowerProblem) -> AlphaStar:
    """Gain minimizing the total power: fourth root of B/A, capped at alpha_max."""
    a, b, _ = objective_decomposition(problem)
    interior = float((b / a) ** 0.25)
    if interior > problem.alpha_max:
        return AlphaStar(value=problem.alpha_max, clamped=True, interior=interior)
    return AlphaStar(value=interior, clamped=False, interior=interior)


def transmit_powers(problem: PowerProblem, alpha: float) -> np.ndarray:
    """Per-UAV source powers that meet the target rates exactly at gain ``alpha``.

    Inverts the analytic SNR, so feeding the result back through the rate
    equation reproduces ``c_m`` to machine precision. Zero-rate UAVs get zero
    power; zero-gain UAVs are unreachable.
    """
    if alpha <= 0:
        raise ValueError("amplification factor must be positive")
    om0 = problem.omega0  # raises UnreachableUavError on zero gains
    d2 = problem.d_m**2
    ds2 = problem.d_source**2
    return om0 * ds2 * (d2 / alpha**2 + problem.omega2)


def objective(problem: PowerProblem, alpha: float, p_m) -> float:
    """Total consumed power at a given gain and transmit-power vector.

    ``(1 + alpha^2*N*M*beta_s*G_s) * sum(P) + alpha^2*N*sigma_a^2 + N_hw*P_E``.
    """
    p_m = np.asarray(p_m, dtype=float)
    sum_p = float(np.sum(p_m))
    refl = alpha**2 * problem.n_active * problem.m_antennas * problem.beta_source * problem.source_gain
    return (
        (1.0 + refl) * sum_p
        + alpha**2 * problem.n_active * problem.sigma_a_sq
        + problem.n_hardware * problem.p_element
    )


def sum_power_split(problem: PowerProblem, alpha: float) -> tuple[float, float]:
    """Rate-matched transmit-power sum as (thermal 1/alpha^2 part, noise floor).

    Mirrors the certificate algebra: sum(P) = ds^2/(G*b0^2*M) *
    (sigma^2/alpha^2 * sum(Gamma d^2/g) + sigma_a^2*N*b0 * sum(Gamma/g)).
    """
    if np.any(problem.g_m == 0):
        raise UnreachableUavError("zero array gain")
    gam = problem.gamma_m
    pref = problem.d_source**2 / (problem.source_gain * problem.beta0**2 * problem.m_antennas)
    thermal = pref * problem.sigma_sq / alpha**2 * float(np.sum(gam * problem.d_m**2 / problem.g_m))
    floor = pref * problem.sigma_a_sq * problem.n_active * problem.beta0 * float(
        np.sum(gam / problem.g_m)
    )
    return thermal, floor


def transmit_cap(problem: PowerProblem, alpha: float) -> tuple[float, str]:
    """Upper bound on sum(P) from the two budgets, and which branch binds.

    The source budget caps ``G_s * sum(P)``; the surface budget caps the
    reflected power ``alpha^2 (N M beta_s G_s sum(P) + N sigma_a^2)``.
    Element hardware power is accounted in the objective but not charged
    against the reflection budget.
    """
    src_cap = problem.p_max / problem.source_gain
    refl_coeff = alpha**2 * problem.n_active * problem.m_antennas * problem.beta_source * problem.source_gain
    ris_cap = (problem.p_max_a - alpha**2 * problem.n_active * problem.sigma_a_sq) / refl_coeff
    if src_cap <= ris_cap:
        return float(src_cap), "source"
    return float(ris_cap), "ris"


def feasibility(problem: PowerProblem, alpha: float, p_m) -> FeasibilityReport:
    """Post-solution budget certificates; reports, never raises.

    Source: ``P_max >= ds^2/(b0^2 M) (sigma^2/a^2 sum(G d^2/g) + sa^2 N b0 sum(G/g))``.
    Surface: reflection power within ``P_max_a``:
    ``P_max_a >= a^2 N sa^2 + N beta_s ds^2/b0^2 (sigma^2 sum(G d^2/g) + a^2 sa^2 N b0 sum(G/g))``.
    """
    p_m = np.asarray(p_m, dtype=float)
    sum_p = float(np.sum(p_m))

    thermal, floor = sum_power_split(problem, alpha)
    required_source = problem.source_gain * (thermal + floor)
    margin_source = problem.p_max - required_source

    refl_coeff = alpha**2 * problem.n_active * problem.m_antennas * problem.beta_source * problem.source_gain
    required_ris = refl_coeff * (thermal + floor) + alpha**2 * problem.n_active * problem.sigma_a_sq
    margin_ris = problem.p_max_a - required_ris

    cap, binding = transmit_cap(problem, alpha)
    return FeasibilityReport(
        feasible_source=bool(required_source <= problem.p_max),
        feasible_ris=bool(required_ris <= problem.p_max_a),
        margin_source_w=float(margin_source),
        margin_ris_w=float(margin_ris),
        sum_pm_w=sum_p,
        rhs_cap_w=cap,
        binding=binding,
    )


def sensitivity(problem: PowerProblem, alpha: AlphaStar, epsilon: float):
    """Log-power increase when the gain is detuned to ``alpha*(1+epsilon)``.

    Returns ``(closed_form, direct)``: the closed form exploits AM-GM
    equality at the interior optimum, the direct value re-evaluates the
    objective. Undefined when the clamp is engaged (the interior optimum no
    longer applies).
    """
    if alpha.clamped:
        raise SensitivityUndefinedError(
            "sensitivity is defined only at the interior optimum; the gain cap engaged"
        )
    a, b, c = objective_decomposition(problem)
    root = np.sqrt(a * b)
    # (1+e)^2 + (1+e)^-2 - 2 == (e*(2+e))^2 / (1+e)^2, cancellation-free for
    # small detunings
    excess = (epsilon * (2.0 + epsilon)) ** 2 / (1.0 + epsilon) ** 2
    closed = float(np.log1p(excess * root / (2.0 * root + c)))

    a_val = alpha.value
    obj_opt = objective(problem, a_val, transmit_powers(problem, a_val))
    a_det = a_val * (1.0 + epsilon)
    obj_det = objective(problem, a_det, transmit_powers(problem, a_det))
    direct = float(np.log(obj_det / obj_opt))
    return closed, direct


def energy_efficiency(sum_rates: float, sum_p_tx: float, p_surface_total: float,
                      p_gbs: float = 0.0, p_ap: float = 0.0, p_uav_bs_total: float = 0.0) -> float:
    """Delivered rate sum over total consumed power (bit/J)."""
    if min(p_gbs, p_ap, p_uav_bs_total) < 0:
        raise ValueError("offsets must be non-negative")
    denom = sum_p_tx + p_uav_bs_total + p_surface_total + p_gbs + p_ap
    if denom <= 0:
        raise ValueError("total consumed power must be positive")
    return float(sum_rates / denom)
