"""
Closed-form success probabilities, communication time, fidelity bound and
cavity signal-to-noise estimates.

Units: seconds, kilometres, hertz (cavity quantities in SI).
"""

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from scipy import constants

import config
from .common import ConfigError

PROBABILITY_FIELDS = ("eta_p", "eta_s", "eta_e1", "eta_e2", "eta_d", "p_d")
POSITIVE_FIELDS = ("r", "L_n", "L_att", "c")


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class ProtocolParams:
    eta_p: float
    eta_s: float
    eta_e1: float
    eta_e2: float
    eta_d: float
    r: float          # source repetition rate, Hz
    L_n: float        # total distance, km
    L_att: float      # fiber attenuation length, km
    n: int            # nesting level
    c: float          # light speed in fiber, km/s
    p_d: float = 0.0
    c0: Optional[float] = None

    def __post_init__(self):
        for name in PROBABILITY_FIELDS:
            value = getattr(self, name)
            if not _is_real(value) or not 0.0 <= value <= 1.0:
                raise ConfigError(f"protocol.{name}: must lie in [0, 1], got {value!r}")
        for name in POSITIVE_FIELDS:
            value = getattr(self, name)
            if not _is_real(value) or not value > 0:
                raise ConfigError(f"protocol.{name}: must be strictly positive, got {value!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 0:
            raise ConfigError(f"protocol.n: must be a non-negative integer, got {self.n!r}")
        if self.c0 is not None and (not _is_real(self.c0) or not self.c0 >= 0):
            raise ConfigError(f"protocol.c0: must be non-negative, got {self.c0!r}")

    @property
    def L0(self) -> float:
        """Elementary link length L_n / 2^n."""
        return self.L_n / 2 ** self.n

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class CavityParams:
    rho_n: float                     # atomic number density, m^-3
    L_a: float                       # ensemble length, m
    lambda_s: float                  # cavity mode wavelength, m
    Q: float
    g_c: Optional[float] = None      # rad/s
    gamma_s: Optional[float] = None  # rad/s
    N_a: Optional[float] = None

    def __post_init__(self):
        for name in ("Q", "lambda_s"):
            value = getattr(self, name)
            if not _is_real(value) or not value > 0:
                raise ConfigError(f"cavity.{name}: must be strictly positive, got {value!r}")
        for name in ("rho_n", "L_a"):
            value = getattr(self, name)
            if not _is_real(value) or not value >= 0:
                raise ConfigError(f"cavity.{name}: must be non-negative, got {value!r}")
        for name in ("g_c", "gamma_s", "N_a"):
            value = getattr(self, name)
            if value is not None and (not _is_real(value) or not value > 0):
                raise ConfigError(f"cavity.{name}: must be strictly positive, got {value!r}")

    @property
    def omega_s(self) -> float:
        return 2.0 * math.pi * constants.c / self.lambda_s

    @property
    def kappa(self) -> float:
        return self.omega_s / self.Q

    @property
    def k_s(self) -> float:
        return 2.0 * math.pi / self.lambda_s

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class RateBreakdown:
    p_r: float
    p_b: float
    p_i: float
    eta_t: float
    p_r_eme: float
    L0: float
    n: int
    T_l: Optional[float] = None
    T_tot: Optional[float] = None
    delta_F: Optional[float] = None

    def as_record(self) -> Dict[str, Any]:
        return asdict(self)


RATE_COLUMNS = tuple(f.name for f in fields(RateBreakdown))


def eme_vacuum_coefficient(params: ProtocolParams) -> float:
    """c0 of the stored EME state: explicit c0, else (1 - eta_p eta_s) / (eta_p eta_s)."""
    if params.c0 is not None:
        return params.c0
    stored = params.eta_p * params.eta_s
    if stored == 0:
        return math.inf
    return (1.0 - stored) / stored


def success_probs(params: ProtocolParams) -> RateBreakdown:
    eta_t = math.exp(-params.L0 / (2.0 * params.L_att))
    c0 = eme_vacuum_coefficient(params)
    p_r_eme = 0.0 if math.isinf(c0) else params.eta_e1 ** 2 * params.eta_d ** 2 / (2.0 * (c0 + 1.0) ** 2)
    return RateBreakdown(
        p_r=(params.eta_p * params.eta_s * params.eta_e1 * params.eta_d) ** 2 / 2.0,
        p_b=(params.eta_e2 * params.eta_d * eta_t) ** 2 / 2.0,
        p_i=(params.eta_e2 * params.eta_d) ** 2 / 2.0,
        eta_t=eta_t,
        p_r_eme=p_r_eme,
        L0=params.L0,
        n=params.n,
    )


def local_wait(params: ProtocolParams, probs: Optional[RateBreakdown] = None) -> float:
    probs = probs or success_probs(params)
    if probs.p_r == 0:
        return math.inf
    return 1.0 / (params.r * probs.p_r)


def total_time(params: ProtocolParams) -> float:
    """
    Mean time to share a PME state over L_n:
    (L0/c + 1/(r p_r)) / (p_b * p_i^n) * (3/2)^n. Infinite if any stage never succeeds.
    """
    probs = success_probs(params)
    if probs.p_r == 0 or probs.p_b == 0 or (params.n > 0 and probs.p_i == 0):
        return math.inf
    elementary = params.L0 / params.c + local_wait(params, probs)
    return elementary / (probs.p_b * probs.p_i ** params.n) * 1.5 ** params.n


def fidelity_imperfection(n: int, p_d: float) -> float:
    """Dark-count fidelity loss 2^(n+2) p_d, capped at 1."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ConfigError(f"n: must be a non-negative integer, got {n!r}")
    if not 0.0 <= p_d <= 1.0:
        raise ConfigError(f"p_d: must lie in [0, 1], got {p_d!r}")
    return min(1.0, 2 ** (n + 2) * p_d)


def rate_breakdown(params: ProtocolParams) -> RateBreakdown:
    probs = success_probs(params)
    return replace(
        probs,
        T_l=local_wait(params, probs),
        T_tot=total_time(params),
        delta_F=fidelity_imperfection(params.n, params.p_d),
    )


def free_space_factor(cav: CavityParams) -> float:
    return 3.0 * cav.rho_n * cav.L_a * cav.lambda_s ** 2 / (4.0 * math.pi ** 2)


def free_space_snr(cav: CavityParams) -> float:
    """Signal-to-noise ratio without a cavity, 3 rho_n L_a / k_s^2."""
    return 3.0 * cav.rho_n * cav.L_a / cav.k_s ** 2


def cavity_snr(cav: CavityParams) -> float:
    """Signal-to-noise ratio with a quality-factor-Q cavity."""
    return free_space_factor(cav) * cav.Q


def coherent_snr(cav: CavityParams) -> float:
    """4 N_a g_c^2 / (kappa gamma_s), with kappa = omega_s / Q."""
    missing = [name for name in ("g_c", "gamma_s", "N_a") if getattr(cav, name) is None]
    if missing:
        raise ConfigError(f"cavity.{missing[0]}: required for the coherent-rate estimate")
    return 4.0 * cav.N_a * cav.g_c ** 2 / (cav.kappa * cav.gamma_s)


def sweep(params: ProtocolParams, axis: str, values: Sequence[float]) -> List[Tuple[Any, RateBreakdown]]:
    """One (value, RateBreakdown) row per value, in input order."""
    if axis not in ProtocolParams.field_names():
        raise ConfigError(f"axis: unknown parameter {axis!r}")
    rows = []
    for value in values:
        if axis == "n":
            if float(value) != int(value):
                raise ConfigError(f"axis: n must be an integer, got {value!r}")
            value = int(value)
        rows.append((value, rate_breakdown(replace(params, **{axis: value}))))
    return rows


def reference_comparison(params: ProtocolParams) -> List[Dict[str, Any]]:
    """This scheme's total time next to the cited DLCZ and SPS totals."""
    t_tot = total_time(params)
    rows = [{"protocol": "pme", "T_tot": t_tot, "speedup": 1.0}]
    for name, reference in (("sps", config.SPS_TOTAL_TIME), ("dlcz", config.DLCZ_TOTAL_TIME)):
        rows.append({"protocol": name, "T_tot": reference, "speedup": reference / t_tot})
    return rows
