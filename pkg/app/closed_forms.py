"""
Closed-form limit constants and decay orders for the worked examples.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple, Union

from scipy import integrate
from scipy.special import gamma

from app.exceptions import DomainError, UnknownExampleError
from app.models import SpectralMeasure
from app.spectral_model import cone_mass
from app.stable_univariate import abs_moment, c_alpha

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderDescriptor:
    """P(X in hE) ~ h^-exponent (log h)^log_power"""

    exponent: float
    log_power: int = 0

    @property
    def has_log(self) -> bool:
        return self.log_power != 0

    def to_report(self) -> Dict[str, Any]:
        return {"exponent": self.exponent, "log_power": self.log_power}


def beta_factor(alpha: float) -> float:
    """alpha Gamma(2 alpha) Gamma(1 - alpha) / Gamma(1 + alpha) for alpha < 1"""
    return alpha * gamma(2.0 * alpha) * gamma(1.0 - alpha) / gamma(1.0 + alpha)


def ex1_i(alpha: float) -> float:
    return c_alpha(alpha) ** 2 / 4.0


def cone_integral(alpha: float, theta_lo: float, theta_hi: float) -> float:
    """int_A alpha (cos t sin t)^-(1 + alpha) dt over an arc inside the first quadrant"""
    if not (0.0 < theta_lo < theta_hi < math.pi / 2.0):
        raise DomainError("cone arc must lie strictly inside the first quadrant")
    value, _ = integrate.quad(
        lambda t: alpha * (math.cos(t) * math.sin(t)) ** (-(1.0 + alpha)),
        theta_lo, theta_hi, epsabs=1e-13, epsrel=1e-12,
    )
    return value


def ex1_ii_cone(alpha: float, theta_lo: float = math.pi / 8.0, theta_hi: float = 3.0 * math.pi / 8.0) -> float:
    return c_alpha(alpha) ** 2 / 8.0 * cone_integral(alpha, theta_lo, theta_hi)


def ex1_iii(alpha: float) -> float:
    """True limit of h^alpha P(X_1 > h, X_2 < 0)"""
    return c_alpha(alpha) / 4.0


def ex1_iii_bounds(alpha: float) -> Tuple[float, float]:
    """(L(interior, 1), lim L(dilated, 1))"""
    return 0.0, c_alpha(alpha) / 2.0


def ex2_lowalpha(alpha: float) -> float:
    if not alpha < 1.0:
        raise DomainError("the Beta-form constant needs alpha < 1")
    return c_alpha(alpha) ** 2 * beta_factor(alpha) / 4.0


def ex2_alpha1(alpha: float = 1.0) -> float:
    """Limit of (h^2 / log h) P(X in hE) at alpha = 1"""
    return c_alpha(1.0) ** 2 / 4.0


def ex2_highalpha(alpha: float) -> float:
    if not alpha > 1.0:
        raise DomainError("the first-moment constant needs alpha > 1")
    return c_alpha(alpha) * alpha * abs_moment(alpha, 1.0) / 4.0


def ex3_lowalpha(alpha: float, a: float = 0.5) -> float:
    if not alpha < 1.0:
        raise DomainError("the Beta-form constant needs alpha < 1")
    if not (0.0 < a < 1.0):
        raise DomainError("mixing weight a must lie in (0, 1)")
    w = a ** alpha
    return c_alpha(alpha) ** 2 / 4.0 * ((1.0 - w) ** 2 + w * (1.0 - w) * beta_factor(alpha))


def power_region_order(alpha: float, sigma: float = 0.5) -> OrderDescriptor:
    if math.isclose(alpha, sigma, rel_tol=1e-12):
        return OrderDescriptor(2.0 * alpha, 1)
    if alpha > sigma:
        return OrderDescriptor(alpha + sigma, 0)
    return OrderDescriptor(2.0 * alpha, 0)


def ex2_order(alpha: float) -> OrderDescriptor:
    if alpha < 1.0:
        return OrderDescriptor(2.0 * alpha, 0)
    if alpha == 1.0:
        return OrderDescriptor(2.0, 1)
    return OrderDescriptor(1.0 + alpha, 0)


def cone_ratio(alpha: float, theta_lo: float, theta_hi: float, measure: Optional[SpectralMeasure] = None) -> float:
    """lim P(X in Cone(A), |X| > h) / P(|X| > h) = Lambda(A) / Lambda(S^1)"""
    if measure is None:
        measure = SpectralMeasure([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
    return cone_mass(measure, theta_lo, theta_hi) / measure.total_mass


_REFERENCES: Dict[str, Callable[..., Union[float, Tuple[float, float], OrderDescriptor]]] = {
    "c_alpha": c_alpha,
    "ex1_i": ex1_i,
    "ex1_ii_cone": ex1_ii_cone,
    "ex1_iii": ex1_iii,
    "ex1_iii_bounds": ex1_iii_bounds,
    "ex2_lowalpha": ex2_lowalpha,
    "ex2_alpha1": ex2_alpha1,
    "ex2_highalpha": ex2_highalpha,
    "ex3_lowalpha": ex3_lowalpha,
    "power_region_order": power_region_order,
    "ex2_order": ex2_order,
    "cone_ratio": cone_ratio,
}


def reference_ids():
    return sorted(_REFERENCES)


def closed_form_reference(example_id: str, alpha: float, params: Optional[Dict[str, Any]] = None):
    """Evaluate a worked constant (or decay order) by id"""
    try:
        fn = _REFERENCES[example_id]
    except KeyError:
        raise UnknownExampleError(f"no closed form registered for '{example_id}'") from None
    return fn(alpha, **(params or {}))
