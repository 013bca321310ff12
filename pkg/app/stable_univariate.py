"""
Univariate symmetric alpha-stable numerics.

S denotes the standard symmetric law with characteristic function
exp(-|theta|^alpha). Densities and distribution functions are obtained by
Fourier inversion near the origin and by the asymptotic tail series
f(x) = (1/pi) sum_k (-1)^(k+1) Gamma(k alpha + 1)/k! sin(k pi alpha/2) x^-(k alpha + 1)
beyond a per-alpha crossover where both agree.
"""

import logging
import math
import threading
import warnings
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma, gammaln
from scipy.stats import levy_stable

from app.exceptions import ConvergenceError, DomainError
from app.models import check_alpha
from tail_config import TailConfig

logger = logging.getLogger(__name__)

ALPHA_ONE_PATCH = 1e-6
_CROSSOVER_GRID = np.geomspace(1.5, 400.0, 48)


def c_alpha(alpha: float) -> float:
    """Tail constant with 2 h^alpha P(S >= h) -> C_alpha"""
    alpha = check_alpha(alpha)
    if abs(alpha - 1.0) < ALPHA_ONE_PATCH:
        return 2.0 / math.pi
    return (1.0 - alpha) / (gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2.0))


def _quad_pdf(alpha: float, x: float) -> Tuple[float, float]:
    """(1/pi) int_0^inf cos(x t) exp(-t^alpha) dt and its error estimate"""
    x = abs(float(x))
    if x == 0.0:
        return gamma(1.0 + 1.0 / alpha) / math.pi, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(
            lambda t: math.exp(-t ** alpha), 0.0, np.inf,
            weight="cos", wvar=x, limlst=200, limit=200,
            epsabs=TailConfig.QUAD_ABS_TOL * math.pi,
        )
    return value / math.pi, error / math.pi


def _quad_sf(alpha: float, x: float) -> Tuple[float, float]:
    """1 - F(x) for x > 0 from 1/2 - (1/pi) int_0^inf sin(x t) exp(-t^alpha)/t dt"""
    x = float(x)
    if x == 0.0:
        return 0.5, 0.0
    split = math.pi / x
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, head_err = integrate.quad(
            lambda t: x * np.sinc(x * t / math.pi) * math.exp(-t ** alpha), 0.0, split,
            limit=200, epsabs=TailConfig.QUAD_ABS_TOL,
        )
        tail, tail_err = integrate.quad(
            lambda t: math.exp(-t ** alpha) / t, split, np.inf,
            weight="sin", wvar=x, limlst=200, limit=200,
            epsabs=TailConfig.QUAD_ABS_TOL * math.pi,
        )
    return 0.5 - (head + tail) / math.pi, (head_err + tail_err) / math.pi


class AlphaConstants:
    """Per-alpha constants, series coefficients and interpolation tables"""

    def __init__(self, alpha: float):
        self.alpha = check_alpha(alpha)
        self.c_alpha = c_alpha(self.alpha)
        self.abs_moment_cache: Dict[float, float] = {}

        k = np.arange(1, TailConfig.SERIES_MAX_TERMS + 1, dtype=float)
        self.k_index = k
        sines = np.sin(k * math.pi * self.alpha / 2.0)
        self.log_envelope = gammaln(k * self.alpha + 1.0) - gammaln(k + 1.0)
        self.log_coeff = self.log_envelope + np.log(np.abs(sines) + 1e-300) - math.log(math.pi)
        self.signs = np.where(k % 2 == 1, 1.0, -1.0) * np.sign(sines)

    def series_terms(self, x: float) -> int:
        """Optimal truncation of the tail series at x"""
        env = self.log_envelope - self.k_index * self.alpha * math.log(x)
        count = 1
        for idx in range(1, env.size):
            if env[idx] > env[idx - 1] or env[idx] < env[0] - 42.0:
                break
            count = idx + 1
        return count

    def _series(self, x: np.ndarray, terms: Optional[int], extra_power: float, density: bool) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        terms = terms or self.tail_terms
        k = self.k_index[:terms, None]
        log_terms = self.log_coeff[:terms, None] - (k * self.alpha + extra_power) * np.log(x)[None, :]
        parts = self.signs[:terms, None] * np.exp(log_terms)
        if not density:
            parts = parts / (k * self.alpha)
        return parts.sum(axis=0)

    def series_pdf(self, x: np.ndarray, terms: Optional[int] = None) -> np.ndarray:
        return self._series(x, terms, 1.0, density=True)

    def series_sf(self, x: np.ndarray, terms: Optional[int] = None) -> np.ndarray:
        return self._series(x, terms, 0.0, density=False)

    @cached_property
    def crossover(self) -> float:
        """Smallest grid |x| where inversion and tail series agree"""
        best_x, best_gap = float(_CROSSOVER_GRID[-1]), np.inf
        agreed = []
        for x in _CROSSOVER_GRID:
            terms = self.series_terms(x)
            q_pdf, e_pdf = _quad_pdf(self.alpha, x)
            q_sf, e_sf = _quad_sf(self.alpha, x)
            s_pdf = self.series_pdf(np.array([x]), terms)[0]
            s_sf = self.series_sf(np.array([x]), terms)[0]
            gap = max(
                (abs(q_pdf - s_pdf) - 2.0 * e_pdf) / abs(s_pdf),
                (abs(q_sf - s_sf) - 2.0 * e_sf) / abs(s_sf),
            )
            agreed.append(gap <= TailConfig.CROSSOVER_AGREEMENT)
            if gap < best_gap:
                best_x, best_gap = float(x), gap
            if len(agreed) >= 2 and agreed[-1] and agreed[-2]:
                crossover = float(_CROSSOVER_GRID[len(agreed) - 2])
                logger.debug(f"alpha={self.alpha}: series crossover at |x|={crossover:.3f}")
                return crossover
        logger.warning(
            f"alpha={self.alpha}: inversion and tail series never agreed within "
            f"{TailConfig.CROSSOVER_AGREEMENT}; using |x|={best_x:.3f} (gap {best_gap:.2e})"
        )
        return best_x

    @cached_property
    def tail_terms(self) -> int:
        return self.series_terms(self.crossover)

    @cached_property
    def _tables(self) -> Tuple[np.ndarray, PchipInterpolator, PchipInterpolator, np.ndarray, np.ndarray]:
        nodes = np.linspace(0.0, math.asinh(self.crossover), TailConfig.TABLE_NODES)
        xs = np.sinh(nodes)
        pdf_vals = np.empty_like(xs)
        sf_vals = np.empty_like(xs)
        for i, x in enumerate(xs):
            pdf_vals[i], sf_vals[i] = self._node_values(x)
        log_pdf = np.log(pdf_vals)
        log_sf = np.log(sf_vals)
        logger.debug(f"alpha={self.alpha}: built {xs.size}-node density table up to |x|={self.crossover:.3f}")
        return nodes, PchipInterpolator(nodes, log_pdf), PchipInterpolator(nodes, log_sf), xs, log_sf

    def _node_values(self, x: float) -> Tuple[float, float]:
        p, p_err = _quad_pdf(self.alpha, x)
        s, s_err = _quad_sf(self.alpha, x)
        tol = 1e3 * TailConfig.QUAD_ABS_TOL
        if p_err > tol or s_err > tol or p <= 0 or s <= 0:
            logger.debug(f"alpha={self.alpha}: inversion inaccurate at x={x:.4g}, using Zolotarev integral")
            p = float(levy_stable.pdf(x, self.alpha, 0.0))
            s = float(levy_stable.sf(x, self.alpha, 0.0))
        return p, s

    def pdf_array(self, x: np.ndarray) -> np.ndarray:
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.empty_like(ax)
        inner = ax < self.crossover
        if np.any(inner):
            _, log_pdf, _, _, _ = self._tables
            out[inner] = np.exp(log_pdf(np.arcsinh(ax[inner])))
        if np.any(~inner):
            outer = ax[~inner]
            vals = np.zeros_like(outer)
            finite = np.isfinite(outer)
            vals[finite] = self.series_pdf(outer[finite])
            out[~inner] = vals
        return out

    def sf_positive(self, ax: np.ndarray) -> np.ndarray:
        out = np.empty_like(ax)
        inner = ax < self.crossover
        if np.any(inner):
            _, _, log_sf, _, _ = self._tables
            out[inner] = np.exp(log_sf(np.arcsinh(ax[inner])))
        if np.any(~inner):
            outer = ax[~inner]
            vals = np.zeros_like(outer)
            finite = np.isfinite(outer)
            vals[finite] = self.series_sf(outer[finite])
            out[~inner] = vals
        return out

    def sf_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pos = self.sf_positive(np.abs(x))
        return np.where(x >= 0, pos, 1.0 - pos)

    def tail_quantile(self, u: np.ndarray) -> np.ndarray:
        """x >= 0 with 1 - F(x) = u for u in (0, 1/2]"""
        u = np.asarray(u, dtype=float)
        x = np.empty_like(u)
        _, _, _, xs, log_sf = self._tables
        u_cross = float(np.exp(log_sf[-1]))
        inner = u >= u_cross
        if np.any(inner):
            x[inner] = np.interp(np.log(u[inner]), log_sf[::-1], xs[::-1])
        if np.any(~inner):
            x[~inner] = (self.c_alpha / (2.0 * u[~inner])) ** (1.0 / self.alpha)
        for _ in range(8):
            f = np.maximum(self.pdf_array(x), 1e-300)
            step = (self.sf_positive(x) - u) / f
            x = np.maximum(x + step, 0.0)
        return x


class StableUnivariateService:
    """Caches per-alpha numerics and exposes the univariate operations"""

    def __init__(self):
        self._constants: Dict[float, AlphaConstants] = {}
        self._lock = threading.Lock()

    def constants(self, alpha: float) -> AlphaConstants:
        alpha = check_alpha(alpha)
        with self._lock:
            if alpha not in self._constants:
                self._constants[alpha] = AlphaConstants(alpha)
            return self._constants[alpha]

    def pdf(self, alpha: float, x: float) -> float:
        consts = self.constants(alpha)
        ax = abs(float(x))
        if ax >= consts.crossover:
            return float(consts.series_pdf(np.array([ax]))[0])
        value, error = _quad_pdf(consts.alpha, ax)
        if error > 1e3 * TailConfig.QUAD_ABS_TOL:
            raise ConvergenceError(f"density inversion at x={x} has error estimate {error:.2e}")
        return value

    def sf(self, alpha: float, x: float) -> float:
        consts = self.constants(alpha)
        x = float(x)
        ax = abs(x)
        if ax == 0.0:
            upper = 0.5
        elif ax >= consts.crossover:
            upper = float(consts.series_sf(np.array([ax]))[0])
        else:
            upper, error = _quad_sf(consts.alpha, ax)
            if error > 1e3 * TailConfig.QUAD_ABS_TOL:
                raise ConvergenceError(f"distribution inversion at x={x} has error estimate {error:.2e}")
        return upper if x >= 0 else 1.0 - upper

    def abs_moment(self, alpha: float, p: float) -> float:
        consts = self.constants(alpha)
        p = float(p)
        if p < 0 or p >= consts.alpha:
            raise DomainError(f"E|S|^p is infinite or undefined for p={p}, alpha={consts.alpha}")
        if p in consts.abs_moment_cache:
            return consts.abs_moment_cache[p]
        xc = consts.crossover
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            body, _ = integrate.quad(
                lambda x: x ** p * float(consts.pdf_array(np.array([x]))[0]),
                0.0, xc, limit=400, epsabs=1e-12, epsrel=1e-10,
            )
        terms = consts.tail_terms
        k = consts.k_index[:terms]
        tail = np.sum(
            consts.signs[:terms] * np.exp(consts.log_coeff[:terms] + (p - k * consts.alpha) * math.log(xc))
            / (k * consts.alpha - p)
        )
        value = 2.0 * (body + tail)
        consts.abs_moment_cache[p] = value
        return value


stable_service = StableUnivariateService()


def std_stable_samples(alpha: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Chambers-Mallows-Stuck draws from the symmetric standard law"""
    alpha = check_alpha(alpha)
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=size)
    w = rng.standard_exponential(size=size)
    if abs(alpha - 1.0) < 1e-12:
        return np.tan(v)
    return (
        np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha)
    )


def std_stable_sample(alpha: float, rng: np.random.Generator) -> float:
    return float(std_stable_samples(alpha, rng))


def tail_conditioned_samples(alpha: float, rng: np.random.Generator, threshold: float, size: int) -> np.ndarray:
    """Exact draws of S given |S| > threshold, by survival inversion"""
    consts = stable_service.constants(alpha)
    top = float(consts.sf_positive(np.array([max(threshold, 0.0)]))[0])
    u = rng.uniform(0.0, 1.0, size=size) * top
    u = np.maximum(u, 1e-300)
    magnitude = np.maximum(consts.tail_quantile(u), threshold)
    signs = np.where(rng.uniform(size=size) < 0.5, -1.0, 1.0)
    return signs * magnitude


def std_stable_pdf(alpha: float, x: float) -> float:
    return stable_service.pdf(alpha, x)


def std_stable_cdf(alpha: float, x: float) -> float:
    return 1.0 - stable_service.sf(alpha, x)


def std_stable_sf(alpha: float, x: float) -> float:
    return stable_service.sf(alpha, x)


def abs_moment(alpha: float, p: float) -> float:
    return stable_service.abs_moment(alpha, p)


def pdf_array(alpha: float, x: np.ndarray) -> np.ndarray:
    return stable_service.constants(alpha).pdf_array(x)


def sf_array(alpha: float, x: np.ndarray) -> np.ndarray:
    return stable_service.constants(alpha).sf_array(x)


def cdf_array(alpha: float, x: np.ndarray) -> np.ndarray:
    return 1.0 - sf_array(alpha, x)


def interval_probability(alpha: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """P(a < S < b) elementwise, computed from survival differences"""
    consts = stable_service.constants(alpha)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sf_a = consts.sf_positive(np.abs(a))
    sf_b = consts.sf_positive(np.abs(b))
    right = sf_a - sf_b
    left = sf_b - sf_a
    straddle = 1.0 - sf_a - sf_b
    out = np.where(a >= 0, right, np.where(b <= 0, left, straddle))
    return np.where(b > a, np.maximum(out, 0.0), 0.0)


def tail_quantile_array(alpha: float, u: np.ndarray) -> np.ndarray:
    """x >= 0 with P(S > x) = u, for u in (0, 1/2]"""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u > 0.5)):
        raise DomainError("tail quantiles are defined for survival levels in (0, 1/2]")
    return stable_service.constants(alpha).tail_quantile(u)
