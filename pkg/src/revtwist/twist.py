"""Numerical dynamics of reversibly perturbed twist maps.

The map under study is the conjugated twist phi_a . T . phibar_a^{-1}, where
T rotates by omega(xi eta) = alpha + (xi eta)^s and phi_a multiplies the two
coordinates by e^{+-i atilde(xi, eta)}.  Everything here is pointwise numeric
(vectorized over numpy arrays); truncated series never enter.  The module
also carries the explicit constants (d0, c1, c2, epsilon0, delta, r0), the
scalar majorant recursion that underwrites them, and the branch solver for
the periodic-point equation zeta (1+h)^{1/(2s)} = e^{i j pi/s} (-beta/n)^{1/(2s)}.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .families import CoefficientFamily


class DomainError(ValueError):
    """A point left the numerically validated region."""


class HypothesisViolation(ValueError):
    """Input data violates a hypothesis of the underlying theorems."""


class SolverError(RuntimeError):
    """Iteration failed to converge or a post-condition residual is too large."""


BETA_BOUNDARY_TOL = 1e-14


@dataclass(frozen=True)
class TwistParams:
    """Parameters of the unperturbed twist and the perturbation class."""

    alpha: float
    s: int
    m0: float = 1.0
    R: float = 0.5

    def __post_init__(self):
        if not (isinstance(self.s, int) and self.s >= 1):
            raise ValueError("s must be a positive integer")
        if not 0.0 < self.R < 1.0:
            raise ValueError("R must lie in (0, 1)")
        if self.m0 <= 0:
            raise ValueError("m0 must be positive")

    def omega(self, t):
        """Rotation number alpha + t^s at radial value t = xi*eta."""
        return self.alpha + np.asarray(t, dtype=complex) ** self.s


@dataclass(frozen=True)
class ResonanceData:
    n: int
    g: int
    beta: float


@dataclass(frozen=True)
class CurveDomain:
    """Validated constants for period n: the solver disk and its pedigree."""

    epsilon0: float
    delta: float
    r0: float
    d0: float
    n: int
    c1: float
    c2: float

    def __post_init__(self):
        if not self.r0 < self.d0 / 2:
            raise ValueError(f"r0 = {self.r0} is not below d0/2 = {self.d0 / 2}")
        s_exp = round(math.log(self.delta) / math.log(self.epsilon0 / 4))
        if abs(self.delta - (self.epsilon0 / 4) ** s_exp) > 1e-15 * self.delta:
            raise ValueError("delta is not (epsilon0/4)^{2s}")


@dataclass(frozen=True)
class PeriodicCurve:
    j: int
    samples: list
    laurent: dict
    residual: float
    n: int
    grid_size: int
    zeta0: float
    reality_defect: float | None = None


@dataclass(frozen=True)
class MajorantReport:
    d0: float
    values: np.ndarray
    bounds: np.ndarray
    satisfied: bool


@lru_cache(maxsize=None)
def beta_reduce(n: int, alpha: float) -> ResonanceData:
    """Write n*alpha = 2 g pi + beta with beta in (-pi, pi).

    The reduction runs in extended precision so that beta keeps full double
    accuracy even when n*alpha is large.  A beta within 1e-14 of +-pi is
    ambiguous (the sign of the residual window is undecidable) and rejected.
    """
    n = operator.index(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    digits = 30 + max(0, int(math.log10(max(abs(alpha), 1.0) * n + 1.0)))
    with mpmath.workdps(digits):
        x = mpmath.mpf(n) * mpmath.mpf(alpha)
        g = int(mpmath.floor((x + mpmath.pi) / (2 * mpmath.pi)))
        beta = x - 2 * g * mpmath.pi
        beta_f = float(beta)
    if abs(abs(beta_f) - math.pi) < BETA_BOUNDARY_TOL:
        raise ValueError(
            f"beta = {beta_f!r} sits within {BETA_BOUNDARY_TOL} of the branch cut +-pi"
        )
    return ResonanceData(n=n, g=g, beta=beta_f)


def _guard_inside(xi, eta, what: str):
    m = max(float(np.abs(xi).max()), float(np.abs(eta).max()))
    if not m < 1.0:
        raise DomainError(f"{what}: point modulus {m} escaped the unit polydisk")


def twist_eval(tp: TwistParams, xi, eta):
    """The unperturbed twist: multiply by e^{+-i omega(xi eta)}."""
    ph = np.exp(1j * tp.omega(np.asarray(xi, dtype=complex) * eta))
    return ph * xi, eta / ph


def _exponent_fixed_point(fam: CoefficientFamily, xi, eta, sign: int, what: str):
    """Solve c = fam(e^{i sign c} xi, e^{-i sign c} eta) by iteration."""
    c = np.zeros(np.broadcast(np.asarray(xi), np.asarray(eta)).shape, dtype=complex)
    for _ in range(80):
        ph = np.exp(1j * sign * c)
        cn = fam.eval(ph * xi, eta / ph)
        if np.abs(cn - c).max() <= 4e-16 * (1.0 + np.abs(cn).max()):
            return cn
        c = cn
    raise SolverError(f"{what}: exponent iteration did not converge")


def make_varphi(a: CoefficientFamily, tp: TwistParams):
    """Pointwise evaluator of phi_a . T . phibar_a^{-1}.

    Each factor multiplies the coordinates by reciprocal unit factors, so
    xi*eta is preserved to rounding regardless of the family.  phibar_a is
    the coefficient-conjugate of phi_a; its inverse is evaluated through the
    defining fixed-point identity for the exponent.
    """
    a_bar = a.conjugated()

    def varphi(xi, eta):
        xi = np.asarray(xi, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        _guard_inside(xi, eta, "varphi input")
        # phibar_a^{-1}: (e^{ic} xi, e^{-ic} eta), c = abar(e^{ic} xi, e^{-ic} eta)
        c = _exponent_fixed_point(a_bar, xi, eta, +1, "phibar_a^{-1}")
        ph = np.exp(1j * c)
        xi, eta = ph * xi, eta / ph
        xi, eta = twist_eval(tp, xi, eta)
        # phi_a: multiply by e^{+-i atilde(point)}
        ph = np.exp(1j * a.eval(xi, eta))
        xi, eta = ph * xi, eta / ph
        _guard_inside(xi, eta, "varphi output")
        return xi, eta

    return varphi


def varphi_eval(a: CoefficientFamily, tp: TwistParams, point):
    """Single application of the perturbed twist at one point (or array pair)."""
    return make_varphi(a, tp)(point[0], point[1])


def iterate(map_eval, n: int, point):
    """n-fold composition of a pointwise map."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    xi, eta = point
    for _ in range(n):
        xi, eta = map_eval(xi, eta)
    return xi, eta


def _p_n(map_eval, tp: TwistParams, n: int, xi, eta):
    """Relative deviation of the n-th iterate from the model rotation.

    p_n = xi_n e^{-i n omega(t)} / xi - 1, with the large multiple n*alpha
    reduced through beta_reduce so no precision is lost to phase wrapping.
    """
    rd = beta_reduce(n, tp.alpha)
    t = np.asarray(xi, dtype=complex) * eta
    xin, etan = iterate(map_eval, n, (xi, eta))
    model = np.exp(1j * (rd.beta + n * t**tp.s))
    return xin / (np.asarray(xi, dtype=complex) * model) - 1.0, (xin, etan)


def h_eval(zeta, w, a: CoefficientFamily, tp: TwistParams, n: int, map_eval=None):
    """h(zeta, w) = log(1 + p_n(zeta w, zeta/w)) / (i n zeta^{2s})."""
    if map_eval is None:
        map_eval = make_varphi(a, tp)
    zeta = np.asarray(zeta, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(zeta == 0):
        raise DomainError("h is undefined at zeta = 0")
    xi, eta = zeta * w, zeta / w
    _guard_inside(xi, eta, "h_eval")
    p, _ = _p_n(map_eval, tp, n, xi, eta)
    pmax = float(np.abs(p).max())
    if pmax > 0.5:
        raise DomainError(f"|p_n| = {pmax:.3f} > 1/2: outside the validated region")
    return np.log(1.0 + p) / (1j * n * zeta ** (2 * tp.s))


def _branch_target(tp: TwistParams, n: int, j: int, delta: float | None) -> complex:
    rd = beta_reduce(n, tp.alpha)
    limit = math.pi if delta is None else float(delta)
    if not -limit < rd.beta < 0.0:
        raise HypothesisViolation(
            f"beta = {rd.beta:.6e} outside (-{limit:.6e}, 0): period {n} carries no curve here"
        )
    j = operator.index(j)
    if not 1 <= j <= 2 * tp.s:
        raise ValueError(f"branch index must be an integer in 1..{2 * tp.s}")
    zeta0 = (-rd.beta / n) ** (1.0 / (2 * tp.s))
    return zeta0, complex(np.exp(1j * j * math.pi / tp.s)) * zeta0


def _solve_branch(a, tp, n, j, w, delta, tol, max_iter, map_eval):
    if map_eval is None:
        map_eval = make_varphi(a, tp)
    zeta0, target = _branch_target(tp, n, j, delta)
    w = np.asarray(w, dtype=complex)
    wmod = np.abs(w)
    if not (np.all(wmod > 0.5) and np.all(wmod < 2.0)):
        raise ValueError("w outside the annulus 1/2 < |w| < 2")

    inv_root = -1.0 / (2 * tp.s)
    zeta = np.full(w.shape, target, dtype=complex)
    step = math.inf
    for _ in range(max_iter):
        h = h_eval(zeta, w, a, tp, n, map_eval)
        if float(np.abs(h).max()) > 0.5:
            raise DomainError("|h| > 1/2: contraction hypothesis lost")
        znew = target * np.exp(inv_root * np.log(1.0 + h))
        step = float(np.abs(znew - zeta).max())
        zeta = znew
        if step <= tol:
            break
    else:
        raise SolverError(f"no convergence in {max_iter} iterations; last step {step:.3e}")

    h = h_eval(zeta, w, a, tp, n, map_eval)
    eq_res = float(np.abs(zeta * np.exp(-inv_root * np.log(1.0 + h)) - target).max())
    if eq_res > 10 * tol:
        raise SolverError(f"equation residual {eq_res:.3e} above tolerance")

    xi, eta = zeta * w, zeta / w
    xin, etan = iterate(map_eval, n, (xi, eta))
    ret = max(float(np.abs(xin - xi).max()), float(np.abs(etan - eta).max()))
    if ret > 1e-10:
        raise SolverError(f"n-step return residual {ret:.3e} exceeds 1e-10")
    return zeta, zeta0, ret


def solve_branch(a, tp: TwistParams, n: int, j: int, w, delta: float | None = None,
                 tol: float = 1e-13, max_iter: int = 50, map_eval=None):
    """Solve the branch-j periodic-point equation at w (scalar or array).

    Returns zeta with zeta (1+h(zeta,w))^{1/(2s)} = e^{i j pi / s} (-beta/n)^{1/(2s)},
    verified both against the equation (absolute residual below 10*tol) and by
    the n-step return test. Raises
    HypothesisViolation when beta is not in (-delta, 0), DomainError when the
    orbit leaves the validated region, SolverError on convergence failure.
    """
    scalar = np.isscalar(w) or np.asarray(w).ndim == 0
    zeta, _, _ = _solve_branch(a, tp, n, j, w, delta, tol, max_iter, map_eval)
    return complex(zeta) if scalar else zeta


def periodic_curve(a, tp: TwistParams, n: int, j: int, grid_size: int = 128,
                   K: int = 32, delta: float | None = None, tol: float = 1e-13,
                   map_eval=None, check_domain: bool = True) -> PeriodicCurve:
    """Sample the branch over the unit w-circle and take its Laurent data.

    Laurent coefficients come from the discrete Fourier transform over the
    grid (alias rule: coefficient k is read at index k mod grid_size), so the
    grid must satisfy grid_size >= 2K+1.
    """
    if grid_size < 2 * K + 1:
        raise ValueError("grid must have at least 2K+1 points")
    m = np.arange(grid_size)
    w = np.exp(2j * np.pi * m / grid_size)
    zeta, zeta0, ret = _solve_branch(a, tp, n, j, w, delta, tol, 50, map_eval)

    if check_domain:
        # |zeta| = zeta0 |1+h|^{-1/(2s)} <= zeta0 2^{1/(2s)} under the |h| <= 1/2 guard
        dom = compute_constants(tp, n)
        bound = max(dom.r0, zeta0 * 2.0 ** (1.0 / (2 * tp.s)) * (1.0 + 1e-9))
        zmax = float(np.abs(zeta).max())
        if zmax > bound:
            raise DomainError(f"curve radius {zmax:.3e} exceeds the validated bound {bound:.3e}")

    fft = np.fft.fft(zeta) / grid_size
    laurent = {k: complex(fft[k % grid_size]) for k in range(-K, K + 1)}
    reality = None
    if map_eval is None and a.hermitian and j == 2 * tp.s:
        reality = float(np.abs(zeta.imag).max())
    samples = [(complex(wv), complex(zv)) for wv, zv in zip(w, zeta)]
    return PeriodicCurve(
        j=j, samples=samples, laurent=laurent, residual=ret, n=n,
        grid_size=grid_size, zeta0=zeta0, reality_defect=reality,
    )


def _d0(tp: TwistParams, n: int) -> float:
    return min(
        tp.R ** (2 * tp.s + 1) / (2 ** (6 * tp.s + 6) * tp.m0),
        (1.0 / (2 * n)) ** (1.0 / (2 * tp.s)),
        tp.R / 16.0,
    )


def calibration_family(tp: TwistParams, depth: int = 8) -> CoefficientFamily:
    """Extremal perturbation data: every coefficient at its class ceiling
    m0 / (4 (2R)^{i+j}) through 2s < i+j <= 2s + depth."""
    ent = {}
    for d in range(2 * tp.s + 1, 2 * tp.s + 1 + depth):
        cap = tp.m0 / (4.0 * (2.0 * tp.R) ** d)
        for i in range(d + 1):
            ent[(i, d - i)] = cap
    return CoefficientFamily(ent, tp.s, _validate=False)


def measurable_ring(s: int) -> float:
    """Smallest |zeta| at which float64 phase rounding stays two decades
    under the 1/4 threshold for |h| (noise in h scales like eps/|zeta|^{2s})."""
    return (400.0 * np.finfo(float).eps) ** (1.0 / (2 * s))


def _calibrate_c2(tp: TwistParams, n: int, c1: float) -> float:
    """Largest c in {c1/2^k, k >= 1} whose solver disk passes |h| <= 1/4,
    driven by the extremal family.

    h(., w) is analytic in zeta and vanishes at 0, so by the maximum
    principle a bound on an outer ring bounds every smaller disk.  When the
    candidate radius r0(c) sinks below the float64-measurable ring, the
    check therefore runs on that ring instead and dominates the disk.
    """
    fam = calibration_family(tp)
    mv = make_varphi(fam, tp)
    floor = measurable_ring(tp.s)
    radii = np.array([0.7, 0.85, 1.0])
    zph = np.exp(1j * np.pi * np.arange(4) / 4)
    wv = (np.array([0.55, 1.0, 1.8])[:, None] * np.exp(2j * np.pi * np.arange(4) / 4)).ravel()
    for k in range(1, 13):
        c = c1 / 2**k
        r_meas = max(0.5 * c * n ** (-1.0 / (2 * tp.s)), floor)
        zv = (r_meas * radii[:, None] * zph).ravel()
        zz, ww = np.meshgrid(zv, wv)
        try:
            h = h_eval(zz.ravel(), ww.ravel(), fam, tp, n, map_eval=mv)
            if float(np.abs(h).max()) <= 0.25:
                return c
        except DomainError:
            pass
    raise RuntimeError("c2 calibration failed: |h| > 1/4 persists down to c1/2^12")


@lru_cache(maxsize=None)
def compute_constants(tp: TwistParams, n: int) -> CurveDomain:
    """Explicit constants for period n: d0, the bracket constant c1, the
    calibrated c2, and the derived (epsilon0, delta, r0)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    s = tp.s
    d0 = _d0(tp, n)
    c1 = 0.5 * n * d0 ** (2 * s)
    c2 = _calibrate_c2(tp, n, c1)
    eps0 = c2
    delta = (c2 / 4.0) ** (2 * s)
    r0 = 0.5 * eps0 * n ** (-1.0 / (2 * s))
    return CurveDomain(epsilon0=eps0, delta=delta, r0=r0, d0=d0, n=n, c1=c1, c2=c2)


def majorant_sequence(tp: TwistParams, n: int, K: int | None = None,
                      strict: bool = True) -> MajorantReport:
    """Scalar majorant recursion at (d0, d0) with the bound f_k <= k/(4n).

    f_{k+1} = f_k + (m0/R^{2s+1}) (2 d0)^{2s+1} e^{k(2s+1) d0^{2s}}
              (1-f_k)^{-2s-2} / (1 - (2 d0/R) e^{k d0^{2s}} (1-f_k)^{-1}).
    The bound is proven, so a violation flags a constants-pipeline bug.
    """
    if K is None:
        K = n
    if K > n:
        raise ValueError("K may not exceed n")
    s, m0, R = tp.s, tp.m0, tp.R
    d0 = _d0(tp, n)
    t0 = d0 ** (2 * s)
    values = np.zeros(K + 1)
    f = 0.0
    for k in range(K):
        grow = math.exp(k * (2 * s + 1) * t0)
        den = 1.0 - (2 * d0 / R) * math.exp(k * t0) / (1.0 - f)
        if den <= 0:
            raise SolverError(f"majorant denominator vanished at k = {k}")
        f = f + (m0 / R ** (2 * s + 1)) * (2 * d0) ** (2 * s + 1) * grow / (
            (1.0 - f) ** (2 * s + 2) * den
        )
        values[k + 1] = f
    bounds = np.arange(K + 1) / (4.0 * n)
    satisfied = bool(np.all(values <= bounds + 1e-15))
    if strict and not satisfied:
        worst = int(np.argmax(values - bounds))
        raise ValueError(
            f"majorant bound failed at k = {worst}: f = {values[worst]:.3e} > {bounds[worst]:.3e}"
        )
    return MajorantReport(d0=d0, values=values, bounds=bounds, satisfied=satisfied)
