"""Truncated bivariate power-series algebra over complex coefficients.

Everything formal in this package is carried by three small containers: a
``Jet`` (a series in two variables xi, eta truncated at total degree N), a
``MapJet`` (a pair of Jets representing a formal plane transformation), and a
``SeriesOneVar`` (a series in the single radial variable t = xi*eta).  All
operations are pure and return new objects; coefficients of any algebraic
combination are exact through the truncation order up to floating-point
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_ORDER = 16
MAX_ORDER = 64


@lru_cache(maxsize=None)
def _triangle_mask(order: int) -> np.ndarray:
    i = np.arange(order + 1)
    return (i[:, None] + i[None, :]) <= order


def _check_order(order: int) -> int:
    order = int(order)
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"truncation order must be in [1, {MAX_ORDER}], got {order}")
    return order


@dataclass(frozen=True)
class Jet:
    """Series sum c[i,j] xi^i eta^j over i+j <= order, stored densely.

    Entries of ``coeffs`` with i+j > order are kept identically zero. The
    array is never mutated after construction.
    """

    coeffs: np.ndarray
    order: int

    @staticmethod
    def zero(order: int = DEFAULT_ORDER) -> "Jet":
        order = _check_order(order)
        return Jet(np.zeros((order + 1, order + 1), dtype=complex), order)

    @staticmethod
    def from_entries(entries: dict[tuple[int, int], complex], order: int = DEFAULT_ORDER) -> "Jet":
        order = _check_order(order)
        c = np.zeros((order + 1, order + 1), dtype=complex)
        for (i, j), v in entries.items():
            if i < 0 or j < 0 or i + j > order:
                raise ValueError(f"index ({i},{j}) outside triangle of order {order}")
            c[i, j] = v
        return Jet(c, order)

    @staticmethod
    def constant(value: complex, order: int = DEFAULT_ORDER) -> "Jet":
        return Jet.from_entries({(0, 0): value}, order)

    @staticmethod
    def coordinate(which: str, order: int = DEFAULT_ORDER) -> "Jet":
        if which == "xi":
            return Jet.from_entries({(1, 0): 1.0}, order)
        if which == "eta":
            return Jet.from_entries({(0, 1): 1.0}, order)
        raise ValueError(f"unknown coordinate {which!r}")

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if c.shape != (self.order + 1, self.order + 1):
            raise ValueError("coefficient table shape does not match order")
        c.setflags(write=False)

    def __add__(self, other: "Jet") -> "Jet":
        return jet_add(self, other)

    def __sub__(self, other: "Jet") -> "Jet":
        _same_order(self, other)
        return Jet(self.coeffs - other.coeffs, self.order)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(self.coeffs * complex(other), self.order)

    __rmul__ = __mul__

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.order)

    def coeff(self, i: int, j: int) -> complex:
        return complex(self.coeffs[i, j])

    def homogeneous_part(self, d: int) -> np.ndarray:
        """Coefficients of total degree d as a dense (order+1)^2 array."""
        out = np.zeros_like(self.coeffs)
        for i in range(min(d, self.order) + 1):
            j = d - i
            if 0 <= j <= self.order:
                out[i, j] = self.coeffs[i, j]
        return out

    def truncate(self, order: int) -> "Jet":
        order = _check_order(order)
        if order >= self.order:
            c = np.zeros((order + 1, order + 1), dtype=complex)
            c[: self.order + 1, : self.order + 1] = self.coeffs
        else:
            c = self.coeffs[: order + 1, : order + 1].copy()
            c[~_triangle_mask(order)] = 0.0
        return Jet(c, order)

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max())

    def eval(self, xi, eta):
        """Evaluate the polynomial at numeric points (arrays broadcast)."""
        xi = np.asarray(xi, dtype=complex)
        eta = np.asarray(eta, dtype=complex)
        out = np.zeros(np.broadcast(xi, eta).shape, dtype=complex)
        xp = [np.ones_like(xi)]
        ep = [np.ones_like(eta)]
        for _ in range(self.order):
            xp.append(xp[-1] * xi)
            ep.append(ep[-1] * eta)
        for i in range(self.order + 1):
            for j in range(self.order + 1 - i):
                c = self.coeffs[i, j]
                if c != 0.0:
                    out = out + c * xp[i] * ep[j]
        return out


def _same_order(a, b):
    if a.order != b.order:
        raise ValueError(f"truncation order mismatch: {a.order} != {b.order}")


def jet_add(a: Jet, b: Jet) -> Jet:
    """Coefficient-wise sum of two jets of equal order."""
    _same_order(a, b)
    return Jet(a.coeffs + b.coeffs, a.order)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product truncated at total degree N.

    Every surviving coefficient is the exact (up to rounding) finite sum
    of products; there is no truncation bias below order N.  A factor
    with only a few nonzero entries is applied by shift-and-add; the
    dense case packs the rows into one long vector (rows padded so no
    column overlap can occur) and runs a single direct 1-D convolution.
    """
    _same_order(a, b)
    n = a.order
    na = int(np.count_nonzero(a.coeffs))
    nb = int(np.count_nonzero(b.coeffs))
    if min(na, nb) <= 4:
        if nb < na:
            a, b = b, a
        out = np.zeros((n + 1, n + 1), dtype=complex)
        for i, j in zip(*np.nonzero(a.coeffs)):
            out[i:, j:] += a.coeffs[i, j] * b.coeffs[: n + 1 - i, : n + 1 - j]
    else:
        m = 2 * n + 1
        pa = np.zeros((n + 1, m), dtype=complex)
        pb = np.zeros((n + 1, m), dtype=complex)
        pa[:, : n + 1] = a.coeffs
        pb[:, : n + 1] = b.coeffs
        flat = np.convolve(pa.ravel(), pb.ravel())
        out = flat[: (n + 1) * m].reshape(n + 1, m)[:, : n + 1]
    out = np.where(_triangle_mask(n), out, 0.0)
    return Jet(out, n)


@dataclass(frozen=True)
class MapJet:
    """Formal transformation (xi, eta) -> (x(xi,eta), y(xi,eta))."""

    x: Jet
    y: Jet

    def __post_init__(self):
        _same_order(self.x, self.y)

    @property
    def order(self) -> int:
        return self.x.order

    @staticmethod
    def identity(order: int = DEFAULT_ORDER) -> "MapJet":
        return MapJet(Jet.coordinate("xi", order), Jet.coordinate("eta", order))

    @staticmethod
    def swap(order: int = DEFAULT_ORDER) -> "MapJet":
        return MapJet(Jet.coordinate("eta", order), Jet.coordinate("xi", order))

    def linear_part(self) -> np.ndarray:
        """2x2 matrix of degree-1 coefficients (rows: components)."""
        return np.array(
            [
                [self.x.coeff(1, 0), self.x.coeff(0, 1)],
                [self.y.coeff(1, 0), self.y.coeff(0, 1)],
            ]
        )

    def fixes_origin(self) -> bool:
        return self.x.coeff(0, 0) == 0 and self.y.coeff(0, 0) == 0

    def max_abs(self) -> float:
        return max(self.x.max_abs(), self.y.max_abs())

    def __sub__(self, other: "MapJet") -> "MapJet":
        return MapJet(self.x - other.x, self.y - other.y)

    def eval(self, xi, eta):
        return self.x.eval(xi, eta), self.y.eval(xi, eta)


def jet_compose(f: Jet, phi: MapJet) -> Jet:
    """Coefficients of f(phi) through degree N.

    Parameters
    ----------
    f : Jet
    phi : MapJet
        Must fix the origin; otherwise composition is not a polynomial
        operation on truncated series.
    """
    _same_order(f, phi.x)
    if not phi.fixes_origin():
        raise ValueError("composition target must fix the origin")
    n = f.order
    # Powers of the second component once, then a Horner sweep in the first.
    ypow = [Jet.constant(1.0, n)]
    for _ in range(n):
        ypow.append(jet_mul(ypow[-1], phi.y))

    def row(i: int) -> Jet:
        acc = np.zeros_like(f.coeffs)
        for j in range(n + 1 - i):
            c = f.coeffs[i, j]
            if c != 0.0:
                acc = acc + c * ypow[j].coeffs
        return Jet(acc, n)

    out = row(n)
    for i in range(n - 1, -1, -1):
        out = jet_add(jet_mul(out, phi.x), row(i))
    return out


def map_compose(outer: MapJet, inner: MapJet) -> MapJet:
    """outer(inner(.)) through degree N."""
    return MapJet(jet_compose(outer.x, inner), jet_compose(outer.y, inner))


def map_inverse(phi: MapJet) -> MapJet:
    """Compositional inverse, solved degree by degree.

    The linear part is inverted exactly; nonlinear orders are filled in by
    the fixed-point iteration psi <- L^{-1}(id - P(psi)), which gains at
    least one correct degree per pass.
    """
    n = phi.order
    if not phi.fixes_origin():
        raise ValueError("can only invert maps fixing the origin")
    lin = phi.linear_part()
    det = lin[0, 0] * lin[1, 1] - lin[0, 1] * lin[1, 0]
    if abs(det) < 1e-14:
        raise ValueError("singular linear part")
    inv = np.array([[lin[1, 1], -lin[0, 1]], [-lin[1, 0], lin[0, 0]]]) / det

    # Nonlinear part of phi.
    px = phi.x.coeffs.copy()
    py = phi.y.coeffs.copy()
    px[1, 0] = px[0, 1] = 0.0
    py[1, 0] = py[0, 1] = 0.0
    pnl = MapJet(Jet(px, n), Jet(py, n))

    ident = MapJet.identity(n)

    def linmap(m: MapJet) -> MapJet:
        return MapJet(
            Jet(inv[0, 0] * m.x.coeffs + inv[0, 1] * m.y.coeffs, n),
            Jet(inv[1, 0] * m.x.coeffs + inv[1, 1] * m.y.coeffs, n),
        )

    psi = linmap(ident)
    for _ in range(n):
        nxt = linmap(ident - map_compose(pnl, psi))
        if np.array_equal(nxt.x.coeffs, psi.x.coeffs) and np.array_equal(
            nxt.y.coeffs, psi.y.coeffs
        ):
            break
        psi = nxt
    return psi


def jet_exp_i(g: Jet) -> Jet:
    """exp(i g) for a jet with zero constant term, by a Horner sweep."""
    if g.coeff(0, 0) != 0:
        raise ValueError("jet_exp_i requires zero constant term")
    n = g.order
    one = Jet.constant(1.0, n)
    out = one
    for k in range(n, 0, -1):
        out = jet_add(one, jet_mul(g, out) * (1j / k))
    return out


def complexify(f_z: Jet) -> MapJet:
    """Polarize a series in (z, zbar) to the pair (Phi(xi,eta), Phibar(eta,xi)).

    The second component's (i,j) coefficient is the conjugate of the first
    component's (j,i) coefficient.
    """
    return MapJet(f_z, Jet(np.conj(f_z.coeffs).T.copy(), f_z.order))


def rho_conjugate(phi: MapJet, rho_kind: str = "standard") -> MapJet:
    """The holomorphic map rho . phi . rho for an antiholomorphic involution rho.

    "standard" is rho(xi,eta) = (etabar, xibar); "surface" is
    rho(xi,eta) = (xibar, etabar).  Both squares are the identity, so the
    reality condition rho phi = phi rho reads rho_conjugate(phi) == phi.
    """
    if rho_kind == "standard":
        return MapJet(
            Jet(np.conj(phi.y.coeffs).T.copy(), phi.order),
            Jet(np.conj(phi.x.coeffs).T.copy(), phi.order),
        )
    if rho_kind == "surface":
        return MapJet(
            Jet(np.conj(phi.x.coeffs), phi.order),
            Jet(np.conj(phi.y.coeffs), phi.order),
        )
    raise ValueError(f"unknown rho_kind {rho_kind!r}")


def reality_defect(phi: MapJet, rho_kind: str = "standard") -> float:
    """Max coefficient modulus of rho.phi - phi.rho (zero iff reality holds)."""
    return (rho_conjugate(phi, rho_kind) - phi).max_abs()


def majorant(f: Jet) -> Jet:
    """Replace every coefficient by its modulus (the hat operator)."""
    return Jet(np.abs(f.coeffs).astype(complex), f.order)


def coeffs_close(a, b, tol: float = 1e-12) -> bool:
    """Absolute comparison scaled by the max input coefficient modulus."""
    ca = a.coeffs if isinstance(a, Jet) else np.asarray(a)
    cb = b.coeffs if isinstance(b, Jet) else np.asarray(b)
    scale = max(1.0, float(np.abs(ca).max()), float(np.abs(cb).max()))
    return float(np.abs(ca - cb).max()) <= tol * scale


def map_residual(a: MapJet, b: MapJet) -> float:
    return (a - b).max_abs()


# ---------------------------------------------------------------------------
# One-variable series in t = xi*eta.


def _as_series(c, order: int | None = None) -> np.ndarray:
    c = np.asarray(c, dtype=complex).ravel()
    if order is not None:
        if len(c) > order + 1:
            c = c[: order + 1]
        elif len(c) < order + 1:
            c = np.concatenate([c, np.zeros(order + 1 - len(c), dtype=complex)])
    return c


def series_mul(a, b, order: int | None = None) -> np.ndarray:
    a = _as_series(a)
    b = _as_series(b)
    n = (len(a) - 1 if order is None else order)
    return _as_series(np.convolve(a, b), n)


def series_reciprocal(a) -> np.ndarray:
    a = _as_series(a)
    if a[0] == 0:
        raise ValueError("series has no reciprocal: zero constant term")
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, len(a)):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1]) / a[0]
    return out


def series_log(a) -> np.ndarray:
    """Principal logarithm of a series with nonzero constant term."""
    a = _as_series(a)
    if a[0] == 0:
        raise ValueError("log of series with zero constant term")
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, len(a)):
        acc = a[k]
        for j in range(1, k):
            acc -= (j / k) * out[j] * a[k - j]
        out[k] = acc / a[0]
    return out


def series_exp(g) -> np.ndarray:
    g = _as_series(g)
    out = np.zeros_like(g)
    out[0] = np.exp(g[0])
    for k in range(1, len(g)):
        out[k] = sum((j / k) * g[j] * out[k - j] for j in range(1, k + 1))
    return out


def series_pow(a, r: float) -> np.ndarray:
    """Principal a(t)^r for real exponent r, a(0) != 0."""
    return series_exp(r * series_log(a))


def series_eval(a, t):
    a = _as_series(a)
    t = np.asarray(t, dtype=complex)
    out = np.zeros_like(t)
    for c in a[::-1]:
        out = out * t + c
    return out


def radial_to_jet(series, order: int, kind: str = "plain") -> Jet:
    """Lift a one-variable series in t = xi*eta into a Jet.

    kind "plain" gives sum c_k (xi eta)^k; "xi" gives xi * sum c_k (xi eta)^k
    (coefficients on the (k+1, k) diagonal); "eta" the mirror.
    """
    c = _as_series(series)
    entries: dict[tuple[int, int], complex] = {}
    for k, v in enumerate(c):
        if v == 0:
            continue
        if kind == "plain":
            i, j = k, k
        elif kind == "xi":
            i, j = k + 1, k
        elif kind == "eta":
            i, j = k, k + 1
        else:
            raise ValueError(f"unknown kind {kind!r}")
        if i + j > order:
            break
        entries[(i, j)] = v
    return Jet.from_entries(entries, order)


def radial_map(a_series, order: int) -> MapJet:
    """The radial transformation (a(xi eta) xi, a(xi eta)^{-1} eta)."""
    inv = series_reciprocal(a_series)
    return MapJet(
        radial_to_jet(a_series, order, "xi"),
        radial_to_jet(inv, order, "eta"),
    )


def diagonal_series(f: Jet, kind: str) -> np.ndarray:
    """Extract the radial series sitting on a diagonal of a Jet.

    kind "xi" reads coefficients of xi (xi eta)^k at (k+1, k); "eta" reads
    eta (xi eta)^k at (k, k+1); "plain" reads (xi eta)^k at (k, k).
    """
    n = f.order
    if kind == "plain":
        ks = range(n // 2 + 1)
        return np.array([f.coeffs[k, k] for k in ks])
    if kind == "xi":
        ks = range((n - 1) // 2 + 1)
        return np.array([f.coeffs[k + 1, k] for k in ks])
    if kind == "eta":
        ks = range((n - 1) // 2 + 1)
        return np.array([f.coeffs[k, k + 1] for k in ks])
    raise ValueError(f"unknown kind {kind!r}")


def off_diagonal_residual(f: Jet, kind: str) -> float:
    """Max modulus of coefficients NOT on the given diagonal."""
    c = f.coeffs.copy()
    n = f.order
    if kind == "xi":
        for k in range((n - 1) // 2 + 1):
            c[k + 1, k] = 0.0
    elif kind == "eta":
        for k in range((n - 1) // 2 + 1):
            c[k, k + 1] = 0.0
    elif kind == "plain":
        for k in range(n // 2 + 1):
            c[k, k] = 0.0
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return float(np.abs(c).max())
