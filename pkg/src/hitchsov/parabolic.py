"""Parabolic-type combinatorics and local spectral models.

Partitions at marked points determine level functions, the dimensions of
the parabolic Hitchin base, the invariant Delta_P, and the parabolic
degree.  The local model of a singular spectral curve is a monic
polynomial over truncated power series in t, analysed through its t-adic
Newton polygon and Eisenstein factorization.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .errors import (IndeterminateDimension, TruncationInsufficient,
                     NotIntegral, ValidationError)

DEFAULT_TRUNCATION = 16


# ----------------------------------------------------------------------
# partitions
# ----------------------------------------------------------------------

def _check_partition(n):
    n = tuple(int(v) for v in n)
    if not n or any(v <= 0 for v in n) or any(
            a < b for a, b in zip(n, n[1:])):
        raise ValidationError(
            f"not a weakly decreasing positive partition: {n}")
    return n


def dual_partition(n):
    """Conjugate partition mu_j = #{l : n_l >= j}."""
    n = _check_partition(n)
    return tuple(sum(1 for v in n if v >= j) for j in range(1, n[0] + 1))


def level_function(n, j):
    """Level gamma_j: the step of the dual-partition staircase holding j."""
    n = _check_partition(n)
    r = sum(n)
    if not 1 <= j <= r:
        raise IndexError(f"j must be in 1..{r}, got {j}")
    mu = dual_partition(n)
    acc = 0
    for level, m in enumerate(mu, start=1):
        acc += m
        if j <= acc:
            return level
    raise AssertionError("unreachable: partition sums to r")


def levels(n):
    """All levels gamma_1..gamma_r at once."""
    return tuple(level_function(n, j) for j in range(1, sum(n) + 1))


# ----------------------------------------------------------------------
# parabolic types
# ----------------------------------------------------------------------

@dataclass
class MarkedPoint:
    partition: tuple
    weights: tuple = ()

    def __post_init__(self):
        self.partition = _check_partition(self.partition)
        self.weights = tuple(Fraction(w) for w in self.weights)
        if self.weights:
            if len(self.weights) != len(self.partition):
                raise ValidationError(
                    "weights and partition lengths differ")
            if any(not 0 <= w < 1 for w in self.weights) or any(
                    a > b for a, b in zip(self.weights, self.weights[1:])):
                raise ValidationError(
                    "weights must be non-decreasing in [0, 1)")


@dataclass
class ParabolicType:
    genus: int
    rank: int
    points: list = field(default_factory=list)

    def __post_init__(self):
        self.points = [p if isinstance(p, MarkedPoint) else MarkedPoint(*p)
                       for p in self.points]
        for p in self.points:
            if sum(p.partition) != self.rank:
                raise ValidationError(
                    f"partition {p.partition} does not sum to rank "
                    f"{self.rank}")
        if 2 * self.genus - 2 + len(self.points) <= 0:
            raise ValidationError(
                "2g - 2 + #points must be positive")


def parabolic_base_dims(ptype: ParabolicType):
    """Per-index dimensions of the parabolic Hitchin base and their sum.

    The j-th summand is sections of a line bundle of degree
    d_j = j(2g - 2) + sum_x (j - gamma_j(x)); Riemann-Roch settles the
    dimension when d_j > 2g - 2 (dim d_j - g + 1) or d_j < 0 (dim 0),
    and j = 1 is the canonical bundle itself (dim g).
    """
    g = ptype.genus
    dims = []
    for j in range(1, ptype.rank + 1):
        dj = j * (2 * g - 2) + sum(j - level_function(p.partition, j)
                                   for p in ptype.points)
        if j == 1:
            # gamma_1 = 1 at every point, so d_1 = 2g - 2 is canonical
            dims.append(g)
        elif dj > 2 * g - 2:
            dims.append(dj - g + 1)
        elif dj < 0:
            dims.append(0)
        else:
            raise IndeterminateDimension(
                f"degree {dj} in the special range [0, {2 * g - 2}] "
                f"at index {j}")
    return dims, sum(dims)


def delta_p(ptype: ParabolicType):
    """gcd over part sizes and points of the dual-partition multiplicities."""
    if not ptype.points:
        raise ValidationError("Delta_P needs at least one marked point")
    acc = 0
    for p in ptype.points:
        mu = dual_partition(p.partition)
        for i in range(1, ptype.rank + 1):
            acc = math.gcd(acc, sum(1 for m in mu if m == i))
    return acc


def parabolic_degree(deg_e, ptype: ParabolicType):
    """deg E + sum_x sum_j alpha_j(x) m^j(x), an exact rational."""
    total = Fraction(deg_e)
    for p in ptype.points:
        for alpha, m in zip(p.weights, p.partition):
            total += alpha * m
    return total


# ----------------------------------------------------------------------
# truncated power series over Q
# ----------------------------------------------------------------------

def series(coeffs, trunc=DEFAULT_TRUNCATION):
    s = [Fraction(0)] * trunc
    for i, c in enumerate(coeffs[:trunc]):
        s[i] = Fraction(c)
    return s


def _ser_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _ser_mul(a, b):
    n = len(a)
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b[:n - i]):
            if y != 0:
                out[i + j] += x * y
    return out


def _ser_ord(a):
    for i, c in enumerate(a):
        if c != 0:
            return i
    return None


@dataclass
class LocalCharPoly:
    """Monic lambda^r + sum_j a_j lambda^(r-j), a_j truncated t-series."""
    coeffs: list                # coeffs[j-1] = series of a_j
    rank: int
    trunc: int = DEFAULT_TRUNCATION

    @classmethod
    def from_lists(cls, coeff_lists, trunc=DEFAULT_TRUNCATION):
        r = len(coeff_lists)
        return cls([series(c, trunc) for c in coeff_lists], r, trunc)

    def orders(self):
        """t-adic valuations of a_1..a_r (None when zero to truncation)."""
        return [_ser_ord(a) for a in self.coeffs]


def poly_mul(fa, fb, trunc):
    """Product of two series-coefficient polynomials (descending, monic)."""
    # represent as full coefficient lists including the leading 1
    one = series([1], trunc)
    zero = series([], trunc)
    ca = [one] + fa
    cb = [one] + fb
    out = [[Fraction(0)] * trunc
           for _ in range(len(ca) + len(cb) - 1)]
    for i, a in enumerate(ca):
        for j, b in enumerate(cb):
            out[i + j] = _ser_add(out[i + j], _ser_mul(a, b))
    assert out[0][0] == 1
    return out[1:]


def newton_polygon(f: LocalCharPoly):
    """Vertices of the lower Newton polygon of f.

    Points are (j, ord a_j) for j = 0..r with a_0 = 1; the hull runs from
    (0, 0) to (r, ord a_r).
    """
    orders = f.orders()
    pts = [(0, 0)]
    for j, o in enumerate(orders, start=1):
        if o is not None:
            pts.append((j, o))
    if orders[-1] is None:
        raise TruncationInsufficient(
            "constant coefficient vanishes to the truncation order")
    # lower convex hull, Andrew scan over the (sorted) point list
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) <= (p[0] - x1) * (y2 - y1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _segment_residual(f, j1, v1, j2, v2):
    """Residual polynomial of the polygon segment (j1,v1)-(j2,v2).

    For slope p/q in lowest terms the residual has degree (j2-j1)/q in u,
    with coefficients the t^(v1 + k p)-coefficients of a_(j1 + k q).
    """
    rise = v2 - v1
    run = j2 - j1
    gcd = math.gcd(rise, run)
    p, q = rise // gcd, run // gcd
    u = sympy.symbols('u')
    poly = sympy.Integer(0)
    deg = run // q
    coeffs_full = [series([1], f.trunc)] + f.coeffs
    for k in range(deg + 1):
        j = j1 + k * q
        v = v1 + k * p
        c = coeffs_full[j][v] if v < f.trunc else Fraction(0)
        poly += sympy.Rational(c) * u ** (deg - k)
    return sympy.Poly(poly, u), (p, q)


def newton_eisenstein_check(f: LocalCharPoly, expected_mu=None):
    """Newton-polygon factor analysis of a local characteristic polynomial.

    Returns a report with the polygon vertices, the factor degree
    multiset, and whether the factorization is distinguished: all slopes
    of the form 1/mu (Eisenstein factors) and all residual polynomials
    squarefree, which makes equal-degree factors differ in their constant
    terms at exact valuation 1.
    """
    hull = newton_polygon(f)
    degrees = []
    distinguished = True
    residuals = []
    for (j1, v1), (j2, v2) in zip(hull[:-1], hull[1:]):
        rise, run = v2 - v1, j2 - j1
        if rise <= 0:
            raise NotIntegral(
                f"polygon segment of slope {Fraction(rise, run)} shows a "
                "unit factor")
        gcd = math.gcd(rise, run)
        p, q = rise // gcd, run // gcd
        res, _ = _segment_residual(f, j1, v1, j2, v2)
        residuals.append(res)
        nfactors = run // q
        degrees.extend([q] * nfactors)
        if p != 1:
            distinguished = False     # constant terms have valuation p > 1
        if sympy.degree(sympy.gcd(res, res.diff())) > 0:
            distinguished = False     # repeated residual root
    degrees.sort(reverse=True)
    report = {
        "vertices": hull,
        "orders": f.orders(),
        "factor_degrees": tuple(degrees),
        "distinguished": bool(distinguished),
        "residuals": residuals,
    }
    if expected_mu is not None:
        report["matches_expected"] = tuple(sorted(expected_mu, reverse=True)) \
            == report["factor_degrees"]
    return report


def synthesize_eisenstein(mu, rng, trunc=DEFAULT_TRUNCATION):
    """Random product of Eisenstein factors with degree multiset mu.

    Each factor is lambda^m + sum c_j(t) lambda^(m-j) with all c_j of
    positive valuation and the constant term of exact valuation 1; the
    constant-term leading coefficients are drawn distinct so the result
    is distinguished.
    """
    leads = rng.permutation(range(1, 10 * len(mu)))[:len(mu)]
    factors = []
    for m, lead in zip(mu, leads):
        coeffs = []
        for j in range(1, m + 1):
            c = [Fraction(0)] * trunc
            for order in range(1, 4):
                c[order] = Fraction(int(rng.integers(-5, 6)))
            if j == m:
                c[1] = Fraction(int(lead))
            coeffs.append(series(c, trunc))
        factors.append(coeffs)
    prod = factors[0]
    for fac in factors[1:]:
        prod = poly_mul(prod, fac, trunc)
    return LocalCharPoly(prod, sum(mu), trunc)
