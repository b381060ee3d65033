"""Spectral polynomials of the classical Lie types.

The characteristic polynomial of the twisted Higgs field on a genus-g
hyperelliptic base is encoded as

    R(lambda, x, y) = lambda^d + sum_j lambda^(d - d_j) B_j(x, y),

where B_j collects the coefficient block of the j-th basic invariant:
a polynomial part sum_k H0[j,k] x^k and (for higher-degree invariants)
a y-part sum_s H1[j,s] x^s y.  For so(2n) the last block enters squared.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import RankError, ConditioningWarning

FAMILIES = ("GL", "SL", "SO_odd", "SP", "SO_even")


@dataclass(frozen=True)
class LieTypeSpec:
    family: str
    rank: int
    d: int                     # matrix size of the defining representation
    deltas: tuple              # degrees of the basic invariants
    dees: tuple                # lambda-exponent offsets d_j
    square_last: bool          # so(2n): the Pfaffian block enters squared
    dim: int                   # dim of the Lie algebra


def resolve_type(family, rank) -> LieTypeSpec:
    """Resolve (family, rank) to invariant degrees and exponents."""
    if family not in FAMILIES:
        raise RankError(f"unknown family {family!r}; expected one of {FAMILIES}")
    n = int(rank)
    if n < 1:
        raise RankError(f"rank must be >= 1, got {rank}")
    square_last = False
    if family == "GL":
        deltas = tuple(range(1, n + 1))
        d, dim = n, n * n
    elif family == "SL":
        if n < 2:
            raise RankError("SL needs rank >= 2")
        deltas = tuple(range(2, n + 1))
        d, dim = n, n * n - 1
    elif family == "SO_odd":
        deltas = tuple(range(2, 2 * n + 1, 2))
        d, dim = 2 * n + 1, n * (2 * n + 1)
    elif family == "SP":
        deltas = tuple(range(2, 2 * n + 1, 2))
        d, dim = 2 * n, n * (2 * n + 1)
    else:  # SO_even
        if n < 2:
            raise RankError("SO_even needs rank >= 2")
        deltas = tuple(range(2, 2 * n - 1, 2)) + (n,)
        d, dim = 2 * n, n * (2 * n - 1)
        square_last = True
    dees = tuple(2 * dl if (square_last and j == len(deltas) - 1) else dl
                 for j, dl in enumerate(deltas))
    # Kostant identity: sum_j (2 delta_j - 1) = dim g
    kostant = sum(2 * dl - 1 for dl in deltas)
    if kostant != dim:
        raise AssertionError(
            f"Kostant identity failed for {family}({n}): {kostant} != {dim}")
    return LieTypeSpec(family=family, rank=n, d=d, deltas=deltas, dees=dees,
                       square_last=square_last, dim=dim)


@dataclass(frozen=True)
class CoefficientLayout:
    """Block sizes and flat-vector offsets of the Hamiltonian coefficients."""
    spec: LieTypeSpec
    genus: int
    x_sizes: tuple
    y_sizes: tuple
    x_offsets: tuple
    y_offsets: tuple
    h: int

    def x_slice(self, j):
        return slice(self.x_offsets[j], self.x_offsets[j] + self.x_sizes[j])

    def y_slice(self, j):
        return slice(self.y_offsets[j], self.y_offsets[j] + self.y_sizes[j])


def coefficient_layout(spec: LieTypeSpec, curve) -> CoefficientLayout:
    """Coefficient blocks for a given curve (or integer genus)."""
    g = curve if isinstance(curve, int) else curve.genus
    x_sizes, y_sizes = [], []
    for dl in spec.deltas:
        x_sizes.append(dl * (g - 1) + 1)
        y_sizes.append(max(0, (dl - 1) * (g - 1) - 1))
    x_off, y_off, pos = [], [], 0
    for xs, ys in zip(x_sizes, y_sizes):
        x_off.append(pos)
        pos += xs
        y_off.append(pos)
        pos += ys
    return CoefficientLayout(spec=spec, genus=g, x_sizes=tuple(x_sizes),
                             y_sizes=tuple(y_sizes), x_offsets=tuple(x_off),
                             y_offsets=tuple(y_off), h=pos)


@dataclass
class SpectralPoint:
    """A point (x, y, lambda) of the spectral cover over the base curve."""
    x: complex
    y: complex
    lam: complex


@dataclass
class REval:
    value: complex
    d_lambda: complex
    grad_h: np.ndarray      # length-h gradient over all coefficients
    d_x: complex            # on-curve total derivative (dy/dx = P'/(2y))


def _blocks(layout, ham, x, y):
    """Values B_j, dB_j/dx (on-curve) and the per-coefficient monomials."""
    nb = len(layout.spec.deltas)
    b = np.zeros(nb, dtype=complex)
    db = np.zeros(nb, dtype=complex)
    return b, db


def eval_R(layout: CoefficientLayout, curve, ham, pt: SpectralPoint) -> REval:
    """Evaluate R and its partials at a spectral point.

    ham is the flat coefficient vector in the layout's order.  The gradient
    is analytic; for so(2n) the squared block carries the factor 2 B_n.
    The x-derivative treats y as a function of x on the base curve.
    """
    spec = layout.spec
    ham = np.asarray(ham, dtype=complex)
    x, y, lam = pt.x, pt.y, pt.lam
    dy_dx = curve.dp(x) / (2.0 * y)
    value = lam ** spec.d
    d_lambda = spec.d * lam ** (spec.d - 1)
    d_x = 0.0 + 0.0j
    grad = np.zeros(layout.h, dtype=complex)
    for j, dj in enumerate(spec.dees):
        hx = ham[layout.x_slice(j)]
        hy = ham[layout.y_slice(j)]
        kx = np.arange(len(hx))
        ks = np.arange(len(hy))
        xpow = x ** kx
        b = hx @ xpow
        db = hx[1:] @ (kx[1:] * x ** (kx[1:] - 1)) if len(hx) > 1 else 0.0
        gx = xpow.astype(complex)
        gy = np.zeros(0, dtype=complex)
        if len(hy):
            spow = x ** ks
            b = b + (hy @ spow) * y
            db = db + (hy[1:] @ (ks[1:] * x ** (ks[1:] - 1))) * y \
                if len(hy) > 1 else db
            db = db + (hy @ spow) * dy_dx
            gy = spow * y
        lam_fac = lam ** (spec.d - dj)
        squared = spec.square_last and j == len(spec.dees) - 1
        if squared:
            value += lam_fac * b * b
            d_x += lam_fac * 2.0 * b * db
            grad[layout.x_slice(j)] = lam_fac * 2.0 * b * gx
            if len(gy):
                grad[layout.y_slice(j)] = lam_fac * 2.0 * b * gy
        else:
            value += lam_fac * b
            d_x += lam_fac * db
            grad[layout.x_slice(j)] = lam_fac * gx
            if len(gy):
                grad[layout.y_slice(j)] = lam_fac * gy
        if spec.d != dj:
            contrib = (spec.d - dj) * lam ** (spec.d - dj - 1)
            d_lambda += contrib * (b * b if squared else b)
    return REval(value=value, d_lambda=d_lambda, grad_h=grad, d_x=d_x)


def lambda_poly(layout: CoefficientLayout, ham, x, y):
    """Coefficients (ascending) of R as a polynomial in lambda at fixed (x,y)."""
    spec = layout.spec
    ham = np.asarray(ham, dtype=complex)
    coeffs = np.zeros(spec.d + 1, dtype=complex)
    coeffs[spec.d] = 1.0
    for j, dj in enumerate(spec.dees):
        hx = ham[layout.x_slice(j)]
        hy = ham[layout.y_slice(j)]
        b = hx @ x ** np.arange(len(hx))
        if len(hy):
            b = b + (hy @ x ** np.arange(len(hy))) * y
        if spec.square_last and j == len(spec.dees) - 1:
            b = b * b
        coeffs[spec.d - dj] += b
    return coeffs


def lambda_roots(layout: CoefficientLayout, curve, ham, x, y):
    """All d fiber roots of R(., x, y), companion eigensolve + Newton polish."""
    coeffs = lambda_poly(layout, ham, x, y)
    roots = np.polynomial.polynomial.polyroots(coeffs)
    dcoeffs = np.polynomial.polynomial.polyder(coeffs)
    for _ in range(2):
        val = np.polynomial.polynomial.polyval(roots, coeffs)
        der = np.polynomial.polynomial.polyval(roots, dcoeffs)
        safe = np.abs(der) > 1e-300
        roots = roots - np.where(safe, val / np.where(safe, der, 1.0), 0.0)
    if len(roots) > 1:
        sep = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(sep, np.inf)
        if sep.min() < 1e-8 * (1.0 + np.abs(roots).max()):
            warnings.warn("fiber root cluster separation below 1e-8",
                          ConditioningWarning)
    return roots
