"""Riemann theta functions and the inversion of Newton sums.

The power sums sigma_k of the separating x-coordinates are recovered from
a point phi of the Jacobian in two independent ways: by extracting a
Taylor coefficient of ln theta composed with the Abel series at infinity,
and by a contour residue on a small circle in the z-chart.  Agreement of
the two routes is the module's central consistency check.
"""

import itertools

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import (TruncationOverflow, ThetaDivisor, ResidueUnstable,
                     CycleDegenerate)
from .curves import (CurvePoint, abel_map, abel_jets, differential_series,
                     lattice_reduce)


def _lattice_points(tau, z, extra_radius, radius_cap):
    """Integer points covering the significant Gaussian mass of the sum.

    The sum is centered at the peak of |exp(pi i n.tau.n + 2 pi i n.z)|,
    which sits at n = -Y^{-1} Im z for Y = Im tau.
    """
    y = np.ascontiguousarray(tau.imag)
    g = y.shape[0]
    center = -np.linalg.solve(y, np.imag(z))
    lam_min = np.linalg.eigvalsh(y).min()
    if lam_min <= 0:
        raise ValueError("Im tau not positive definite")
    radius = np.sqrt(-np.log(1e-18) / (np.pi * lam_min)) + extra_radius
    if radius > radius_cap:
        raise TruncationOverflow(
            f"lattice radius {radius:.1f} exceeds cap {radius_cap}")
    ranges = [range(int(np.floor(c - radius)), int(np.ceil(c + radius)) + 1)
              for c in center]
    pts = np.array(list(itertools.product(*ranges)), dtype=float)
    d = pts - center
    keep = np.einsum('ij,jk,ik->i', d, y, d) <= lam_min * radius ** 2
    return pts[keep] if keep.any() else pts


def _lattice_terms(z, tau, extra_radius=3.0, radius_cap=60.0):
    """Lattice points and the common exponential term of the theta sum."""
    pts = _lattice_points(tau, z, extra_radius, radius_cap)
    expo = (np.pi * 1j * np.einsum('ij,jk,ik->i', pts, tau, pts)
            + 2j * np.pi * pts @ z)
    return pts, np.exp(expo)


def riemann_theta(z, tau, deriv=None, tol=1e-12, radius_cap=60.0):
    """Theta value (or a termwise partial derivative) by truncated sum.

    deriv is a tuple of non-negative per-component derivative orders;
    each order j multiplies the terms by (2 pi i n_s)^j.
    """
    z = np.asarray(z, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    extra = 3.0 + (2.0 * sum(deriv) if deriv else 0.0)
    pts, terms = _lattice_terms(z, tau, extra, radius_cap)
    if deriv is not None:
        for s, order in enumerate(deriv):
            if order:
                terms = terms * (2j * np.pi * pts[:, s]) ** order
    return np.sum(terms)


def theta_deriv_table(z, tau, max_order, radius_cap=60.0):
    """All partial derivatives D^j theta(z) with |j| <= max_order.

    Returns a dict multi-index -> value, computed in one lattice pass.
    """
    z = np.asarray(z, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    g = len(z)
    pts, terms = _lattice_terms(z, tau, 3.0 + 2.0 * max_order, radius_cap)
    factors = 2j * np.pi * pts  # (npts, g)
    table = {}
    for j in itertools.product(range(max_order + 1), repeat=g):
        if sum(j) > max_order:
            continue
        weighted = terms
        for s, order in enumerate(j):
            if order:
                weighted = weighted * factors[:, s] ** order
        table[j] = np.sum(weighted)
    return table


def q_series_theta(z, tau, nmax=60):
    """Genus-1 oracle: direct q-series sum theta = sum q^(n^2) e^(2 pi i n z)."""
    q = np.exp(np.pi * 1j * complex(np.asarray(tau).ravel()[0]))
    n = np.arange(-nmax, nmax + 1)
    zz = complex(np.asarray(z).ravel()[0])
    return np.sum(q ** (n ** 2) * np.exp(2j * np.pi * n * zz))


def riemann_constants(curve, theta_data, rng=None, nsamples=6):
    """Vector K with theta(A(D) + K) = 0 for effective degree-(g-1) D.

    Searched over the 2^(2g) half-periods (m + tau n)/2; the winner is
    validated on random divisors and stored on theta_data.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    tau = theta_data.tau
    g = tau.shape[0]
    divisors = []
    while len(divisors) < nsamples:
        pts = []
        for _ in range(g - 1):
            x = 2.0 * (rng.standard_normal() + 1j * rng.standard_normal())
            if curve.nearest_branch_distance(x) < 2 * curve.exclusion_radius:
                continue
            y = np.sqrt(curve.p(x))
            if rng.random() < 0.5:
                y = -y
            pts.append(CurvePoint(x, y))
        if len(pts) == g - 1:
            divisors.append(sum(
                (abel_map(curve, theta_data, p) for p in pts),
                np.zeros(g, dtype=complex)))
    scale = abs(riemann_theta(np.zeros(g), tau))
    best, best_score = None, np.inf
    for mbits in itertools.product((0, 1), repeat=g):
        for nbits in itertools.product((0, 1), repeat=g):
            k = 0.5 * (np.array(mbits, dtype=complex)
                       + tau @ np.array(nbits, dtype=complex))
            score = max(abs(riemann_theta(lattice_reduce(theta_data, a + k),
                                          tau))
                        for a in divisors)
            if score < best_score:
                best, best_score = k, score
    if best_score > 1e-5 * scale:
        raise CycleDegenerate(
            f"no half-period satisfies Riemann vanishing "
            f"(best residual {best_score:.2e})")
    theta_data.riemann_constants = best
    return best


# ----------------------------------------------------------------------
# truncated scalar series helpers (coefficient arrays, ascending)
# ----------------------------------------------------------------------

def _smul(a, b, n):
    out = npoly.polymul(a, b)[:n]
    if len(out) < n:
        out = np.pad(out, (0, n - len(out)))
    return out.astype(complex)

def _slog(f, n):
    """Series ln(f) with f[0] != 0, by integrating f'/f."""
    f = np.asarray(f, dtype=complex)
    inv = np.zeros(n, dtype=complex)
    inv[0] = 1.0 / f[0]
    for m in range(1, n):
        acc = sum(f[j] * inv[m - j]
                  for j in range(1, min(m, len(f) - 1) + 1))
        inv[m] = -acc / f[0]
    quot = _smul(npoly.polyder(f), inv, n)
    out = np.zeros(n, dtype=complex)
    out[0] = np.log(f[0])
    out[1:] = quot[:n - 1] / np.arange(1, n)
    return out


def abel_series(curve, theta_data, nterms):
    """Vector power series A(z) of the Abel map from infinity in z."""
    w = differential_series(curve, theta_data.normalization, nterms)
    out = np.zeros((w.shape[0], nterms + 1), dtype=complex)
    out[:, 1:] = w / np.arange(1, nterms + 1)[None, :]
    return out  # out[s, l] = phi_s^(l) / l, A_s(z) = sum_l out[s,l] z^l


def sigma_series(curve, theta_data, phi, k, const=0.0):
    """sigma_k(phi) via the Taylor coefficient of ln theta at infinity.

    sigma_k = const - 2k [z^(2k)] ln theta(A(z) - phi - K).
    """
    tau = theta_data.tau
    g = tau.shape[0]
    n = 2 * k + 1
    kvec = theta_data.riemann_constants
    v0 = lattice_reduce(theta_data, -np.asarray(phi, dtype=complex) - kvec)
    if abs(riemann_theta(v0, tau)) < 1e-10 * abs(
            riemann_theta(np.zeros(g), tau)):
        raise ThetaDivisor("theta(-phi-K) below tolerance")
    a = abel_series(curve, theta_data, 2 * k)  # (g, n)
    table = theta_deriv_table(v0, tau, 2 * k)
    # theta(v0 + A(z)) as a series: sum_j D^j theta / j! * A(z)^j
    comp = np.zeros(n, dtype=complex)
    powers = {}
    for s in range(g):
        pw = [np.zeros(n, dtype=complex) for _ in range(2 * k + 1)]
        pw[0][0] = 1.0
        for e in range(1, 2 * k + 1):
            pw[e] = _smul(pw[e - 1], a[s, :n], n)
        powers[s] = pw
    from math import factorial
    for j, val in table.items():
        term = np.zeros(n, dtype=complex)
        term[0] = 1.0
        fact = 1.0
        for s, order in enumerate(j):
            term = _smul(term, powers[s][order], n)
            fact *= factorial(order)
        comp = comp + (val / fact) * term
    logc = _slog(comp, n)
    return const - 2 * k * logc[2 * k]


def sigma_contour(curve, theta_data, phi, k, const=0.0, radius=None,
                  nsamples=64, tol=1e-6):
    """sigma_k(phi) by the residue of x^k d ln theta at infinity.

    Samples the z-chart circle |z| = r with the trapezoid rule, doubling
    the sample count until two refinements agree.
    """
    tau = theta_data.tau
    g = tau.shape[0]
    kvec = theta_data.riemann_constants
    if radius is None:
        from .curves import _chart_radius
        radius = 0.5 * _chart_radius(curve)
    nterms = 96
    w = differential_series(curve, theta_data.normalization, nterms)
    a_coeff = np.zeros((g, nterms + 1), dtype=complex)
    a_coeff[:, 1:] = w / np.arange(1, nterms + 1)[None, :]
    v0 = -np.asarray(phi, dtype=complex) - kvec
    shift = lattice_reduce(theta_data, v0) - v0
    v0 = v0 + shift

    def residue(nn):
        zs = radius * np.exp(2j * np.pi * np.arange(nn) / nn)
        acc = 0.0 + 0.0j
        for z in zs:
            zp = z ** np.arange(nterms + 1)
            az = a_coeff @ zp
            daz = w @ (z ** np.arange(nterms))
            v = v0 + az
            th = riemann_theta(v, tau)
            if abs(th) < 1e-12:
                raise ThetaDivisor("theta vanishes on the sampling circle")
            grad = np.array([riemann_theta(v, tau, deriv=tuple(
                1 if s == t else 0 for t in range(g))) for s in range(g)])
            acc += (grad @ daz) / th * z ** (1 - 2 * k)
        return acc / nn

    r1 = residue(nsamples)
    r2 = residue(2 * nsamples)
    if abs(r1 - r2) > tol:
        raise ResidueUnstable(
            f"residue shifted by {abs(r1 - r2):.2e} under sample doubling")
    return const - r2


def sigma_constant(curve, theta_data, k, ref_points):
    """Calibrate the additive constant of sigma_k on a known configuration."""
    phi = sum((abel_map(curve, theta_data, p) for p in ref_points),
              np.zeros(theta_data.tau.shape[0], dtype=complex))
    raw = sigma_series(curve, theta_data, phi, k, const=0.0)
    truth = sum(p.x ** k for p in ref_points)
    return truth - raw


def jacobi_inversion_check(curve, theta_data, points, ref_points):
    """Recover the x-multiset of `points` from phi = sum A(gamma_i).

    ref_points calibrates the additive constants.  Returns a report with
    the recovered roots, both sigma routes, and the recovery error.
    """
    g = theta_data.tau.shape[0]
    if theta_data.riemann_constants is None:
        riemann_constants(curve, theta_data)
    phi = sum((abel_map(curve, theta_data, p) for p in points),
              np.zeros(g, dtype=complex))
    sigmas, sigmas_contour = [], []
    for k in range(1, g + 1):
        const = sigma_constant(curve, theta_data, k, ref_points)
        sigmas.append(sigma_series(curve, theta_data, phi, k, const))
        sigmas_contour.append(
            sigma_contour(curve, theta_data, phi, k, const))
    # Newton's identities: e_1..e_g from the power sums
    e = [1.0 + 0.0j]
    for m in range(1, g + 1):
        acc = 0.0 + 0.0j
        for i in range(1, m + 1):
            acc += (-1) ** (i - 1) * e[m - i] * sigmas[i - 1]
        e.append(acc / m)
    coeffs = np.array([(-1) ** m * e[m] for m in range(g, -1, -1)],
                      dtype=complex)  # ascending: (-1)^g e_g, ..., -e_1, 1
    roots = np.polynomial.polynomial.polyroots(coeffs)
    target = np.array(sorted([p.x for p in points],
                             key=lambda v: (v.real, v.imag)))
    got = np.array(sorted(roots, key=lambda v: (v.real, v.imag)))
    return {
        "sigma_series": np.array(sigmas),
        "sigma_contour": np.array(sigmas_contour),
        "roots": got,
        "target": target,
        "error": float(np.abs(got - target).max()),
        "route_gap": float(np.abs(np.array(sigmas)
                                  - np.array(sigmas_contour)).max()),
    }
