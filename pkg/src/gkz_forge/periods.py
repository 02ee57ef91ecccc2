"""Numerical evaluation of period and chain integrals, plus certification.

The torus-cycle period of a section is computed two ways: as an exact
constant-term series near a dominant interior monomial, and by trapezoidal
quadrature on a product torus (spectrally accurate for analytic
integrands).  Chain integrals over paths reaching the toric boundary are
integrated segment by segment with adaptive Gauss-Legendre quadrature in a
chart in which the integrand extends holomorphically across the flagged
endpoints; reaching infinity is handled by inverting the coordinate.

``finite_difference_residual`` applies the operators of a system to any
numerically sampled function of the coefficients with exact central
finite-difference stencils, which certifies "this integral solves the
system" at a point without symbolic access to the function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegeneracyError,
    DivergentAtBoundary,
    MultipleRoot,
    NoInteriorMonomial,
    NonConvergent,
    PoleNearPath,
    SingularOnContour,
    StencilOutOfDomain,
)
from .lattice import ExponentMatrix, integer_kernel
from .series import LogSeries, OffsetLattice, _offsets_in_window


# -- data types ----------------------------------------------------------------


@dataclass(frozen=True)
class SectionData:
    """A point of the family: section coefficients over an exponent matrix.

    ``numerator_exponents`` / ``numerator_coeffs`` optionally describe a
    numerator section (general-type data); they may be empty.
    """

    A: ExponentMatrix
    coeffs: tuple
    numerator_exponents: tuple = ()
    numerator_coeffs: tuple = ()

    def __post_init__(self):
        if len(self.coeffs) != self.A.nsections:
            raise DegeneracyError("coefficient count does not match the sections")
        if all(c == 0 for c in self.coeffs):
            raise DegeneracyError("section is identically zero")
        if len(self.numerator_exponents) != len(self.numerator_coeffs):
            raise DegeneracyError("numerator exponents and coefficients differ in length")


@dataclass(frozen=True)
class Segment:
    """Smooth path piece in torus coordinates.

    Unflagged coordinates interpolate multiplicatively between the control
    points (so circles around the origin are exact arcs).  A flag of -1
    sends the coordinate to 0 at that end, +1 sends it to infinity; the
    control point entry of a flagged coordinate gives the approach
    direction (the path is linear in the chart coordinate).
    """

    start: tuple
    end: tuple
    start_flags: tuple = None
    end_flags: tuple = None

    def __post_init__(self):
        n = len(self.start)
        object.__setattr__(self, "start", tuple(complex(z) for z in self.start))
        object.__setattr__(self, "end", tuple(complex(z) for z in self.end))
        object.__setattr__(
            self, "start_flags", tuple(self.start_flags or (0,) * n)
        )
        object.__setattr__(self, "end_flags", tuple(self.end_flags or (0,) * n))
        if len(self.end) != n or len(self.start_flags) != n or len(self.end_flags) != n:
            raise DegeneracyError("segment data of inconsistent dimension")
        for z, f in zip(self.start + self.end, self.start_flags + self.end_flags):
            if f == 0 and z == 0:
                raise DegeneracyError("unflagged control point on the boundary")

    def is_null(self):
        return (
            self.start == self.end
            and self.start_flags == self.end_flags
        )


@dataclass(frozen=True)
class ChainSpec:
    """Piecewise-smooth integration chain with boundary flags."""

    segments: tuple
    clearance: float = 1e-6

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for a, b in zip(segs, segs[1:]):
            if any(a.end_flags) or any(b.start_flags):
                raise DegeneracyError("interior junctions must not carry boundary flags")
            if max(abs(x - y) for x, y in zip(a.end, b.start)) > 1e-9:
                raise DegeneracyError("consecutive segments do not match at the junction")


@dataclass(frozen=True)
class QuadratureSettings:
    tol: float = 1e-10
    gl_nodes: int = 15
    max_evals: int = 2**20
    clearance: float = 1e-6


@dataclass(frozen=True)
class IntegrationResult:
    value: complex
    error: float
    evaluations: int


# -- constant-term period series ------------------------------------------------


def torus_period_series(A: ExponentMatrix, i0=None, order=10) -> LogSeries:
    """Constant-term expansion of 1/f around a dominant interior monomial.

    With ``mu_{i0} = 0`` the coefficient of the offset with multiplicities
    ``m`` away from i0 is ``(-1)^|m| multinomial(|m|; m)`` on the monomial
    ``prod a_i^{m_i} * a_{i0}^{-|m|-1}``; this equals ``(2 pi i)^{-n}``
    times the period of the holomorphic form over the product torus where
    ``a_{i0}`` dominates.
    """
    zero = (0,) * A.dim
    if i0 is None:
        try:
            i0 = A.points.index(zero)
        except ValueError:
            raise NoInteriorMonomial(
                "no zero exponent among the sections; pass i0 explicitly"
            ) from None
    if A.points[i0] != zero:
        raise NoInteriorMonomial(
            f"section {i0} has exponent {A.points[i0]}; the expansion base must be 0"
        )
    kernel = integer_kernel(A)
    lat = OffsetLattice(kernel.vectors)
    p = A.nsections
    gamma = tuple(Fraction(-1) if i == i0 else Fraction(0) for i in range(p))
    terms = {}
    zl = (0,) * p
    for coords in _offsets_in_window(kernel.vectors, order):
        v = lat.vector(coords) if kernel.vectors else (0,) * p
        if any(v[i] < 0 for i in range(p) if i != i0):
            continue
        total = -v[i0]
        if total < 0:
            continue
        coeff = Fraction(math.factorial(total))
        for i in range(p):
            if i != i0 and v[i]:
                coeff /= math.factorial(v[i])
        if total % 2:
            coeff = -coeff
        terms[(v, zl)] = coeff
    return LogSeries(gamma=gamma, terms=terms, lattice=kernel.vectors, radius=order)


# -- torus-cycle quadrature ------------------------------------------------------


def _section_on_torus(s: SectionData, radii, grids):
    """Values of f on the product torus grid, as a dense numpy array."""
    n = s.A.dim
    angles = [np.linspace(0.0, 2.0 * np.pi, grids[j], endpoint=False) for j in range(n)]
    mesh = np.meshgrid(*angles, indexing="ij") if n > 1 else [angles[0]]
    x = [radii[j] * np.exp(1j * mesh[j]) for j in range(n)]
    f = np.zeros(mesh[0].shape, dtype=complex)
    for i, mu in enumerate(s.A.points):
        if s.coeffs[i] == 0:
            continue
        mono = np.ones(mesh[0].shape, dtype=complex)
        for j in range(n):
            if mu[j]:
                mono = mono * x[j] ** mu[j]
        f = f + s.coeffs[i] * mono
    return f


def numeric_cycle_integral(
    s: SectionData, radii, quad: QuadratureSettings = QuadratureSettings()
) -> IntegrationResult:
    """(2 pi i)^{-n} times the integral of dx_1/x_1 ... dx_n/x_n / f over |x_j| = r_j.

    Tensor-product trapezoidal rule with grid doubling; exponentially
    convergent for sections without zeros on the torus.  The reported error
    is the difference of the two finest grids.
    """
    n = s.A.dim
    radii = tuple(float(r) for r in radii)
    if len(radii) != n or any(r <= 0 for r in radii):
        raise DegeneracyError("one positive radius per torus coordinate is required")
    scale = sum(
        abs(s.coeffs[i]) * math.prod(radii[j] ** mu[j] for j in range(n))
        for i, mu in enumerate(s.A.points)
    )
    m = 8
    prev = None
    total = 0
    while m**n <= quad.max_evals:
        f = _section_on_torus(s, radii, (m,) * n)
        total += f.size
        if np.min(np.abs(f)) < quad.clearance * scale:
            raise SingularOnContour(
                f"|f| dips to {np.min(np.abs(f)):.3e} on the sampled torus"
            )
        value = complex(np.mean(1.0 / f))
        if prev is not None:
            err = abs(value - prev)
            if err <= quad.tol:
                return IntegrationResult(value=value, error=err, evaluations=total)
        prev = value
        m *= 2
    raise NonConvergent("torus quadrature did not reach the tolerance within the grid cap")


# -- chart rational forms (one-dimensional chains) --------------------------------


def _laurent_eval(poly, x):
    return sum(c * x**e for e, c in sorted(poly.items()))


def _chart_pair(s: SectionData, general_type=False):
    """Numerator and denominator Laurent data of the chart integrand.

    On the 1-torus chart the holomorphic form is dx/x and the section has a
    pole order ``sigma = -min(mu)``; clearing it gives the polynomial
    denominator ``x^sigma f`` and the monomial numerator ``x^(sigma-1)``
    (times the numerator section for general type data).
    """
    if s.A.dim != 1:
        raise DegeneracyError("chain integration is implemented for one-dimensional charts")
    mus = [mu[0] for mu in s.A.points]
    sigma = max(0, -min(mus))
    den = {}
    for mu, c in zip(mus, s.coeffs):
        if c != 0:
            den[mu + sigma] = den.get(mu + sigma, 0) + complex(c)
    den = {e: c for e, c in den.items() if c != 0}
    if not den:
        raise DegeneracyError("section is identically zero")
    if general_type:
        num = {}
        for nu, b in zip(s.numerator_exponents, s.numerator_coeffs):
            e = nu[0] + sigma - 1
            num[e] = num.get(e, 0) + complex(b)
        num = {e: c for e, c in num.items() if c != 0}
    else:
        num = {sigma - 1: 1.0 + 0j}
    return num, den


def _invert_pair(num, den):
    """Coordinate inversion x -> 1/w including the Jacobian dx = -dw/w^2."""
    num_inv = {-e - 2: -c for e, c in num.items()}
    den_inv = {-e: c for e, c in den.items()}
    return num_inv, den_inv


def _normalize_pair(num, den):
    """Shift numerator and denominator so the denominator is a polynomial
    with nonzero constant term; the quotient is unchanged."""
    if not num:
        return {}, {0: 1.0 + 0j}
    k = -min(den)
    return {e + k: c for e, c in num.items()}, {e + k: c for e, c in den.items()}


def _segment_quadrature(num, den, seg: Segment, quad, clearance):
    """Integrate the rational form over one segment (1d chart)."""
    if seg.is_null():
        return 0j, 0.0, 0
    if seg.start_flags[0] and seg.end_flags[0]:
        raise DegeneracyError(
            "a segment with both endpoints on the boundary must be split"
        )
    invert = seg.start_flags[0] == 1 or seg.end_flags[0] == 1
    if invert:
        num, den = _invert_pair(num, den)
        a = 0j if seg.start_flags[0] else 1.0 / seg.start[0]
        b = 0j if seg.end_flags[0] else 1.0 / seg.end[0]
        aflag = seg.start_flags[0] == 1
        bflag = seg.end_flags[0] == 1
    else:
        a = 0j if seg.start_flags[0] == -1 else seg.start[0]
        b = 0j if seg.end_flags[0] == -1 else seg.end[0]
        aflag = seg.start_flags[0] == -1
        bflag = seg.end_flags[0] == -1
    num, den = _normalize_pair(num, den)
    if (aflag or bflag) and num and min(num) < 0:
        raise DivergentAtBoundary(
            "the integrand has a pole at a flagged boundary endpoint"
        )

    if aflag:
        x = lambda t: b * t
        dx = lambda t: b
    elif bflag:
        x = lambda t: a * (1.0 - t)
        dx = lambda t: -a
    else:
        ratio = b / a
        w = cmath.log(ratio)
        x = lambda t: a * cmath.exp(t * w)
        dx = lambda t: a * w * cmath.exp(t * w)

    # pole clearance along the path
    for k in range(129):
        t = k / 128.0
        xt = x(t)
        scale = sum(abs(c) * abs(xt) ** e for e, c in den.items())
        if abs(_laurent_eval(den, xt)) < clearance * max(scale, 1e-300):
            raise PoleNearPath(f"denominator nearly vanishes at t = {t:.4f}")

    def integrand(t):
        xt = x(t)
        return _laurent_eval(num, xt) / _laurent_eval(den, xt) * dx(t)

    return _adaptive_gl(integrand, quad)


def _adaptive_gl(fn, quad: QuadratureSettings):
    nodes, weights = np.polynomial.legendre.leggauss(quad.gl_nodes)
    evals = [0]

    def gl(a, b):
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        evals[0] += len(nodes)
        if evals[0] > quad.max_evals:
            raise NonConvergent("adaptive quadrature exceeded its evaluation budget")
        return half * sum(w * fn(mid + half * t) for t, w in zip(nodes, weights))

    def recurse(a, b, whole, tol, depth):
        mid = (a + b) / 2.0
        left = gl(a, mid)
        right = gl(mid, b)
        err = abs(whole - left - right)
        if err <= tol or depth >= 40:
            return left + right, err
        lv, le = recurse(a, mid, left, tol / 2.0, depth + 1)
        rv, re = recurse(mid, b, right, tol / 2.0, depth + 1)
        return lv + rv, le + re

    whole = gl(0.0, 1.0)
    value, err = recurse(0.0, 1.0, whole, quad.tol, 0)
    return complex(value), float(err), evals[0]


def numeric_chain_integral(
    s: SectionData, chain: ChainSpec, quad: QuadratureSettings = QuadratureSettings()
) -> IntegrationResult:
    """Integral of the holomorphic form over a chain bounded by the toric boundary.

    Each segment is integrated with adaptive Gauss-Legendre quadrature in
    the chart where its flagged endpoint is a regular point (inverting the
    coordinate for endpoints at infinity).  Raises DivergentAtBoundary when
    the integrand does not extend across a flagged endpoint and
    PoleNearPath when the section nearly vanishes on the path.
    """
    num, den = _chart_pair(s)
    return _sum_segments(num, den, chain, quad)


def general_type_integral(
    s: SectionData, chain: ChainSpec, quad: QuadratureSettings = QuadratureSettings()
) -> IntegrationResult:
    """Chain integral of ``g_b * Omega / f_a`` for general-type numerator data."""
    if not s.numerator_exponents:
        raise DegeneracyError("general_type_integral requires numerator data")
    if all(b == 0 for b in s.numerator_coeffs):
        return IntegrationResult(value=0j, error=0.0, evaluations=0)
    num, den = _chart_pair(s, general_type=True)
    if not num:
        return IntegrationResult(value=0j, error=0.0, evaluations=0)
    return _sum_segments(num, den, chain, quad)


def _sum_segments(num, den, chain: ChainSpec, quad):
    total = 0j
    err = 0.0
    evals = 0
    for seg in chain.segments:
        v, e, n = _segment_quadrature(num, den, seg, quad, chain.clearance)
        total += v
        err += e
        evals += n
    return IntegrationResult(value=total, error=err, evaluations=evals)


# -- residues ---------------------------------------------------------------------


def denominator_roots(s: SectionData):
    """Roots of the chart denominator polynomial, sorted deterministically."""
    _, den = _chart_pair(s)
    num, den = _normalize_pair({0: 1.0 + 0j}, den)
    deg = max(den)
    coeffs = [den.get(e, 0j) for e in range(deg, -1, -1)]
    roots = np.roots(coeffs)
    return sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))


def residue_period(s: SectionData, root_index: int) -> complex:
    """2 pi i times the residue of the chart integrand at the selected root.

    One-dimensional sections with simple roots only; the residue of
    ``num/den`` at a simple root r is ``num(r)/den'(r)``.
    """
    num, den = _normalize_pair(*_chart_pair(s))
    roots = denominator_roots(s)
    if not roots:
        raise DegeneracyError("the chart denominator has no roots")
    # a numerically double root splits by about sqrt(eps), so cluster wider
    scale = max(abs(r) for r in roots) + 1.0
    for i, r in enumerate(roots):
        for rr in roots[i + 1 :]:
            if abs(r - rr) < 1e-5 * scale:
                raise MultipleRoot(f"roots {r} and {rr} coincide within tolerance")
    r = roots[root_index]
    dden = {e - 1: e * c for e, c in den.items() if e}
    return 2j * math.pi * _laurent_eval(num, r) / _laurent_eval(dden, r)


def loop_chain(center, radius, points=12, clearance=1e-6) -> ChainSpec:
    """Closed chain winding once counterclockwise around ``center``.

    Built from multiplicative arcs between points on a circle; for
    ``center = 0`` the arcs are exact circle pieces.
    """
    center = complex(center)
    verts = [
        center + radius * cmath.exp(2j * math.pi * k / points) for k in range(points)
    ]
    segs = [
        Segment(start=(verts[k],), end=(verts[(k + 1) % points],))
        for k in range(points)
    ]
    return ChainSpec(segments=tuple(segs), clearance=clearance)


# -- finite difference certification ------------------------------------------------


def fd_weights(derivative, nodes):
    """Exact finite-difference weights at 0 for the given integer nodes."""
    nodes = [Fraction(x) for x in nodes]
    n = len(nodes)
    if derivative >= n:
        raise ValueError("not enough nodes for the requested derivative")
    d = [[[Fraction(0)] * (derivative + 1) for _ in range(n)] for _ in range(n)]
    d[0][0][0] = Fraction(1)
    c1 = Fraction(1)
    for i in range(1, n):
        c2 = Fraction(1)
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for k in range(min(i, derivative) + 1):
                prev = d[i - 1][j][k - 1] if k else Fraction(0)
                d[i][j][k] = (nodes[i] * d[i - 1][j][k] - k * prev) / c3
        for k in range(min(i, derivative) + 1):
            prev = d[i - 1][i - 1][k - 1] if k else Fraction(0)
            d[i][i][k] = c1 / c2 * (k * prev - nodes[i - 1] * d[i - 1][i - 1][k])
        c1 = c2
    return [d[n - 1][j][derivative] for j in range(n)]


def central_stencil(derivative, accuracy=4):
    """Symmetric nodes and exact weights for a central difference."""
    half = (derivative + 1) // 2
    count = 2 * half - 1 + accuracy
    if count % 2 == 0:
        count += 1
    k = count // 2
    nodes = list(range(-k, k + 1))
    return nodes, fd_weights(derivative, nodes)


@dataclass(frozen=True)
class OperatorFD:
    operator: object
    residual: complex
    residual_refined: complex
    observed_order: object  # float or None when below the noise floor
    richardson: complex


@dataclass(frozen=True)
class FDReport:
    reports: tuple
    h: float

    @property
    def max_residual(self):
        return max((abs(r.residual) for r in self.reports), default=0.0)


def _derivative_at(F, a0, w, h, accuracy, cache):
    # The weighted sum is accumulated in exact rationals (the sampled values
    # are binary floats, hence exactly representable), so stencil identities
    # like "sum of weights is zero" hold exactly and directions the function
    # does not depend on contribute no rounding noise.
    acc_re = Fraction(0)
    acc_im = Fraction(0)
    stencils = [central_stencil(wi, accuracy) if wi else ((0,), (Fraction(1),)) for wi in w]
    order_total = sum(w)

    def rec(i, offset, weight):
        nonlocal acc_re, acc_im
        if i == len(w):
            point = tuple(a0[j] + h * offset[j] for j in range(len(w)))
            if point not in cache:
                try:
                    cache[point] = complex(F(point))
                except Exception as exc:  # the sampled function left its domain
                    raise StencilOutOfDomain(str(exc)) from exc
            v = cache[point]
            acc_re += weight * Fraction(v.real)
            acc_im += weight * Fraction(v.imag)
            return
        nodes, weights = stencils[i]
        for nd, wt in zip(nodes, weights):
            rec(i + 1, offset + (nd,), weight * wt)

    rec(0, (), Fraction(1))
    return complex(acc_re, acc_im) / h**order_total


def finite_difference_residual(
    spec, F, a0, h, accuracy=4
) -> FDReport:
    """Apply every operator of the system to a sampled function of the coefficients.

    Derivatives are tensor products of exact central stencils of the given
    accuracy; each residual is recomputed at h/2 for an observed convergence
    order and a Richardson extrapolation.  ``F`` takes a coefficient tuple
    and returns a complex value.
    """
    a0 = tuple(complex(z) for z in a0)
    reports = []
    noise = 1e-14

    def residual_at(op, step, cache):
        total = 0j
        for (u, w), oc in sorted(op.constant_coefficients().items()):
            mono = 1.0 + 0j
            for j, uj in enumerate(u):
                if uj:
                    mono *= a0[j] ** uj
            dw = _derivative_at(F, a0, w, step, accuracy, cache)
            total += float(oc) * mono * dw
        return total

    for op in spec.operators:
        cache_h, cache_h2 = {}, {}
        r1 = residual_at(op, h, cache_h)
        r2 = residual_at(op, h / 2.0, cache_h2)
        if abs(r1) > noise and abs(r2) > noise:
            order = math.log2(abs(r1) / abs(r2)) if abs(r2) else None
        else:
            order = None
        if accuracy == 4:
            rich = (16.0 * r2 - r1) / 15.0
        else:
            rich = (4.0 * r2 - r1) / 3.0
        reports.append(
            OperatorFD(
                operator=op,
                residual=r1,
                residual_refined=r2,
                observed_order=order,
                richardson=rich,
            )
        )
    return FDReport(reports=tuple(reports), h=float(h))
