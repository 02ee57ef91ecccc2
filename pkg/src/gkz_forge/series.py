"""Gamma series and Frobenius logarithmic series solutions.

Series live on a coset ``gamma + L`` of the relation lattice ``L`` of an
exponent matrix.  A term is ``coeff * a^(gamma+v) * prod_i log(a_i)^m_i``
keyed by the integer offset ``v`` and the log multi-index ``m``.  Plain
series carry Fraction (or float) coefficients; the deformed series produced
for the Frobenius method carry eps-jets, from which the logarithmic
solutions are extracted as eps-power coefficients.

Two coefficient conventions appear:

* ``gamma_series`` uses raw reciprocal-gamma coefficients
  ``1 / prod_i Gamma(gamma_i + v_i + 1)`` with ``1/Gamma`` equal to zero at
  nonpositive integers.  Deformed exponents expand the reciprocal gamma
  factors as numeric eps-jets (reflection formula at nonpositive integer
  base, shifted log-gamma series elsewhere).
* ``frobenius_basis`` works with ratios of gamma values at integer shifts,
  which are rational functions of the deformation parameter.  Everything
  there is exact rational arithmetic, so independence counts are exact.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath as mp

from .errors import (
    DegreeViolation,
    TruncationTooSmall,
    UnsupportedFamily,
)
from . import intlinalg
from .lattice import integer_kernel, normalized_volume
from .tautsys import SystemSpec
from .jets import Jet


# -- reciprocal gamma jets ----------------------------------------------------


def reciprocal_gamma_value(q):
    """1/Gamma(q) for rational q; exact at integers, float elsewhere."""
    q = Fraction(q)
    if q.denominator == 1:
        qi = int(q)
        if qi <= 0:
            return Fraction(0)
        return Fraction(1, math.factorial(qi - 1))
    return 1.0 / math.gamma(float(q))


def _exp_jet(j: Jet) -> Jet:
    c0 = j.coeffs[0]
    rest = Jet((0,) + j.coeffs[1:], j.order)
    out = Jet.constant(mp.mpf(1), j.order)
    term = Jet.constant(mp.mpf(1), j.order)
    for k in range(1, j.order + 1):
        term = term * rest * mp.mpf(1) / k
        out = out + term
    return out * mp.e**c0 if c0 != 0 else out


def _log_gamma_jet(q, slope, order):
    """Jet of logGamma(q + slope*eps) for q > 0, mpf coefficients."""
    qm = mp.mpf(q.numerator) / q.denominator
    sm = mp.mpf(slope.numerator) / slope.denominator
    coeffs = [mp.loggamma(qm)]
    for k in range(1, order + 1):
        coeffs.append(mp.psi(k - 1, qm) * sm**k / mp.factorial(k))
    return Jet(coeffs)


def _sin_pi_eps_jet(slope, order):
    """Jet of sin(pi*slope*eps)/pi."""
    sm = mp.mpf(slope.numerator) / slope.denominator
    coeffs = [mp.mpf(0)] * (order + 1)
    j = 0
    while 2 * j + 1 <= order:
        coeffs[2 * j + 1] = (-1) ** j * mp.pi ** (2 * j) * sm ** (2 * j + 1) / mp.factorial(
            2 * j + 1
        )
        j += 1
    return Jet(coeffs)


def reciprocal_gamma_jet(base, slope, order) -> Jet:
    """Jet of 1/Gamma(base + slope*eps), float coefficients.

    At nonpositive integer base the reflection formula
    ``1/Gamma(z) = Gamma(1-z) sin(pi z)/pi`` supplies the expansion; other
    bases are shifted into the positive half line and expanded through the
    log-gamma series.
    """
    base = Fraction(base)
    slope = Fraction(slope)
    if slope == 0 or order == 0:
        v = reciprocal_gamma_value(base)
        return Jet.constant(float(v) if not isinstance(v, Fraction) else v, order)
    with mp.workdps(40):
        if base.denominator == 1 and base <= 0:
            b = int(base)
            gj = _exp_jet(_log_gamma_jet(Fraction(1 - b), -slope, order))
            sj = _sin_pi_eps_jet(slope, order)
            out = gj * sj
            if b % 2:
                out = -out
        else:
            m = 0
            while base + m <= 0:
                m += 1
            out = _exp_jet(-_log_gamma_jet(base + m, slope, order))
            for j in range(m):
                lin = Jet.linear(
                    mp.mpf((base + j).numerator) / (base + j).denominator,
                    mp.mpf(slope.numerator) / slope.denominator,
                    order,
                )
                out = out * lin
        return Jet(tuple(float(c) for c in out.coeffs))


def gamma_ratio_jet(base, slope, shift, order):
    """Exact jet of Gamma(g+1)/Gamma(g+shift+1) at g = base + slope*eps.

    Returned as ``(valuation, unit)`` with ``unit`` a Jet whose constant
    term is nonzero; the ratio itself is ``eps^valuation * unit``.  Negative
    valuation means the ratio has a pole at eps = 0.
    """
    base = Fraction(base)
    slope = Fraction(slope)
    num = []  # linear factors in the numerator
    den = []
    if shift >= 0:
        for j in range(1, shift + 1):
            den.append((base + j, slope))
    else:
        for j in range(-shift):
            num.append((base - j, slope))
    val = 0
    unit = Jet.constant(Fraction(1), order)
    for c0, c1 in num:
        if c0 == 0:
            val += 1
            unit = unit * Jet.constant(c1, order)
        else:
            unit = unit * Jet.linear(c0, c1, order)
    for c0, c1 in den:
        if c0 == 0:
            val -= 1
            unit = unit / Jet.constant(c1, order)
        else:
            unit = unit / Jet.linear(c0, c1, order)
    return val, unit


# -- offset lattice helper ----------------------------------------------------


class OffsetLattice:
    """Membership and coordinates for the integer span of basis rows."""

    def __init__(self, basis):
        self.basis = tuple(tuple(b) for b in basis)
        self._cache = {}

    @property
    def rank(self):
        return len(self.basis)

    def coords(self, v):
        """Coordinates of v in the basis, or None when v is off-lattice."""
        v = tuple(v)
        if v in self._cache:
            return self._cache[v]
        if not self.basis:
            out = () if all(x == 0 for x in v) else None
        else:
            rows = list(zip(*self.basis))  # p x r matrix with columns = basis
            sol = intlinalg.solve_integer(rows, v)
            if sol is None:
                out = None
            else:
                # solve_integer guarantees rows @ sol = v
                out = sol
        self._cache[v] = out
        return out

    def vector(self, coords):
        p = len(self.basis[0])
        return tuple(
            sum(coords[i] * self.basis[i][j] for i in range(len(self.basis)))
            for j in range(p)
        )


# -- the series container -----------------------------------------------------


@dataclass(frozen=True)
class LogSeries:
    """Truncated series with fractional exponents and logarithm powers.

    ``terms`` maps ``(offset, logpow)`` to a coefficient.  ``lattice`` and
    ``radius`` describe the guaranteed-complete region: every offset whose
    lattice coordinates are bounded by ``radius`` in max norm is either
    stored or exactly zero.  ``radius=None`` states that the stored terms
    are the whole series (used for monomials and rational candidates).
    """

    gamma: tuple
    terms: dict
    lattice: tuple = ()
    radius: object = None
    direction: tuple = None

    @property
    def nvars(self):
        return len(self.gamma)

    def is_jet_valued(self):
        return any(isinstance(c, Jet) for c in self.terms.values())

    def exponent(self, offset):
        return tuple(g + o for g, o in zip(self.gamma, offset))

    def sorted_terms(self):
        return sorted(
            self.terms.items(), key=lambda kv: (sum(abs(x) for x in kv[0][0]), kv[0])
        )

    def eps_coefficient(self, j) -> "LogSeries":
        """Extract the eps^j coefficient of a jet-valued deformed series.

        The deformation multiplies every monomial by ``a^(eps*direction)``,
        whose expansion contributes powers of ``sum_i direction_i log a_i``;
        they are spread over log multi-indices here.
        """
        if not self.is_jet_valued():
            if j == 0:
                return self
            raise ValueError("plain series have no higher eps coefficients")
        direction = tuple(
            Fraction(d) for d in (self.direction or (0,) * self.nvars)
        )
        support = [i for i, d in enumerate(direction) if d != 0]
        out = defaultdict(Fraction)
        for (v, m), jet in self.terms.items():
            if any(m):
                raise ValueError("jet-valued series must not carry explicit logs")
            for logtot in range(j + 1):
                c = jet.coefficient(j - logtot)
                if c == 0:
                    continue
                for alpha in _compositions(logtot, support, self.nvars):
                    factor = Fraction(1)
                    for i in support:
                        if alpha[i]:
                            factor *= direction[i] ** alpha[i] / math.factorial(alpha[i])
                    out[(v, alpha)] += c * factor
        terms = {k: c for k, c in out.items() if c != 0}
        return LogSeries(
            gamma=self.gamma,
            terms=terms,
            lattice=self.lattice,
            radius=self.radius,
        )

    def evaluate(self, avec):
        """Numeric value at a point of the torus (principal branches)."""
        import cmath

        logs = [cmath.log(complex(a)) for a in avec]
        total = 0j
        for (v, m), c in self.sorted_terms():
            if isinstance(c, Jet):
                raise ValueError("jet-valued series cannot be evaluated directly")
            term = complex(c)
            for i in range(self.nvars):
                e = self.gamma[i] + v[i]
                if e:
                    term *= cmath.exp(float(e) * logs[i])
                if m[i]:
                    term *= logs[i] ** m[i]
            total += term
        return total

    def scaled(self, factor):
        return LogSeries(
            gamma=self.gamma,
            terms={k: c * factor for k, c in self.terms.items()},
            lattice=self.lattice,
            radius=self.radius,
            direction=self.direction,
        )

    def render(self):
        lines = ["gamma = (" + ", ".join(str(g) for g in self.gamma) + ")"]
        for (v, m), c in self.sorted_terms():
            if isinstance(c, Jet):
                ctxt = f"({c.render()})"
            elif isinstance(c, Fraction):
                ctxt = str(c)
            else:
                ctxt = repr(c)
            lines.append(f"  offset ({', '.join(str(x) for x in v)})"
                         f" log ({', '.join(str(x) for x in m)}) : {ctxt}")
        return "\n".join(lines)


def _compositions(total, support, nvars):
    """Multi-indices with the given total, supported on ``support``."""
    if total == 0:
        yield (0,) * nvars
        return
    if not support:
        return
    first, rest = support[0], support[1:]
    for head in range(total + 1):
        for tail in _compositions(total - head, rest, nvars):
            alpha = list(tail)
            alpha[first] = head
            yield tuple(alpha)


def monomial_series(gamma, coeff=Fraction(1)) -> LogSeries:
    """A single monomial (or finitely supported candidate) as a LogSeries."""
    gamma = tuple(Fraction(g) for g in gamma)
    p = len(gamma)
    return LogSeries(
        gamma=gamma,
        terms={((0,) * p, (0,) * p): coeff},
        lattice=(),
        radius=None,
    )


def _offsets_in_window(basis, radius):
    if not basis:
        return [()]
    ranges = [range(-radius, radius + 1) for _ in basis]
    return sorted(product(*ranges))


def _check_degree(A, beta, gamma):
    lhs = A.degree(gamma)
    rhs = tuple(-Fraction(b) for b in beta)
    if lhs != rhs:
        raise DegreeViolation(
            f"A.gamma = {lhs} does not equal -beta = {rhs}"
        )


def gamma_series(spec: SystemSpec, gamma, order, direction=None, jet_order=0) -> LogSeries:
    """Truncated reciprocal-gamma series with base exponent ``gamma``.

    Requires ``A.gamma = -beta``.  With a ``direction`` (a rational vector
    in the kernel of A) the exponent is deformed to ``gamma + eps*direction``
    and the coefficients become numeric eps-jets of order ``jet_order``.
    """
    gamma = tuple(Fraction(g) for g in gamma)
    A = spec.A
    _check_degree(A, spec.beta, gamma)
    if direction is not None:
        direction = tuple(Fraction(d) for d in direction)
        if any(d != 0 for d in A.degree(direction)):
            raise DegreeViolation("deformation direction must lie in ker A")
    kernel = integer_kernel(A)
    if not kernel.vectors:
        # no offsets: the reciprocal-gamma prefactor is a single overall
        # constant, so the series is normalized to the bare monomial
        return LogSeries(
            gamma=gamma,
            terms={((0,) * A.nsections, (0,) * A.nsections): Fraction(1)},
            lattice=(),
            radius=order,
            direction=direction,
        )
    lat = OffsetLattice(kernel.vectors)
    terms = {}
    zero_log = (0,) * A.nsections
    for coords in _offsets_in_window(kernel.vectors, order):
        v = lat.vector(coords) if kernel.vectors else (0,) * A.nsections
        if direction is None:
            coeff = Fraction(1)
            for i in range(A.nsections):
                f = reciprocal_gamma_value(gamma[i] + v[i] + 1)
                if f == 0:
                    coeff = Fraction(0)
                    break
                coeff = coeff * f
            if coeff != 0:
                terms[(v, zero_log)] = coeff
        else:
            jet = Jet.constant(Fraction(1), jet_order)
            for i in range(A.nsections):
                jet = jet * reciprocal_gamma_jet(
                    gamma[i] + v[i] + 1, direction[i], jet_order
                )
                if jet.is_zero():
                    break
            if not jet.is_zero():
                terms[(v, zero_log)] = jet
    return LogSeries(
        gamma=gamma,
        terms=terms,
        lattice=kernel.vectors,
        radius=order,
        direction=direction,
    )


# -- Frobenius bases ----------------------------------------------------------


def _ratio_jet_family(gamma0, slope, offsets, lat, jet_order):
    """Exact jets of the gamma-ratio coefficients over a window of offsets.

    Returns ``None`` when some coefficient has a pole at eps = 0 (the
    deformed family is then not holomorphic and unusable).
    """
    p = len(gamma0)
    family = {}
    for coords in offsets:
        v = lat.vector(coords) if lat.basis else (0,) * p
        val = 0
        unit = Jet.constant(Fraction(1), jet_order)
        for i in range(p):
            vi, ui = gamma_ratio_jet(gamma0[i], slope[i], v[i], jet_order)
            val += vi
            unit = unit * ui
        if val < 0:
            return None
        if val > jet_order:
            continue
        jet = unit.shifted(val)
        if not jet.is_zero():
            family[v] = jet
    return family


def _deformed_series(gamma0, slope, family, lattice, radius):
    return LogSeries(
        gamma=tuple(Fraction(g) for g in gamma0),
        terms={(v, (0,) * len(gamma0)): jet for v, jet in family.items()},
        lattice=lattice,
        radius=radius,
        direction=tuple(Fraction(s) for s in slope),
    )


def _one_sided(family, lat):
    """True when the eps^0 support does not straddle both lattice sides."""
    pos = neg = False
    for v, jet in family.items():
        if jet.coefficient(0) == 0:
            continue
        coords = lat.coords(v)
        s = next((x for x in coords if x != 0), 0)
        if s > 0:
            pos = True
        elif s < 0:
            neg = True
    return not (pos and neg)


def _candidate_classes(gamma_star, delta):
    """Fractional shifts lam with some integral entry of gamma_star + lam*delta."""
    seen = set()
    for gi, di in zip(gamma_star, delta):
        if di == 0:
            continue
        for t in range(abs(di)):
            lam = Fraction(t - gi, di) % 1
            seen.add(lam)
    return sorted(seen)


def frobenius_basis(spec: SystemSpec, order, jet_order=None, max_kernel_rank=2):
    """A basis of series solutions near the large complex structure limit.

    The system must consist of box and Euler operators of its exponent
    matrix (only ``spec.A`` and ``spec.beta`` enter the construction).
    Deforms a resonant base exponent along kernel directions with an exact
    eps-jet, and returns the eps-power coefficients as logarithmic series.
    The list has length equal to the normalized volume of the exponent
    polytope and is linearly independent (checked by ``count_independent``).
    Exact rational coefficients throughout.
    """
    A = spec.A
    vol = normalized_volume(A.points)
    kernel = integer_kernel(A)
    rank = kernel.rank
    if rank > max_kernel_rank:
        raise UnsupportedFamily(
            f"kernel rank {rank} exceeds the configured cap {max_kernel_rank}"
        )
    neg_beta = [-Fraction(b) for b in spec.beta]
    jet_order = vol - 1 if jet_order is None else jet_order

    if rank == 0:
        gamma_star = intlinalg.solve_rational(A.A, neg_beta)
        if gamma_star is None:
            raise UnsupportedFamily("no exponent solves the degree constraints")
        if all(abs(g) <= order for g in gamma_star):
            return [monomial_series(gamma_star)]
        return []

    gamma_star = intlinalg.solve_rational(A.A, neg_beta)
    if gamma_star is None:
        raise UnsupportedFamily("no exponent solves the degree constraints")
    lat = OffsetLattice(kernel.vectors)
    offsets = _offsets_in_window(kernel.vectors, order)

    if rank == 1:
        delta = kernel.vectors[0]
        for lam in _candidate_classes(gamma_star, delta):
            gamma0 = tuple(g + lam * d for g, d in zip(gamma_star, delta))
            family = _ratio_jet_family(gamma0, delta, offsets, lat, jet_order)
            if family is None or not _one_sided(family, lat):
                continue
            deformed = _deformed_series(gamma0, delta, family, kernel.vectors, order)
            basis = [deformed.eps_coefficient(j) for j in range(vol)]
            if count_independent(basis) == vol:
                return basis
        raise UnsupportedFamily("no resonant exponent class yields a full basis")

    # rank 2: fixed integral base exponent, several deformation directions
    if any(b.denominator != 1 for b in neg_beta):
        raise UnsupportedFamily("rank-2 families need an integral parameter vector")
    gamma0 = intlinalg.solve_integer(A.A, [int(b) for b in neg_beta])
    if gamma0 is None:
        raise UnsupportedFamily("rank-2 families need an integral base exponent")
    gamma0 = tuple(Fraction(g) for g in gamma0)
    b1, b2 = kernel.vectors
    pool = [
        b1,
        b2,
        tuple(x + y for x, y in zip(b1, b2)),
        tuple(x - y for x, y in zip(b1, b2)),
        tuple(2 * x + y for x, y in zip(b1, b2)),
        tuple(x + 2 * y for x, y in zip(b1, b2)),
    ]
    basis = []
    for slope in pool:
        family = _ratio_jet_family(gamma0, slope, offsets, lat, jet_order)
        if family is None:
            continue
        deformed = _deformed_series(gamma0, slope, family, kernel.vectors, order)
        for j in range(vol):
            candidate = deformed.eps_coefficient(j)
            if not candidate.terms:
                continue
            if count_independent(basis + [candidate]) > len(basis):
                basis.append(candidate)
            if len(basis) == vol:
                return basis
    raise UnsupportedFamily(
        "deformation directions did not produce a volume-sized basis"
    )


# -- residuals and independence ------------------------------------------------


@dataclass(frozen=True)
class OperatorResidual:
    operator: object
    residual: LogSeries
    clean: bool
    checked: int
    skipped: int
    max_abs: float


def _apply_partial(pieces, i):
    out = defaultdict(lambda: Fraction(0))
    for (e, m), c in pieces.items():
        if e[i] != 0:
            e2 = e[:i] + (e[i] - 1,) + e[i + 1 :]
            out[(e2, m)] += c * e[i]
        if m[i] > 0:
            e2 = e[:i] + (e[i] - 1,) + e[i + 1 :]
            m2 = m[:i] + (m[i] - 1,) + m[i + 1 :]
            out[(e2, m2)] += c * m[i]
    return {k: c for k, c in out.items() if c != 0}


def apply_operator(op, series: LogSeries) -> dict:
    """Raw term map of ``op`` applied to ``series`` (offset, logpow) -> coeff.

    The action is exact on every term: ``a_i d_i`` scales by the exponent,
    ``d_i`` shifts exponents down and differentiates logarithm factors.
    Contributions are accumulated in a fixed order so float summation is
    deterministic.
    """
    const_terms = sorted(op.constant_coefficients().items())
    bucket = defaultdict(list)
    for (v, m), coeff in series.sorted_terms():
        e = series.exponent(v)
        for (u, w), oc in const_terms:
            pieces = {(e, m): coeff * oc}
            for i, wi in enumerate(w):
                for _ in range(wi):
                    pieces = _apply_partial(pieces, i)
                    if not pieces:
                        break
            for (e2, m2), c2 in sorted(pieces.items()):
                v2 = tuple(
                    int(e2[i] - series.gamma[i]) + u[i] for i in range(series.nvars)
                )
                bucket[(v2, m2)].append(c2)
    out = {}
    for key in sorted(bucket):
        total = sum(bucket[key][1:], start=bucket[key][0])
        if total != 0:
            out[key] = total
    return out


def annihilate_check(spec: SystemSpec, series: LogSeries, tol=None):
    """Apply every operator of the system to the series and report residuals.

    A residual coefficient is only trusted when every lattice offset that
    could feed it lies inside the series' guaranteed-complete window; the
    frontier terms produced by truncation are counted but not judged.  The
    report is ``clean`` when all trusted coefficients vanish (exactly for
    rational coefficients, below ``tol`` for floats).
    """
    if series.is_jet_valued():
        raise ValueError("annihilate_check expects a numeric series")
    lat = OffsetLattice(series.lattice)
    exact = all(isinstance(c, Fraction) for c in series.terms.values())
    if tol is None:
        if exact:
            tol = 0
        else:
            scale = max((abs(c) for c in series.terms.values()), default=1.0)
            tol = 1e-12 * max(1.0, float(scale))
    reports = []
    for op in spec.operators:
        if (
            series.radius is not None
            and series.terms
            and op.order() > series.radius
        ):
            raise TruncationTooSmall(
                f"operator order {op.order()} exceeds truncation {series.radius}"
            )
        raw = apply_operator(op, series)
        shifts = sorted(
            {
                tuple(w[i] - u[i] for i in range(series.nvars))
                for (u, w) in op.constant_coefficients()
            }
        )
        kept = {}
        skipped = 0
        for (v2, m2), c in raw.items():
            reliable = True
            if series.radius is not None:
                for s in shifts:
                    pre = tuple(v2[i] + s[i] for i in range(series.nvars))
                    coords = lat.coords(pre)
                    if coords is not None and any(
                        abs(x) > series.radius for x in coords
                    ):
                        reliable = False
                        break
            if reliable:
                kept[(v2, m2)] = c
            else:
                skipped += 1
        max_abs = max((abs(float(c)) for c in kept.values()), default=0.0)
        clean = all(
            (c == 0 if isinstance(c, Fraction) and exact else abs(float(c)) <= tol)
            for c in kept.values()
        )
        residual = LogSeries(
            gamma=series.gamma,
            terms={k: c for k, c in kept.items() if c != 0},
            lattice=(),
            radius=None,
        )
        reports.append(
            OperatorResidual(
                operator=op,
                residual=residual,
                clean=clean,
                checked=len(kept),
                skipped=skipped,
                max_abs=max_abs,
            )
        )
    return reports


def count_independent(series_list) -> int:
    """Rank of the coefficient matrix over the shared monomial/log basis.

    Exact when every coefficient is rational; floats fall back to a
    numerical rank.
    """
    series_list = list(series_list)
    if not series_list:
        return 0
    keys = set()
    for s in series_list:
        for (v, m) in s.terms:
            keys.add((s.exponent(v), m))
    keys = sorted(keys)
    exact = all(
        isinstance(c, Fraction) for s in series_list for c in s.terms.values()
    )
    rows = []
    for s in series_list:
        lookup = {(s.exponent(v), m): c for (v, m), c in s.terms.items()}
        rows.append([lookup.get(k, Fraction(0)) for k in keys])
    if exact:
        return intlinalg.rank(rows)
    import numpy as np

    m = np.array([[float(x) for x in row] for row in rows], dtype=float)
    if m.size == 0:
        return 0
    return int(np.linalg.matrix_rank(m, tol=1e-9 * max(1.0, float(abs(m).max()))))
