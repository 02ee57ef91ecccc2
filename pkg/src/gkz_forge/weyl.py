"""Exact arithmetic in the Weyl algebra of coordinates a1..ap.

Elements are kept in normal order (all ``a`` factors to the left of all
``d`` factors) with coefficients that are eps-jets over exact rationals;
jet order 0 gives the plain rational Weyl algebra.  Multiplication applies
the commutation rule ``d_i a_i = a_i d_i + 1`` exactly, so equality of
elements is structural equality of their normal forms.

The canonical text rendering (``a1^2 d1^2 + a1 d1``) is bit-exact: terms in
descending lexicographic order of their exponent keys, coefficients as
reduced fractions, eps powers written out.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb

from .errors import VariableMismatch
from .jets import Jet


def _falling(x, k):
    out = 1
    for i in range(k):
        out *= x - i
    return out


class WeylElement:
    """Normal-ordered element of the Weyl algebra in ``nvars`` variables."""

    __slots__ = ("nvars", "jet_order", "terms")

    def __init__(self, nvars, terms=None, jet_order=0):
        self.nvars = nvars
        self.jet_order = jet_order
        clean = {}
        for (u, w), c in (terms or {}).items():
            if not isinstance(c, Jet):
                c = Jet.constant(Fraction(c), jet_order)
            else:
                c = c.truncated(jet_order)
            if len(u) != nvars or len(w) != nvars:
                raise VariableMismatch("term exponent length does not match nvars")
            if c.is_zero():
                continue
            key = (tuple(u), tuple(w))
            if key in clean:
                c = clean[key] + c
            if c.is_zero():
                clean.pop(key, None)
            else:
                clean[key] = c
        self.terms = clean

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, nvars, jet_order=0):
        return cls(nvars, {}, jet_order)

    @classmethod
    def one(cls, nvars, jet_order=0):
        z = (0,) * nvars
        return cls(nvars, {(z, z): Fraction(1)}, jet_order)

    @classmethod
    def constant(cls, value, nvars, jet_order=0):
        z = (0,) * nvars
        return cls(nvars, {(z, z): value}, jet_order)

    @classmethod
    def coordinate(cls, i, nvars, jet_order=0):
        """The multiplication operator a_{i+1} (0-based index)."""
        u = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {(u, (0,) * nvars): Fraction(1)}, jet_order)

    @classmethod
    def partial(cls, i, nvars, jet_order=0):
        """The derivation d_{i+1} (0-based index)."""
        w = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {((0,) * nvars, w): Fraction(1)}, jet_order)

    @classmethod
    def monomial(cls, u, w, coeff=Fraction(1), jet_order=0):
        return cls(len(u), {(tuple(u), tuple(w)): coeff}, jet_order)

    # -- ring structure ----------------------------------------------------

    def _check(self, other):
        if self.nvars != other.nvars:
            raise VariableMismatch(
                f"operands act on {self.nvars} and {other.nvars} variables"
            )
        if self.jet_order != other.jet_order:
            raise VariableMismatch("operands carry different jet orders")

    def __add__(self, other):
        if not isinstance(other, WeylElement):
            other = WeylElement.constant(other, self.nvars, self.jet_order)
        self._check(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            acc = terms.get(key, Jet.zero(self.jet_order)) + c
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
        return WeylElement(self.nvars, terms, self.jet_order)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement(
            self.nvars, {k: -c for k, c in self.terms.items()}, self.jet_order
        )

    def __sub__(self, other):
        if not isinstance(other, WeylElement):
            other = WeylElement.constant(other, self.nvars, self.jet_order)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scaled(self, factor):
        return WeylElement(
            self.nvars, {k: c * factor for k, c in self.terms.items()}, self.jet_order
        )

    def __mul__(self, other):
        if not isinstance(other, WeylElement):
            return self.scaled(other)
        return multiply(self, other)

    def __rmul__(self, other):
        # scalar * element (scalars commute with everything)
        return self.scaled(other)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def order(self):
        """Largest total degree in the derivations over all terms."""
        return max((sum(w) for (_, w) in self.terms), default=0)

    def items(self):
        """Terms in canonical (descending lexicographic) order."""
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def constant_coefficients(self):
        """Terms as plain rationals; raises if any coefficient has eps terms."""
        out = {}
        for key, c in self.terms.items():
            if any(x != 0 for x in c.coeffs[1:]):
                raise VariableMismatch("operator carries nontrivial eps jets")
            out[key] = c.coeffs[0]
        return out

    # -- rendering ---------------------------------------------------------

    def render(self):
        if not self.terms:
            return "0"
        parts = []
        for (u, w), c in self.items():
            mono = []
            for i, e in enumerate(u):
                if e:
                    mono.append(f"a{i + 1}" + (f"^{e}" if e > 1 else ""))
            for i, e in enumerate(w):
                if e:
                    mono.append(f"d{i + 1}" + (f"^{e}" if e > 1 else ""))
            body = " ".join(mono)
            coeff_txt, negative = _render_coeff(c)
            if body and coeff_txt == "1":
                piece = body
            elif body:
                piece = f"{coeff_txt} {body}"
            else:
                piece = coeff_txt
            if not parts:
                parts.append(f"-{piece}" if negative else piece)
            else:
                parts.append(f"- {piece}" if negative else f"+ {piece}")
        return " ".join(parts)

    def __repr__(self):
        return f"WeylElement({self.render()})"


def _render_coeff(c: Jet):
    nonzero = [x for x in c.coeffs if x != 0]
    if len(nonzero) == 1 and c.coeffs[0] == nonzero[0]:
        v = c.coeffs[0]
        if v < 0:
            return _fraction_str(-v), True
        return _fraction_str(v), False
    return f"({c.render()})", False


def _fraction_str(v):
    if isinstance(v, Fraction):
        return str(v)
    return repr(v)


def multiply(x: WeylElement, y: WeylElement) -> WeylElement:
    """Normal-ordered product, applying d_i a_i = a_i d_i + 1 recursively."""
    x._check(y)
    n = x.nvars
    terms = {}
    for (u, w), cx in x.terms.items():
        for (up, wp), cy in y.terms.items():
            c = cx * cy
            # d^w a^up = sum_k prod_i C(w_i,k_i) * falling(up_i,k_i) a^(up-k) d^(w-k)
            kranges = [range(min(w[i], up[i]) + 1) for i in range(n)]
            for k in product(*kranges):
                scale = 1
                for i in range(n):
                    if k[i]:
                        scale *= comb(w[i], k[i]) * _falling(up[i], k[i])
                key = (
                    tuple(u[i] + up[i] - k[i] for i in range(n)),
                    tuple(w[i] - k[i] + wp[i] for i in range(n)),
                )
                acc = terms.get(key, Jet.zero(x.jet_order)) + c * scale
                if acc.is_zero():
                    terms.pop(key, None)
                else:
                    terms[key] = acc
    return WeylElement(n, terms, x.jet_order)


def commutator(x: WeylElement, y: WeylElement) -> WeylElement:
    return multiply(x, y) - multiply(y, x)


def fourier_box(ell, nvars=None, jet_order=0) -> WeylElement:
    """Box operator of an integer relation vector.

    Splits ``ell`` into its positive and negative parts and returns
    ``d^(ell+) - d^(ell-)``; the zero vector gives the zero operator.
    """
    ell = tuple(int(x) for x in ell)
    n = nvars if nvars is not None else len(ell)
    if len(ell) != n:
        raise VariableMismatch("relation vector length does not match nvars")
    plus = tuple(max(x, 0) for x in ell)
    minus = tuple(max(-x, 0) for x in ell)
    if all(x == 0 for x in ell):
        return WeylElement.zero(n, jet_order)
    z = (0,) * n
    return WeylElement(
        n,
        {(z, plus): Fraction(1), (z, minus): Fraction(-1)},
        jet_order,
    )
