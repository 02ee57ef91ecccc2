"""Truncated polynomial jets in a single deformation parameter ``eps``.

A jet of order ``k`` stores the coefficients of ``eps^0 .. eps^k`` and
forgets everything beyond.  Coefficients are usually exact ``Fraction``
values; float coefficients are allowed for numerically expanded factors
(reciprocal gamma functions and the like).  Order 0 jets behave like plain
scalars.
"""

from __future__ import annotations

from fractions import Fraction


class Jet:
    """Immutable truncated polynomial ``c0 + c1*eps + ... + ck*eps^k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, order=None):
        coeffs = tuple(coeffs)
        if order is not None:
            if len(coeffs) > order + 1:
                coeffs = coeffs[: order + 1]
            elif len(coeffs) < order + 1:
                coeffs = coeffs + (Fraction(0),) * (order + 1 - len(coeffs))
        if not coeffs:
            coeffs = (Fraction(0),)
        self.coeffs = coeffs

    # -- constructors --------------------------------------------------

    @classmethod
    def constant(cls, value, order=0):
        return cls((value,), order)

    @classmethod
    def linear(cls, c0, c1, order):
        return cls((c0, c1), order)

    @classmethod
    def zero(cls, order=0):
        return cls((Fraction(0),), order)

    # -- basic queries --------------------------------------------------

    @property
    def order(self):
        return len(self.coeffs) - 1

    def coefficient(self, k):
        """Coefficient of ``eps^k`` (0 beyond the stored order)."""
        return self.coeffs[k] if k <= self.order else Fraction(0)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def valuation(self):
        """Index of the first nonzero coefficient, or None for the zero jet."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def truncated(self, order):
        return Jet(self.coeffs, order)

    # -- arithmetic ------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        other = self._lift(other)
        n = max(self.order, other.order)
        return Jet(
            tuple(self.coefficient(k) + other.coefficient(k) for k in range(n + 1))
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        n = max(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j > n:
                    break
                if b != 0:
                    out[i + j] += a * b
        return Jet(out)

    __rmul__ = __mul__

    def inverse(self):
        """Multiplicative inverse; requires a nonzero constant term."""
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("jet with zero constant term has no inverse")
        n = self.order
        inv = [Fraction(1) / c0 if isinstance(c0, Fraction) else 1.0 / c0]
        for k in range(1, n + 1):
            acc = sum(
                (self.coefficient(j) * inv[k - j] for j in range(1, k + 1)),
                start=Fraction(0),
            )
            inv.append(-acc / c0)
        return Jet(inv)

    def __truediv__(self, other):
        other = self._lift(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = Jet.constant(Fraction(1), self.order)
        for _ in range(n):
            out = out * self
        return out

    def shifted(self, k):
        """Multiply by ``eps^k``, keeping the stored order."""
        if k == 0:
            return self
        return Jet((Fraction(0),) * k + self.coeffs, self.order)

    # -- comparison / display --------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Jet):
            other = Jet.constant(other)
        n = max(self.order, other.order)
        return all(self.coefficient(k) == other.coefficient(k) for k in range(n + 1))

    def __hash__(self):
        # normalize away trailing zeros so equal jets hash equally
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return hash(tuple(coeffs))

    def __repr__(self):
        return f"Jet({self.render()})"

    def render(self):
        """Canonical text form, e.g. ``1/2 - 2 eps + eps^2``."""
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mag = -c if _is_negative(c) else c
            if k == 0:
                body = _coeff_str(mag)
            else:
                e = "eps" if k == 1 else f"eps^{k}"
                body = e if mag == 1 else f"{_coeff_str(mag)} {e}"
            if not parts:
                parts.append(f"-{body}" if _is_negative(c) else body)
            else:
                parts.append(f"- {body}" if _is_negative(c) else f"+ {body}")
        if not parts:
            return "0"
        return " ".join(parts)


def _is_negative(c):
    try:
        return c < 0
    except TypeError:
        return False


def _coeff_str(c):
    if isinstance(c, Fraction):
        return str(c)
    return repr(c)
