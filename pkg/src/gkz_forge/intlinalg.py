"""Exact integer and rational linear algebra helpers.

Everything here works on plain Python ints / Fractions, organized as tuples
of row tuples.  Matrices are tiny (dimensions a handful, at most a couple of
dozen columns), so the classical algorithms are used directly: Bareiss for
determinants, row Hermite normal form with a unimodular transform for
kernels, and elementary Smith reduction for saturation checks.
"""

from __future__ import annotations

from fractions import Fraction


def det(rows):
    """Determinant of a square integer matrix (Bareiss, exact)."""
    a = [list(r) for r in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows):
    """Rank of an integer (or rational) matrix via fraction-free elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return 0
    m, n = len(a), len(a[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return r


def hermite_form(rows, transform=False):
    """Row Hermite normal form of an integer matrix.

    Pivots are positive, entries above a pivot are reduced into
    ``[0, pivot)``, zero rows sink to the bottom.  With ``transform=True``
    also returns a unimodular ``U`` with ``U @ rows == H``.
    """
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    row = 0
    for col in range(n):
        piv = None
        for i in range(row, m):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        u[row], u[piv] = u[piv], u[row]
        # clear the column below via gcd steps
        while True:
            nz = [i for i in range(row + 1, m) if a[i][col] != 0]
            if not nz:
                break
            for i in nz:
                q = a[i][col] // a[row][col]
                a[i] = [x - q * y for x, y in zip(a[i], a[row])]
                u[i] = [x - q * y for x, y in zip(u[i], u[row])]
                if a[i][col] != 0:
                    a[row], a[i] = a[i], a[row]
                    u[row], u[i] = u[i], u[row]
        if a[row][col] < 0:
            a[row] = [-x for x in a[row]]
            u[row] = [-x for x in u[row]]
        for i in range(row):
            q = a[i][col] // a[row][col]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[row])]
                u[i] = [x - q * y for x, y in zip(u[i], u[row])]
        row += 1
        if row == m:
            break
    h = tuple(tuple(r) for r in a)
    if transform:
        return h, tuple(tuple(r) for r in u)
    return h


def kernel_basis(rows):
    """Basis of the saturated integer kernel ``{x : rows @ x = 0}``.

    Computed from the Hermite transform of the transpose: the transform rows
    that map to zero form a basis of the full kernel lattice (they are rows
    of a unimodular matrix, so the lattice they span is saturated).  The
    result is put into canonical form: row Hermite reduced with the first
    nonzero entry of every vector positive.
    """
    rows = [tuple(r) for r in rows]
    if not rows:
        return ()
    t = list(zip(*rows))  # transpose: p x m
    h, u = hermite_form(t, transform=True)
    kernel = [u[i] for i in range(len(t)) if all(x == 0 for x in h[i])]
    if not kernel:
        return ()
    reduced = [r for r in hermite_form(kernel) if any(x != 0 for x in r)]
    return tuple(tuple(r) for r in reduced)


def smith_invariants(rows):
    """Nonzero invariant factors d1 | d2 | ... of an integer matrix."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    invariants = []
    top = 0
    while top < min(m, n):
        # find a nonzero pivot in the remaining block
        piv = None
        for i in range(top, m):
            for j in range(top, n):
                if a[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i0, j0 = piv
        a[top], a[i0] = a[i0], a[top]
        for r in a:
            r[top], r[j0] = r[j0], r[top]
        while True:
            # clear row and column `top` by gcd steps
            done = True
            for i in range(top + 1, m):
                if a[i][top]:
                    q = a[i][top] // a[top][top]
                    for j in range(n):
                        a[i][j] -= q * a[top][j]
                    if a[i][top]:
                        a[top], a[i] = a[i], a[top]
                        done = False
            for j in range(top + 1, n):
                if a[top][j]:
                    q = a[top][j] // a[top][top]
                    for i in range(m):
                        a[i][j] -= q * a[i][top]
                    if a[top][j]:
                        for i in range(m):
                            a[i][top], a[i][j] = a[i][j], a[i][top]
                        done = False
            if done:
                break
        invariants.append(abs(a[top][top]))
        top += 1
    # enforce the divisibility chain
    changed = True
    while changed:
        changed = False
        for i in range(len(invariants) - 1):
            x, y = invariants[i], invariants[i + 1]
            if y % x:
                import math

                g = math.gcd(x, y)
                invariants[i], invariants[i + 1] = g, x * y // g
                changed = True
    return tuple(invariants)


def solve_rational(rows, rhs):
    """One rational solution of ``rows @ x = rhs`` or None.

    Deterministic: Gauss-Jordan with first-nonzero pivoting, and free
    variables pinned to zero.
    """
    a = [[Fraction(x) for x in r] + [Fraction(y)] for r, y in zip(rows, rhs)]
    m = len(a)
    n = len(rows[0]) if m else 0
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = a[i][n]
    return tuple(x)


def solve_integer(rows, rhs):
    """One integer solution of ``rows @ x = rhs`` or None.

    Uses the Hermite transform of the transpose: with ``U A^T = H`` the
    system becomes triangular in the transformed unknowns.
    """
    rows = [tuple(r) for r in rows]
    if not rows:
        return ()
    t = list(zip(*rows))  # p x m
    h, u = hermite_form(t, transform=True)
    p = len(t)
    m = len(rows)
    # solve y @ H = rhs  (y has p entries, H is p x m upper-staircase)
    y = [0] * p
    rem = list(rhs)
    for i in range(p):
        col = next((j for j in range(m) if h[i][j] != 0), None)
        if col is None:
            continue
        if rem[col] % h[i][col]:
            return None
        q = rem[col] // h[i][col]
        y[i] = q
        rem = [rem[j] - q * h[i][j] for j in range(m)]
    if any(rem):
        return None
    x = [0] * p
    for i in range(p):
        if y[i]:
            for j in range(p):
                x[j] += y[i] * u[i][j]
    return tuple(x)
