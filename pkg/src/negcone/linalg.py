"""Exact rational linear algebra on tuple vectors.

Vectors are plain tuples of integers or rationals.  The intersection pairing
shared by both divisor and curve coordinates is diagonal with signature
(+1, -1, ..., -1): the first coordinate is the hyperplane/line direction, the
rest are exceptional.  All arithmetic is exact; there is no tolerance anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

try:  # gmpy2 rationals are drop-in and much faster than Fraction
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) or type(x).__name__ == "mpq"


def dot(u, v):
    """Plain coordinate dot product."""
    return sum(a * b for a, b in zip(u, v, strict=True))


def pair(u, v):
    """Intersection pairing diag(1, -1, ..., -1) between dual coordinates."""
    if len(u) != len(v):
        raise ValueError(f"pairing dimension mismatch: {len(u)} vs {len(v)}")
    return u[0] * v[0] - sum(a * b for a, b in zip(u[1:], v[1:]))


def to_dot_functional(f):
    """Convert a pairing functional into a dot functional: pair(f,x) = dot(G f, x)."""
    return (f[0],) + tuple(-a for a in f[1:])


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vneg(u):
    return tuple(-a for a in u)


def vscale(a, u):
    return tuple(a * x for x in u)


def is_zero(u) -> bool:
    return all(x == 0 for x in u)


def _clear_denominators(u):
    denoms = []
    for x in u:
        if isinstance(x, int):
            continue
        d = x.denominator
        if d != 1:
            denoms.append(int(d))
    m = 1
    for d in denoms:
        m = m * d // gcd(m, d)
    return tuple(int(x * m) for x in u)


def primitive(u):
    """Scale to an integer vector with content gcd 1, preserving direction."""
    w = _clear_denominators(u)
    g = 0
    for x in w:
        g = gcd(g, abs(x))
    if g == 0:
        return w
    return tuple(x // g for x in w)


def sign_canonical(u):
    """Primitive form with the first nonzero coordinate positive (for direction-free data)."""
    w = primitive(u)
    for x in w:
        if x > 0:
            return w
        if x < 0:
            return vneg(w)
    return w


def rank(rows) -> int:
    """Exact rank via fraction-free (Bareiss) elimination on integer copies."""
    m = [list(_clear_denominators(r)) for r in rows if not is_zero(r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == len(m):
            break
    return r


def kernel_basis(rows, dim):
    """Primitive integer basis of {x : dot(r, x) = 0 for all r}."""
    mat = [list(map(Q, r)) for r in rows if not is_zero(r)]
    pivots = []
    r = 0
    for c in range(dim):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for c in free:
        v = [Q(0)] * dim
        v[c] = Q(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][c]
        basis.append(sign_canonical(tuple(v)))
    return basis


def solve_columns(columns, target):
    """Solve sum_j x_j * columns[j] = target exactly; returns list of rationals or None."""
    dim = len(target)
    mat = [[Q(columns[j][i]) for j in range(len(columns))] + [Q(target[i])] for i in range(dim)]
    n = len(columns)
    pivots = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, dim):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(dim):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    for i in range(r, dim):
        if mat[i][n] != 0:
            return None
    x = [Q(0)] * n
    for i, c in enumerate(pivots):
        x[c] = mat[i][n]
    return x


def mat_vec(m, v):
    return tuple(dot(row, v) for row in m)


def mat_mul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def mat_transpose(m):
    return tuple(zip(*m))


def identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def contragredient(m_inv):
    """Curve-side action S with pair(T u, S v) = pair(u, v), given T^{-1}: S = G T^{-T} G."""
    n = len(m_inv)
    t = mat_transpose(m_inv)
    return tuple(
        tuple(t[i][j] if (i == 0) == (j == 0) else -t[i][j] for j in range(n))
        for i in range(n)
    )


def format_rational(x) -> str | int:
    """JSON-friendly form: plain int when integral, else 'p/q'."""
    num, den = x.numerator, x.denominator
    if den == 1:
        return int(num)
    return f"{num}/{den}"


def parse_rational(s):
    if isinstance(s, int):
        return s
    num, _, den = str(s).partition("/")
    return Q(int(num), int(den)) if den else Q(int(num))
