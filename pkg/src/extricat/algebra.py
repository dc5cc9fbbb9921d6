"""Structure analysis for small finite-dimensional associative algebras.

An algebra is handled abstractly through its multiplication table in a
fixed basis.  The radical comes from the trace form of the left regular
representation and is certified afterwards (two-sided nilpotent ideal),
so a characteristic-p degeneracy turns into a hard error instead of a
silent wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy

from .exactlin import FieldSpec, Mat, invert, kernel_basis, rank, solve


class AlgebraError(RuntimeError):
    pass


@dataclass
class AlgebraTable:
    """dim-dimensional algebra: mult[i][j] = coords of b_i * b_j, unit coords."""

    field: FieldSpec
    dim: int
    mult: list  # dim x dim list of coordinate tuples (length dim)
    unit: tuple

    def multiply(self, x, y):
        f = self.field
        out = [f.zero] * self.dim
        for i, xi in enumerate(x):
            if xi == f.zero:
                continue
            mi = self.mult[i]
            for j, yj in enumerate(y):
                if yj == f.zero:
                    continue
                c = f.mul(xi, yj)
                for k, m in enumerate(mi[j]):
                    if m != f.zero:
                        out[k] = f.add(out[k], f.mul(c, m))
        return tuple(out)

    def left_mult_matrix(self, x) -> Mat:
        f = self.field
        cols = []
        for j in range(self.dim):
            ej = [f.zero] * self.dim
            ej[j] = f.one
            cols.append(self.multiply(x, ej))
        return Mat(f, self.dim, self.dim, [cols[j][i] for i in range(self.dim) for j in range(self.dim)])

    def is_invertible(self, x) -> bool:
        return rank(self.left_mult_matrix(x)) == self.dim


def _subspace_product(alg: AlgebraTable, a_basis: list, b_basis: list) -> list:
    """Basis of span{a*b}; inputs and output are lists of coord tuples."""
    f = alg.field
    if not a_basis or not b_basis:
        return []
    prods = [alg.multiply(a, b) for a in a_basis for b in b_basis]
    m = Mat.from_rows(f, prods)
    red, piv = m.rref()
    return [tuple(red.row(i)) for i in range(len(piv))]


def radical(alg: AlgebraTable) -> list:
    """Basis (coord tuples) of the Jacobson radical, certified nilpotent ideal.

    Raises AlgebraError when the trace form fails to isolate the radical
    (possible only in tiny characteristic relative to the dimension).
    """
    f = alg.field
    n = alg.dim
    if n == 0:
        return []
    lmats = []
    for i in range(n):
        e = [f.zero] * n
        e[i] = f.one
        lmats.append(alg.left_mult_matrix(tuple(e)))
    # Gram matrix of B(x,y) = Tr(L_x L_y)
    gram = []
    for i in range(n):
        row = []
        for j in range(n):
            m = lmats[i] @ lmats[j]
            tr = f.zero
            for k in range(n):
                tr = f.add(tr, m[k, k])
            row.append(tr)
        gram.append(row)
    ker = kernel_basis(Mat.from_rows(f, gram))
    basis = [ker.column(j) for j in range(ker.cols)]
    # certify: two-sided ideal, nilpotent
    span = basis
    if span:
        spanmat = Mat.from_rows(f, span)
        for i in range(n):
            e = [f.zero] * n
            e[i] = f.one
            for x in basis:
                for prod in (alg.multiply(tuple(e), x), alg.multiply(x, tuple(e))):
                    if solve_coords(spanmat, prod) is None:
                        raise AlgebraError("trace-form radical is not an ideal")
        power = basis
        for _ in range(n + 1):
            power = _subspace_product(alg, power, basis)
            if not power:
                break
        if power:
            raise AlgebraError("trace-form radical not nilpotent (characteristic too small)")
    return basis


def solve_coords(row_span: Mat, vec) -> list | None:
    """Coordinates of vec in the row span, or None."""
    f = row_span.field
    target = Mat(f, len(vec), 1, list(vec))
    x = solve(row_span.transpose(), target)
    if x is None:
        return None
    return [x[i, 0] for i in range(x.rows)]


def quotient_dim(alg: AlgebraTable) -> int:
    return alg.dim - len(radical(alg))


def is_local_with_split_residue(alg: AlgebraTable) -> bool:
    """True when alg/rad is 1-dimensional, i.e. local with residue field k."""
    if alg.dim == 0:
        return False
    return quotient_dim(alg) == 1


def minimal_polynomial(alg: AlgebraTable, x) -> list:
    """Coefficients c_0..c_d (monic, c_d = 1) of the minimal polynomial of x."""
    f = alg.field
    powers = [tuple(alg.unit)]
    cur = tuple(alg.unit)
    while True:
        cur = alg.multiply(cur, x)
        m = Mat.from_rows(f, powers)
        coords = solve_coords(m, cur)
        if coords is not None:
            return [f.neg(c) for c in coords] + [f.one]
        powers.append(cur)
        if len(powers) > alg.dim + 1:
            raise AlgebraError("minimal polynomial search exceeded dimension")


def _poly_to_sympy(field: FieldSpec, coeffs: list):
    x = sympy.Symbol("x")
    if field.kind == "prime":
        expr = sum(int(c) * x**i for i, c in enumerate(coeffs))
        return sympy.Poly(expr, x, modulus=field.p), x
    expr = sum(sympy.Rational(c) * x**i for i, c in enumerate(coeffs))
    return sympy.Poly(expr, x, domain="QQ"), x


def _sympy_to_coeffs(field: FieldSpec, poly) -> list:
    cs = list(reversed(poly.all_coeffs()))
    return [field.of(c if field.kind == "rationals" else int(c)) for c in cs]


def coprime_factor_split(field: FieldSpec, coeffs: list):
    """Split a monic polynomial m = f*g with gcd(f,g)=1, both proper.

    Returns (f, g) coefficient lists, or None when m is primary.
    """
    poly, _ = _poly_to_sympy(field, coeffs)
    _, factors = poly.factor_list()
    if len(factors) < 2:
        return None
    f0, e0 = factors[0]
    fpart = f0**e0
    gpart = poly // fpart
    return _sympy_to_coeffs(field, fpart), _sympy_to_coeffs(field, gpart.monic())


def poly_xgcd(field: FieldSpec, a: list, b: list):
    """Monic gcd g and (u, v) with u*a + v*b = g over the field."""

    def norm(p):
        while p and p[-1] == field.zero:
            p = p[:-1]
        return p

    def shift(p, k):
        return [field.zero] * k + p

    def sub(p, q):
        n = max(len(p), len(q))
        p = p + [field.zero] * (n - len(p))
        q = q + [field.zero] * (n - len(q))
        return norm([field.sub(x, y) for x, y in zip(p, q)])

    def mul(p, q):
        if not p or not q:
            return []
        out = [field.zero] * (len(p) + len(q) - 1)
        for i, pi in enumerate(p):
            for j, qj in enumerate(q):
                out[i + j] = field.add(out[i + j], field.mul(pi, qj))
        return norm(out)

    def divmod_(p, q):
        p = norm(list(p))
        q = norm(list(q))
        quo = []
        while len(p) >= len(q) and p:
            c = field.mul(p[-1], field.inv(q[-1]))
            k = len(p) - len(q)
            quo = sub(shift([c], k), [field.neg(x) for x in quo])  # quo += c x^k
            p = sub(p, mul(shift([c], k), q))
        return quo, p

    r0, r1 = norm(list(a)), norm(list(b))
    s0, s1 = [field.one], []
    t0, t1 = [], [field.one]
    while r1:
        q, r = divmod_(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1))
        t0, t1 = t1, sub(t0, mul(q, t1))
    lead = field.inv(r0[-1])
    return [field.mul(lead, c) for c in r0], [field.mul(lead, c) for c in s0], [field.mul(lead, c) for c in t0]


def evaluate_poly(alg: AlgebraTable, coeffs: list, x):
    f = alg.field
    out = tuple(f.zero for _ in range(alg.dim))
    power = tuple(alg.unit)
    for c in coeffs:
        if c != f.zero:
            out = tuple(f.add(o, f.mul(c, p)) for o, p in zip(out, power))
        power = alg.multiply(power, x)
    return out


def splitting_idempotent(alg: AlgebraTable, x):
    """Nontrivial idempotent in k[x] from a coprime min-poly split, or None."""
    f = alg.field
    m = minimal_polynomial(alg, x)
    split = coprime_factor_split(f, m)
    if split is None:
        return None
    fa, fb = split
    _, u, v = poly_xgcd(f, fa, fb)
    # e = u*fa evaluated at x projects onto the fb-primary part
    uf = _poly_mul(f, u, fa)
    e = evaluate_poly(alg, uf, x)
    zero = tuple(f.zero for _ in range(alg.dim))
    if e == zero or e == tuple(alg.unit):
        return None
    if alg.multiply(e, e) != e:
        raise AlgebraError("split idempotent failed idempotency check")
    return e


def _poly_mul(field: FieldSpec, p: list, q: list) -> list:
    if not p or not q:
        return []
    out = [field.zero] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] = field.add(out[i + j], field.mul(pi, qj))
    return out


def find_idempotent(alg: AlgebraTable, rng, tries: int = 256):
    """Some idempotent e with e != 0, 1, or None when alg looks local.

    Scans basis elements, pairwise sums, then seeded random elements.
    A None answer is only trusted by callers after a radical-based
    locality certificate.
    """
    f = alg.field
    n = alg.dim
    candidates = []
    basis = []
    for i in range(n):
        e = [f.zero] * n
        e[i] = f.one
        basis.append(tuple(e))
    candidates.extend(basis)
    for i in range(n):
        for j in range(i + 1, n):
            candidates.append(tuple(f.add(a, b) for a, b in zip(basis[i], basis[j])))
    for _ in range(tries):
        candidates.append(tuple(f.rand(rng) for _ in range(n)))
    for x in candidates:
        e = splitting_idempotent(alg, x)
        if e is not None:
            return e
    return None
