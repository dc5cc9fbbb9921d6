"""Exact field arithmetic and dense matrix kernels.

Everything downstream reduces to rank / kernel / solve over a prime field
or the rationals.  Entries are plain Python ints (reduced mod p) or
Fractions; no floating point exists anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    """A prime field F_p or the rationals."""

    kind: str  # "prime" | "rationals"
    p: int = 0

    def __post_init__(self):
        if self.kind == "prime":
            if self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p**0.5) + 1)):
                raise FieldError(f"{self.p} is not prime")
        elif self.kind != "rationals":
            raise FieldError(f"unknown field kind {self.kind!r}")

    # element ops -----------------------------------------------------
    @property
    def zero(self):
        return 0 if self.kind == "prime" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "prime" else Fraction(1)

    def of(self, x):
        """Coerce an int, Fraction or 'a/b' string into the field."""
        if self.kind == "prime":
            if isinstance(x, str):
                x = Fraction(x)
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise FieldError(f"denominator of {x} not invertible mod {self.p}")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        return Fraction(x)

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime" else -a

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p) if self.kind == "prime" else Fraction(1) / a

    def rand(self, rng):
        if self.kind == "prime":
            return rng.randrange(self.p)
        return Fraction(rng.randrange(-9, 10))

    def describe(self) -> str:
        return f"F_{self.p}" if self.kind == "prime" else "Q"


F101 = FieldSpec("prime", 101)
QQ = FieldSpec("rationals")


class Mat:
    """Immutable dense matrix over a FieldSpec, row-major tuple storage."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: FieldSpec, rows: int, cols: int, data: Iterable):
        data = tuple(data)
        if len(data) != rows * cols:
            raise FieldError(f"entry count {len(data)} != {rows}x{cols}")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = data

    # constructors ----------------------------------------------------
    @staticmethod
    def from_rows(field: FieldSpec, rows: Sequence[Sequence]) -> "Mat":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = []
        for row in rows:
            if len(row) != c:
                raise FieldError("ragged rows")
            flat.extend(field.of(x) for x in row)
        return Mat(field, r, c, flat)

    @staticmethod
    def zeros(field: FieldSpec, rows: int, cols: int) -> "Mat":
        return Mat(field, rows, cols, [field.zero] * (rows * cols))

    @staticmethod
    def identity(field: FieldSpec, n: int) -> "Mat":
        z, o = field.zero, field.one
        return Mat(field, n, n, [o if i == j else z for i in range(n) for j in range(n)])

    @staticmethod
    def col(field: FieldSpec, entries: Sequence) -> "Mat":
        return Mat(field, len(entries), 1, [field.of(x) for x in entries])

    # access ----------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.data[i * self.cols + j]

    def row(self, i) -> tuple:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def column(self, j) -> tuple:
        return tuple(self.data[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return f"Mat({self.rows}x{self.cols}, {self.to_rows()})"

    def is_zero(self) -> bool:
        z = self.field.zero
        return all(x == z for x in self.data)

    # arithmetic ------------------------------------------------------
    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        f = self.field
        return Mat(f, self.rows, self.cols, [f.add(a, b) for a, b in zip(self.data, other.data)])

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        f = self.field
        return Mat(f, self.rows, self.cols, [f.sub(a, b) for a, b in zip(self.data, other.data)])

    def __neg__(self) -> "Mat":
        f = self.field
        return Mat(f, self.rows, self.cols, [f.neg(a) for a in self.data])

    def scale(self, c) -> "Mat":
        f = self.field
        c = f.of(c)
        return Mat(f, self.rows, self.cols, [f.mul(c, a) for a in self.data])

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise FieldError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        f = self.field
        if f.kind == "prime":
            p = f.p
            out = []
            od, oc = other.data, other.cols
            for i in range(self.rows):
                ri = self.data[i * self.cols : (i + 1) * self.cols]
                for j in range(oc):
                    out.append(sum(ri[k] * od[k * oc + j] for k in range(self.cols)) % p)
            return Mat(f, self.rows, oc, out)
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = f.zero
                for k in range(self.cols):
                    acc += self.data[i * self.cols + k] * other.data[k * other.cols + j]
                out.append(acc)
        return Mat(f, self.rows, other.cols, out)

    def transpose(self) -> "Mat":
        return Mat(
            self.field,
            self.cols,
            self.rows,
            [self.data[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)],
        )

    def hstack(self, other: "Mat") -> "Mat":
        if self.rows != other.rows:
            raise FieldError("hstack row mismatch")
        out = []
        for i in range(self.rows):
            out.extend(self.row(i))
            out.extend(other.row(i))
        return Mat(self.field, self.rows, self.cols + other.cols, out)

    def vstack(self, other: "Mat") -> "Mat":
        if self.cols != other.cols:
            raise FieldError("vstack col mismatch")
        return Mat(self.field, self.rows + other.rows, self.cols, self.data + other.data)

    @staticmethod
    def block_diag(field: FieldSpec, blocks: Sequence["Mat"]) -> "Mat":
        R = sum(b.rows for b in blocks)
        C = sum(b.cols for b in blocks)
        m = [[field.zero] * C for _ in range(R)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    m[r0 + i][c0 + j] = b[i, j]
            r0 += b.rows
            c0 += b.cols
        return Mat.from_rows(field, m) if R else Mat(field, 0, C, [])

    def _same_shape(self, other: "Mat"):
        if self.rows != other.rows or self.cols != other.cols:
            raise FieldError("shape mismatch")

    # elimination -----------------------------------------------------
    def rref(self) -> tuple["Mat", list]:
        """Reduced row echelon form and pivot column indices."""
        f = self.field
        m = [list(self.row(i)) for i in range(self.rows)]
        pivots = []
        r = 0
        for c in range(self.cols):
            pr = next((i for i in range(r, self.rows) if m[i][c] != f.zero), None)
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            inv = f.inv(m[r][c])
            m[r] = [f.mul(inv, x) for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c] != f.zero:
                    coeff = m[i][c]
                    m[i] = [f.sub(x, f.mul(coeff, y)) for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return Mat.from_rows(f, m) if self.rows else self, pivots


def rank(m: Mat) -> int:
    return len(m.rref()[1])


def kernel_basis(m: Mat) -> Mat:
    """Columns form a basis of the null space of m (m @ K = 0)."""
    f = m.field
    R, pivots = m.rref()
    free = [c for c in range(m.cols) if c not in pivots]
    cols = []
    for fc in free:
        v = [f.zero] * m.cols
        v[fc] = f.one
        for r_idx, pc in enumerate(pivots):
            v[pc] = f.neg(R[r_idx, fc])
        cols.append(v)
    out = Mat(f, m.cols, len(cols), [cols[j][i] for i in range(m.cols) for j in range(len(cols))])
    return out


def column_space_basis(m: Mat) -> Mat:
    """Columns = basis of the column space (pivot columns of m)."""
    _, pivots = m.rref()
    f = m.field
    data = [m.data[i * m.cols + j] for i in range(m.rows) for j in pivots]
    return Mat(f, m.rows, len(pivots), data)


def solve(a: Mat, b: Mat):
    """General solve a @ X = b; returns one solution X or None."""
    if a.rows != b.rows:
        raise FieldError("solve: row mismatch")
    f = a.field
    aug = a.hstack(b)
    R, pivots = aug.rref()
    if any(p >= a.cols for p in pivots):
        return None
    xs = [[f.zero] * b.cols for _ in range(a.cols)]
    for r_idx, pc in enumerate(pivots):
        for j in range(b.cols):
            xs[pc][j] = R[r_idx, a.cols + j]
    return Mat.from_rows(f, xs) if a.cols else Mat(f, 0, b.cols, [])


def solve_factorization(a: Mat, b: Mat):
    """X with b @ X = a when the column space of a lies in b's; else None."""
    if a.rows != b.rows:
        raise FieldError("solve_factorization: ambient dimension mismatch")
    return solve(b, a)


def is_injective(m: Mat) -> bool:
    return rank(m) == m.cols


def is_surjective(m: Mat) -> bool:
    return rank(m) == m.rows


def invert(m: Mat):
    """Inverse matrix, or None when singular."""
    if m.rows != m.cols:
        return None
    x = solve(m, Mat.identity(m.field, m.rows))
    return x


def complement_projection(inc: Mat) -> tuple[Mat, Mat]:
    """For injective inc: V' -> V, a projection q: V -> coker and section s.

    q has full row rank, q @ inc = 0, and q restricted to the chosen
    complement (spanned by s's columns) is the identity.
    """
    f = inc.field
    n = inc.rows
    _, piv = inc.transpose().rref()
    # complete the column space of inc by standard basis vectors
    chosen = []
    basis = inc
    for e in range(n):
        cand = Mat(f, n, 1, [f.one if i == e else f.zero for i in range(n)])
        test = basis.hstack(cand)
        if rank(test) > rank(basis):
            basis = test
            chosen.append(e)
    full = basis  # columns: inc-part then complement part
    finv = invert(full)
    if finv is None:
        raise FieldError("complement_projection: completion failed")
    k = inc.cols
    q = Mat(f, n - k, n, [finv[i, j] for i in range(k, n) for j in range(n)])
    s = Mat(f, n, n - k, [full[i, j] for i in range(n) for j in range(k, n)])
    return q, s


def fiber_product(f_map: Mat, g_map: Mat) -> Mat:
    """Basis of {(v, w) : f v = g w}, columns stacked (v over w)."""
    if f_map.rows != g_map.rows:
        raise FieldError("fiber_product: target mismatch")
    joint = f_map.hstack(-g_map)
    return kernel_basis(joint)
