"""Finitely presented contravariant functors on a finite linear category.

A module F stores one value space per object label and one action matrix
per hom-basis element f: x -> y, namely F(f): F(y) -> F(x).  Modules over
the category algebra and functors are the same thing at this size, so
kernels, cokernels, Ext^1, simples and Krull-Schmidt decomposition are all
pointwise-plus-naturality linear algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import AlgebraTable, find_idempotent, radical, solve_coords
from .category import BlockMorphism, FiniteLinearCategory, Mor, formal_object
from .exactlin import (
    Mat,
    column_space_basis,
    complement_projection,
    invert,
    is_injective,
    is_surjective,
    kernel_basis,
    rank,
    solve,
    solve_factorization,
)


class ModuleError(RuntimeError):
    pass


class FpModule:
    __slots__ = ("cat", "dims", "action", "_key")

    def __init__(self, cat: FiniteLinearCategory, dims: dict, action: dict):
        self.cat = cat
        self.dims = {x: int(dims.get(x, 0)) for x in cat.objects}
        self.action = action  # basis key -> Mat (F(f): F(y) -> F(x))
        self._key = None

    # -- construction helpers -------------------------------------------
    @staticmethod
    def zero(cat: FiniteLinearCategory) -> "FpModule":
        f = cat.field
        action = {k: Mat(f, 0, 0, []) for k in cat.all_basis_keys()}
        return FpModule(cat, {}, action)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def dim(self, x: str) -> int:
        return self.dims.get(x, 0)

    def is_zero(self) -> bool:
        return self.total_dim() == 0

    def key(self):
        if self._key is None:
            self._key = (
                tuple(sorted(self.dims.items())),
                tuple((k, self.action[k].data) for k in sorted(self.action)),
            )
        return self._key

    def act_mor(self, m: Mor) -> Mat:
        """F(m): F(tgt) -> F(src) for a morphism between indecomposables."""
        f = self.cat.field
        out = Mat.zeros(f, self.dim(m.src), self.dim(m.tgt))
        for i, c in enumerate(m.coords):
            if c != f.zero:
                out = out + self.action[(m.src, m.tgt, i)].scale(c)
        return out

    def act_block(self, phi: BlockMorphism) -> Mat:
        """F(phi): F(tgt-sum) -> F(src-sum) assembled from block entries."""
        f = self.cat.field
        nrows = sum(self.dim(s) for s in phi.src)
        ncols = sum(self.dim(t) for t in phi.tgt)
        if not phi.src or not phi.tgt:
            return Mat(f, nrows, ncols, [f.zero] * (nrows * ncols))
        mat_rows = []
        for j in range(len(phi.src)):
            r = self.act_mor(phi.entry(0, j))
            for i in range(1, len(phi.tgt)):
                r = r.hstack(self.act_mor(phi.entry(i, j)))
            mat_rows.append(r)
        out = mat_rows[0]
        for r in mat_rows[1:]:
            out = out.vstack(r)
        return out

    def validate(self) -> list:
        problems = []
        f = self.cat.field
        for k in self.cat.all_basis_keys():
            x, y, _ = k
            m = self.action.get(k)
            if m is None or m.rows != self.dim(x) or m.cols != self.dim(y):
                problems.append(("action-shape", f"action of {self.cat.basis_name(k)} malformed"))
                return problems
        for x in self.cat.objects:
            idm = self.act_mor(self.cat.identity_mor(x))
            if idm != Mat.identity(f, self.dim(x)):
                problems.append(("identity-action", f"F(id_{x}) != id"))
        keys = self.cat.all_basis_keys()
        for kg in keys:
            g = self.cat.basis_mor(kg)
            for kf in keys:
                if kf[1] != kg[0]:
                    continue
                fm = self.cat.basis_mor(kf)
                gf = self.cat.compose_mor(g, fm)
                if self.act_mor(gf) != self.act_mor(fm) @ self.act_mor(g):
                    problems.append(
                        ("functoriality", f"F({self.cat.basis_name(kg)}∘{self.cat.basis_name(kf)}) mismatch")
                    )
        return problems

    def direct_sum(self, other: "FpModule") -> "FpModule":
        dims = {x: self.dim(x) + other.dim(x) for x in self.cat.objects}
        action = {}
        for k in self.cat.all_basis_keys():
            action[k] = Mat.block_diag(self.cat.field, [self.action[k], other.action[k]])
        return FpModule(self.cat, dims, action)


@dataclass
class ModuleMap:
    """Natural transformation F -> G: one matrix per object label."""

    src: FpModule
    tgt: FpModule
    mats: dict  # label -> Mat (F(x) -> G(x))

    def mat(self, x: str) -> Mat:
        return self.mats[x]

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.mats.values())

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self ∘ other (other first)."""
        mats = {x: self.mats[x] @ other.mats[x] for x in self.src.cat.objects}
        return ModuleMap(other.src, self.tgt, mats)

    def inverse(self) -> "ModuleMap":
        mats = {}
        for x, m in self.mats.items():
            inv = invert(m)
            if inv is None:
                raise ModuleError("inverse of a non-isomorphism")
            mats[x] = inv
        return ModuleMap(self.tgt, self.src, mats)

    def add(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(self.src, self.tgt, {x: self.mats[x] + other.mats[x] for x in self.mats})

    def scale(self, c) -> "ModuleMap":
        return ModuleMap(self.src, self.tgt, {x: self.mats[x].scale(c) for x in self.mats})

    def sub(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(self.src, self.tgt, {x: self.mats[x] - other.mats[x] for x in self.mats})

    def is_natural(self) -> bool:
        cat = self.src.cat
        for k in cat.all_basis_keys():
            x, y, _ = k
            lhs = self.mats[x] @ self.src.action[k]
            rhs = self.tgt.action[k] @ self.mats[y]
            if lhs != rhs:
                return False
        return True

    def is_mono(self) -> bool:
        return all(is_injective(m) for m in self.mats.values())

    def is_epi(self) -> bool:
        return all(is_surjective(m) for m in self.mats.values())

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()


def zero_map(F: FpModule, G: FpModule) -> ModuleMap:
    f = F.cat.field
    return ModuleMap(F, G, {x: Mat.zeros(f, G.dim(x), F.dim(x)) for x in F.cat.objects})


def identity_map(F: FpModule) -> ModuleMap:
    f = F.cat.field
    return ModuleMap(F, F, {x: Mat.identity(f, F.dim(x)) for x in F.cat.objects})


# ---------------------------------------------------------------------------
# Yoneda modules


def yoneda(cat: FiniteLinearCategory, fo: tuple) -> FpModule:
    """Hom(-, fo) as a module; value at w is ⊕_i Hom(w, fo[i])."""
    f = cat.field
    dims = {w: sum(cat.hom_dim(w, l) for l in fo) for w in cat.objects}
    action = {}
    for k in cat.all_basis_keys():
        x, y, _ = k
        fm = cat.basis_mor(k)
        # precomposition Hom(y, fo) -> Hom(x, fo); column (pos, j) carries
        # the coordinates of (j-th basis of Hom(y, fo[pos])) ∘ fm in the
        # pos-block of Hom(x, fo[pos])
        colvecs = []
        for pos, l in enumerate(fo):
            for j in range(cat.hom_dim(y, l)):
                g = cat.basis_mor((y, l, j))
                comp = cat.compose_mor(g, fm)
                vec = []
                for pos2, l2 in enumerate(fo):
                    if pos2 == pos:
                        vec.extend(comp.coords)
                    else:
                        vec.extend([f.zero] * cat.hom_dim(x, l2))
                colvecs.append(vec)
        action[k] = Mat(
            f,
            dims[x],
            dims[y],
            [colvecs[j][i] for i in range(dims[x]) for j in range(len(colvecs))],
        )
    return FpModule(cat, dims, action)


def yoneda_map(cat: FiniteLinearCategory, phi: BlockMorphism) -> ModuleMap:
    """Postcomposition Hom(-, src) -> Hom(-, tgt)."""
    F = yoneda(cat, phi.src)
    G = yoneda(cat, phi.tgt)
    f = cat.field
    mats = {}
    for w in cat.objects:
        cols = []
        for j, s in enumerate(phi.src):
            for b in range(cat.hom_dim(w, s)):
                h = cat.basis_mor((w, s, b))
                vec = []
                for i, t in enumerate(phi.tgt):
                    comp = cat.compose_mor(phi.entry(i, j), h)
                    vec.extend(comp.coords)
                cols.append(vec)
        mats[w] = Mat(
            f, G.dim(w), F.dim(w), [cols[j][i] for i in range(G.dim(w)) for j in range(len(cols))]
        )
    return ModuleMap(F, G, mats)


def element_to_map(cat: FiniteLinearCategory, fo: tuple, F: FpModule, vec: Mat) -> ModuleMap:
    """Yoneda correspondence: a column vector in F(fo) gives Hom(-, fo) -> F.

    F(fo) means ⊕_i F(fo[i]); vec is a stacked column.
    """
    f = cat.field
    Y = yoneda(cat, fo)
    # split vec into per-summand pieces
    pieces = []
    off = 0
    for l in fo:
        d = F.dim(l)
        pieces.append(Mat(f, d, 1, [vec[off + i, 0] for i in range(d)]))
        off += d
    mats = {}
    for w in cat.objects:
        cols = []
        for pos, l in enumerate(fo):
            for b in range(cat.hom_dim(w, l)):
                g = cat.basis_mor((w, l, b))
                img = F.act_mor(g) @ pieces[pos]
                cols.append([img[i, 0] for i in range(F.dim(w))])
        mats[w] = Mat(
            f, F.dim(w), Y.dim(w), [cols[j][i] for i in range(F.dim(w)) for j in range(len(cols))]
        )
    return ModuleMap(Y, F, mats)


# ---------------------------------------------------------------------------
# hom spaces, kernels, cokernels, images

_HOM_CACHE: dict = {}


def hom_module(F: FpModule, G: FpModule) -> list:
    """Basis of natural transformations F -> G (cached by module data)."""
    ck = (id(F.cat), F.key(), G.key())
    hit = _HOM_CACHE.get(ck)
    if hit is not None:
        basis, src, tgt = hit
        if src is F and tgt is G:
            return basis
        return [ModuleMap(F, G, b.mats) for b in basis]
    basis = _hom_module_raw(F, G)
    _HOM_CACHE[ck] = (basis, F, G)
    return basis


def _hom_module_raw(F: FpModule, G: FpModule) -> list:
    cat = F.cat
    f = cat.field
    labels = list(cat.objects)
    offsets = {}
    total = 0
    for x in labels:
        offsets[x] = total
        total += F.dim(x) * G.dim(x)
    if total == 0:
        return []
    rows = []
    for k in cat.all_basis_keys():
        x, y, _ = k
        Ff = F.action[k]  # F(y) -> F(x)
        Gf = G.action[k]
        # alpha_x @ Ff - Gf @ alpha_y = 0, entries (r, c): r < G.dim(x), c < F.dim(y)
        for r in range(G.dim(x)):
            for c in range(F.dim(y)):
                row = [f.zero] * total
                for m in range(F.dim(x)):
                    row[offsets[x] + r * F.dim(x) + m] = f.add(
                        row[offsets[x] + r * F.dim(x) + m], Ff[m, c]
                    )
                for n in range(G.dim(y)):
                    row[offsets[y] + n * F.dim(y) + c] = f.sub(
                        row[offsets[y] + n * F.dim(y) + c], Gf[r, n]
                    )
                rows.append(row)
    mat = Mat.from_rows(f, rows) if rows else Mat(f, 0, total, [])
    ker = kernel_basis(mat)
    out = []
    for j in range(ker.cols):
        mats = {}
        for x in labels:
            d_src, d_tgt = F.dim(x), G.dim(x)
            entries = [ker[offsets[x] + r * d_src + c, j] for r in range(d_tgt) for c in range(d_src)]
            mats[x] = Mat(f, d_tgt, d_src, entries)
        out.append(ModuleMap(F, G, mats))
    return out


def hom_dim(F: FpModule, G: FpModule) -> int:
    return len(hom_module(F, G))


def kernel(alpha: ModuleMap) -> tuple[FpModule, ModuleMap]:
    cat = alpha.src.cat
    f = cat.field
    kmats = {x: kernel_basis(alpha.mats[x]) for x in cat.objects}
    dims = {x: kmats[x].cols for x in cat.objects}
    action = {}
    for k in cat.all_basis_keys():
        x, y, _ = k
        img = alpha.src.action[k] @ kmats[y]
        m = solve_factorization(img, kmats[x])
        if m is None:
            raise ModuleError("kernel not preserved by action")
        action[k] = m
    K = FpModule(cat, dims, action)
    inc = ModuleMap(K, alpha.src, {x: kmats[x] for x in cat.objects})
    return K, inc


def image(alpha: ModuleMap) -> tuple[FpModule, ModuleMap, ModuleMap]:
    """(im, inc: im -> tgt, proj: src -> im)."""
    cat = alpha.src.cat
    imats = {x: column_space_basis(alpha.mats[x]) for x in cat.objects}
    dims = {x: imats[x].cols for x in cat.objects}
    action = {}
    for k in cat.all_basis_keys():
        x, y, _ = k
        img = alpha.tgt.action[k] @ imats[y]
        m = solve_factorization(img, imats[x])
        if m is None:
            raise ModuleError("image not preserved by action")
        action[k] = m
    I = FpModule(cat, dims, action)
    inc = ModuleMap(I, alpha.tgt, {x: imats[x] for x in cat.objects})
    proj_mats = {}
    for x in cat.objects:
        m = solve_factorization(alpha.mats[x], imats[x])
        if m is None:
            raise ModuleError("image projection failed")
        proj_mats[x] = m
    proj = ModuleMap(alpha.src, I, proj_mats)
    return I, inc, proj


def cokernel(alpha: ModuleMap) -> tuple[FpModule, ModuleMap]:
    cat = alpha.src.cat
    f = cat.field
    qmats = {}
    smats = {}
    for x in cat.objects:
        im = column_space_basis(alpha.mats[x])
        q, s = complement_projection(im) if im.cols else (
            Mat.identity(f, alpha.tgt.dim(x)),
            Mat.identity(f, alpha.tgt.dim(x)),
        )
        qmats[x] = q
        smats[x] = s
    dims = {x: qmats[x].rows for x in cat.objects}
    action = {}
    for k in cat.all_basis_keys():
        x, y, _ = k
        action[k] = qmats[x] @ alpha.tgt.action[k] @ smats[y]
    C = FpModule(cat, dims, action)
    proj = ModuleMap(alpha.tgt, C, qmats)
    if not proj.is_natural():
        raise ModuleError("cokernel projection not natural")
    return C, proj


def factor_through_cokernel(proj: ModuleMap, beta: ModuleMap) -> ModuleMap:
    """Unique gamma with gamma ∘ proj = beta, for beta killing the image."""
    mats = {}
    for x in proj.src.cat.objects:
        g = solve_factorization(beta.mats[x].transpose(), proj.mats[x].transpose())
        if g is None:
            raise ModuleError("does not factor through cokernel")
        mats[x] = g.transpose()
    return ModuleMap(proj.tgt, beta.tgt, mats)


# ---------------------------------------------------------------------------
# radicals, simples, composition factors


def radical_submodule(F: FpModule) -> tuple[FpModule, ModuleMap]:
    """rad F = sum of images of radical-morphism actions."""
    cat = F.cat
    f = cat.field
    gens = {x: [] for x in cat.objects}
    for m in cat.radical_spanning_mors():
        act = F.act_mor(m)  # F(tgt) -> F(src)
        for j in range(act.cols):
            gens[m.src].append(act.column(j))
    bmats = {}
    for x in cat.objects:
        if gens[x]:
            g = Mat.from_rows(f, gens[x]).transpose()
            bmats[x] = column_space_basis(g)
        else:
            bmats[x] = Mat(f, F.dim(x), 0, [])
    dims = {x: bmats[x].cols for x in cat.objects}
    action = {}
    for k in cat.all_basis_keys():
        x, y, _ = k
        img = F.action[k] @ bmats[y]
        m = solve_factorization(img, bmats[x])
        if m is None:
            raise ModuleError("radical not action-stable")
        action[k] = m
    R = FpModule(cat, dims, action)
    inc = ModuleMap(R, F, bmats)
    return R, inc


def simple_module(cat: FiniteLinearCategory, x: str) -> FpModule:
    f = cat.field
    dims = {w: (1 if w == x else 0) for w in cat.objects}
    rad = cat.rad_end_basis(x)
    d = cat.hom_dim(x, x)
    radmat = Mat.from_rows(f, rad) if rad else Mat(f, 0, d, [])
    action = {}
    for k in cat.all_basis_keys():
        a, b, i = k
        if a == x and b == x:
            # residue of the basis endomorphism modulo the radical
            m = cat.basis_mor(k)
            scalar = _residue_scalar(cat, x, m.coords, radmat)
            action[k] = Mat(f, 1, 1, [scalar])
        else:
            action[k] = Mat.zeros(f, dims[a], dims[b])
    return FpModule(cat, dims, action)


def _residue_scalar(cat: FiniteLinearCategory, x: str, coords, radmat: Mat):
    """Coefficient of the identity in End(x)/rad; requires split residue."""
    f = cat.field
    ident = cat.identities[x]
    rows = [list(ident)] + [list(radmat.row(i)) for i in range(radmat.rows)]
    m = Mat.from_rows(f, rows)
    sol = solve_coords(m, coords)
    if sol is None:
        raise ModuleError(f"non-split residue field at {x}")
    return sol[0]


def top_multiplicities(F: FpModule) -> dict:
    R, _ = radical_submodule(F)
    return {x: F.dim(x) - R.dim(x) for x in F.cat.objects}


def composition_factors(F: FpModule) -> dict:
    """Multiset of simple labels via iterated radical stripping."""
    out = {x: 0 for x in F.cat.objects}
    cur = F
    guard = F.total_dim() + 1
    while not cur.is_zero():
        guard -= 1
        if guard < 0:
            raise ModuleError("radical series does not terminate")
        R, _ = radical_submodule(cur)
        for x, d in top_multiplicities(cur).items():
            out[x] += d
        cur = R
    return {x: n for x, n in out.items() if n}


def projective_cover_onto(F: FpModule) -> tuple[tuple, ModuleMap]:
    """(formal object P, epi yoneda(P) -> F) from top multiplicities."""
    cat = F.cat
    f = cat.field
    tops = top_multiplicities(F)
    R, inc = radical_submodule(F)
    labels = []
    vecs = []
    for x in cat.objects:
        if not tops[x]:
            continue
        # lift a basis of F(x)/rad(F)(x)
        radcols = inc.mats[x]
        chosen = []
        basis = radcols
        for e in range(F.dim(x)):
            cand = Mat(f, F.dim(x), 1, [f.one if i == e else f.zero for i in range(F.dim(x))])
            test = basis.hstack(cand)
            if rank(test) > rank(basis):
                basis = test
                chosen.append(cand)
        for v in chosen:
            labels.append(x)
            vecs.append(v)
    fo = tuple(labels)  # keep emission order aligned with vecs
    Y = yoneda(cat, fo)
    maps = [element_to_map(cat, (l,), F, v) for l, v in zip(labels, vecs)]
    mats = {}
    for w in cat.objects:
        cols = []
        for mp in maps:
            for j in range(mp.src.dim(w)):
                cols.append(mp.mats[w].column(j))
        mats[w] = Mat(
            f, F.dim(w), Y.dim(w), [cols[j][i] for i in range(F.dim(w)) for j in range(len(cols))]
        ) if cols else Mat(f, F.dim(w), 0, [])
    epi = ModuleMap(Y, F, mats)
    if not epi.is_epi():
        raise ModuleError("projective cover map is not epi")
    return fo, epi


def generator_epi(F: FpModule) -> tuple[tuple, ModuleMap]:
    """Epi from ⊕ yoneda(x)^{dim F(x)}; canonical, not minimal."""
    cat = F.cat
    f = cat.field
    labels = []
    vecs = []
    for x in cat.objects:
        for e in range(F.dim(x)):
            labels.append(x)
            vecs.append(Mat(f, F.dim(x), 1, [f.one if i == e else f.zero for i in range(F.dim(x))]))
    fo = tuple(labels)
    Y = yoneda(cat, fo)
    maps = [element_to_map(cat, (l,), F, v) for l, v in zip(labels, vecs)]
    mats = {}
    for w in cat.objects:
        cols = []
        for mp in maps:
            for j in range(mp.src.dim(w)):
                cols.append(mp.mats[w].column(j))
        mats[w] = Mat(
            f, F.dim(w), Y.dim(w), [cols[j][i] for i in range(F.dim(w)) for j in range(len(cols))]
        ) if cols else Mat(f, F.dim(w), 0, [])
    return fo, ModuleMap(Y, F, mats)


# ---------------------------------------------------------------------------
# Ext^1 via minimal projective presentations


def map_flat_coords(mp: ModuleMap) -> list:
    vec = []
    for x in mp.src.cat.objects:
        vec.extend(mp.mats[x].data)
    return vec


def coords_in_basis(basis: list, target: ModuleMap):
    f = target.src.cat.field
    rows = Mat.from_rows(f, [map_flat_coords(b) for b in basis])
    return solve_coords(rows, map_flat_coords(target))


def combine(basis: list, coeffs) -> ModuleMap:
    out = None
    for c, b in zip(coeffs, basis):
        term = b.scale(c)
        out = term if out is None else out.add(term)
    if out is None:
        raise ModuleError("empty combination")
    return out


class Presentation:
    """Minimal projective cover data of a module: P0 -> F with syzygy."""

    __slots__ = ("module", "fo", "epi", "omega", "inc")

    def __init__(self, F: FpModule):
        self.module = F
        self.fo, self.epi = projective_cover_onto(F)
        self.omega, self.inc = kernel(self.epi)

    @staticmethod
    def direct_sum(a: "Presentation", b: "Presentation") -> "Presentation":
        ps = Presentation.__new__(Presentation)
        ps.module = a.module.direct_sum(b.module)
        ps.fo = a.fo + b.fo
        cat = a.module.cat
        f = cat.field
        # covers and syzygies add blockwise; rebuild the sum maps directly
        P = yoneda(cat, ps.fo)
        mats = {}
        for x in cat.objects:
            top = a.epi.mats[x].hstack(Mat.zeros(f, a.module.dim(x), b.epi.src.dim(x)))
            bot = Mat.zeros(f, b.module.dim(x), a.epi.src.dim(x)).hstack(b.epi.mats[x])
            mats[x] = top.vstack(bot)
        ps.epi = ModuleMap(P, ps.module, mats)
        ps.omega, ps.inc = kernel(ps.epi)
        return ps


class ExtSpace:
    """Ext^1(F, G) with a frozen basis of class representatives.

    Classes are maps Omega(F) -> G modulo restrictions from the cover.
    """

    def __init__(self, F: FpModule, G: FpModule, pres: Presentation | None = None):
        self.F = F
        self.G = G
        cat = F.cat
        f = cat.field
        self.pres = pres if pres is not None else Presentation(F)
        if F.is_zero() or G.is_zero():
            self.dim = 0
            self.hom_om = []
            self.reps = []
            self._q = None
            return
        self.hom_om = hom_module(self.pres.omega, G)
        if not self.hom_om:
            self.dim = 0
            self.reps = []
            self._q = None
            return
        hom_p0 = hom_module(self.pres.epi.src, G)
        restricted = []
        for b in hom_p0:
            r = b.compose(self.pres.inc)
            restricted.append(coords_in_basis(self.hom_om, r))
        restmat = (
            Mat.from_rows(f, restricted).transpose()
            if restricted
            else Mat(f, len(self.hom_om), 0, [])
        )
        img = column_space_basis(restmat)
        if img.cols:
            q, s = complement_projection(img)
        else:
            q, s = Mat.identity(f, len(self.hom_om)), Mat.identity(f, len(self.hom_om))
        self._q = q
        self.dim = q.rows
        self.reps = []
        for j in range(s.cols) if img.cols else range(q.rows):
            col = s.column(j) if img.cols else [f.one if i == j else f.zero for i in range(q.rows)]
            self.reps.append(combine(self.hom_om, col))

    def rep(self, coords) -> ModuleMap:
        """Representative Omega -> G of the class with the given coordinates."""
        return combine(self.reps, coords)

    def coords_of(self, h: ModuleMap):
        """Class coordinates of an arbitrary representative h: Omega -> G."""
        f = self.F.cat.field
        if self.dim == 0:
            return ()
        c = coords_in_basis(self.hom_om, h)
        if c is None:
            raise ModuleError("representative outside Hom(Omega, G)")
        col = Mat(f, len(c), 1, c)
        out = self._q @ col
        return tuple(out[i, 0] for i in range(out.rows))


def ext1(F: FpModule, G: FpModule):
    """(dimension, class representative maps Omega -> G)."""
    sp = ExtSpace(F, G)
    return sp.dim, sp.reps, sp


def ext1_dim(F: FpModule, G: FpModule) -> int:
    if F.is_zero() or G.is_zero():
        return 0
    return ExtSpace(F, G).dim


def realize_extension_from(pres: Presentation, G: FpModule, h: ModuleMap):
    """Pushout of 0 -> Omega -> P0 -> F -> 0 along h: Omega -> G.

    Returns (E, g: G -> E, p: E -> F) with 0 -> G -> E -> F -> 0 exact.
    """
    F = pres.module
    cat = F.cat
    f = cat.field
    Omega, inc, epi = pres.omega, pres.inc, pres.epi
    P0 = epi.src
    GP = G.direct_sum(P0)
    mats = {}
    for x in cat.objects:
        top = (-h.mats[x]) if h.mats[x].rows else Mat(f, 0, Omega.dim(x), [])
        bot = inc.mats[x]
        mats[x] = top.vstack(bot) if top.rows or bot.rows else Mat(f, 0, Omega.dim(x), [])
    omega_in = ModuleMap(Omega, GP, mats)
    E, proj = cokernel(omega_in)
    g_mats = {}
    for x in cat.objects:
        incl = Mat.identity(f, G.dim(x)).vstack(Mat.zeros(f, P0.dim(x), G.dim(x)))
        g_mats[x] = proj.mats[x] @ incl
    g = ModuleMap(G, E, g_mats)
    zero_then_epi = ModuleMap(
        GP,
        F,
        {x: Mat.zeros(f, F.dim(x), G.dim(x)).hstack(epi.mats[x]) for x in cat.objects},
    )
    p = factor_through_cokernel(proj, zero_then_epi)
    if not (g.is_mono() and p.is_epi()):
        raise ModuleError("realized extension is not short exact")
    for x in cat.objects:
        if rank(p.mats[x] @ g.mats[x]) != 0:
            raise ModuleError("extension composite nonzero")
        if G.dim(x) + F.dim(x) != E.dim(x):
            raise ModuleError("extension middle dimension off")
    return E, g, p


def realize_extension(F: FpModule, G: FpModule, h: ModuleMap):
    return realize_extension_from(Presentation(F), G, h)


def assemble_from_yoneda_summands(cat: FiniteLinearCategory, fo: tuple, maps: list, target: FpModule) -> ModuleMap:
    """Map yoneda(fo) -> target from per-summand maps yoneda((l,)) -> target."""
    f = cat.field
    Y = yoneda(cat, fo)
    mats = {}
    for w in cat.objects:
        cols = []
        for mp in maps:
            for j in range(mp.src.dim(w)):
                cols.append(mp.mats[w].column(j))
        mats[w] = (
            Mat(f, target.dim(w), Y.dim(w), [cols[j][i] for i in range(target.dim(w)) for j in range(len(cols))])
            if cols
            else Mat(f, target.dim(w), 0, [])
        )
    return ModuleMap(Y, target, mats)


def _yoneda_offsets(cat: FiniteLinearCategory, fo: tuple, w: str) -> list:
    offs = []
    off = 0
    for l in fo:
        offs.append(off)
        off += cat.hom_dim(w, l)
    return offs


def lift_projective(fo: tuple, target: ModuleMap, through: ModuleMap) -> ModuleMap:
    """L: yoneda(fo) -> through.src with through ∘ L = target.

    target: yoneda(fo) -> T, through: E -> T pointwise surjective onto the
    needed elements.  Built summand by summand through the Yoneda
    correspondence, so L is natural by construction.
    """
    cat = target.src.cat
    f = cat.field
    E = through.src
    maps = []
    for pos, l in enumerate(fo):
        offs = _yoneda_offsets(cat, fo, l)
        d = cat.hom_dim(l, l)
        idvec = Mat(f, d, 1, list(cat.identities[l]))
        sel = Mat(
            f,
            target.src.dim(l),
            d,
            [
                f.one if i == offs[pos] + j else f.zero
                for i in range(target.src.dim(l))
                for j in range(d)
            ],
        )
        w = target.mats[l] @ sel @ idvec
        v = solve(through.mats[l], w)
        if v is None:
            raise ModuleError("element does not lift through the given map")
        maps.append(element_to_map(cat, (l,), E, v))
    return assemble_from_yoneda_summands(cat, fo, maps, E)


def extension_class_of(pres: Presentation, G: FpModule, g: ModuleMap, p: ModuleMap) -> ModuleMap:
    """Representative Omega(F) -> G of the class of 0 -> G -> E -> F -> 0."""
    cat = pres.module.cat
    lift = lift_projective(pres.fo, pres.epi, p)
    h_mats = {}
    for x in cat.objects:
        into_e = lift.mats[x] @ pres.inc.mats[x]
        back = solve_factorization(into_e, g.mats[x])
        if back is None:
            raise ModuleError("syzygy image not inside G")
        h_mats[x] = back
    return ModuleMap(pres.omega, G, h_mats)


# ---------------------------------------------------------------------------
# endomorphism algebra of a module, decomposition, isomorphism tests


def _maps_to_algebra(F: FpModule, basis: list) -> AlgebraTable:
    f = F.cat.field

    def flat(mp: ModuleMap):
        vec = []
        for x in F.cat.objects:
            vec.extend(mp.mats[x].data)
        return vec

    d = len(basis)
    rows = Mat.from_rows(f, [flat(b) for b in basis])
    # one batched solve for all products plus the identity
    targets = []
    for bi in basis:
        for bj in basis:
            targets.append(flat(bi.compose(bj)))
    targets.append(flat(identity_map(F)))
    tmat = Mat.from_rows(f, targets).transpose()
    sol = solve(rows.transpose(), tmat)
    if sol is None:
        raise ModuleError("endomorphism products left the span")
    mult = []
    for i in range(d):
        row = []
        for j in range(d):
            col = i * d + j
            row.append(tuple(sol[t, col] for t in range(d)))
        mult.append(row)
    unit = tuple(sol[t, d * d] for t in range(d))
    return AlgebraTable(f, d, mult, tuple(unit))


def end_algebra(F: FpModule) -> tuple[list, AlgebraTable]:
    basis = hom_module(F, F)
    return basis, _maps_to_algebra(F, basis)


def decompose_with_maps(F: FpModule, rng) -> list:
    """[(summand, inc, proj)] with proj ∘ inc = id and Σ inc ∘ proj = id."""
    if F.is_zero():
        return []
    basis, alg = end_algebra(F)
    if alg.dim == 1:
        return [(F, identity_map(F), identity_map(F))]
    # locality first: the radical certificate is far cheaper than an
    # exhausted idempotent search on an indecomposable
    rad = radical(alg)
    if alg.dim - len(rad) == 1:
        return [(F, identity_map(F), identity_map(F))]
    e = find_idempotent(alg, rng)
    if e is None:
        raise ModuleError("idempotent search failed on a non-local endomorphism algebra")
    emap = combine(basis, e)
    one_minus = identity_map(F).sub(emap)
    out = []
    for idem in (emap, one_minus):
        M, inc, proj = image(idem)
        # image() of an idempotent splits: inc∘proj = idem forces proj∘inc = id
        for S, i2, p2 in decompose_with_maps(M, rng):
            out.append((S, inc.compose(i2), p2.compose(proj)))
    if sum(s.total_dim() for s, _, _ in out) != F.total_dim():
        raise ModuleError("idempotent did not split the module")
    return out


def decompose(F: FpModule, rng) -> list:
    """Indecomposable summands (with multiplicity) as FpModules."""
    return [s for s, _, _ in decompose_with_maps(F, rng)]


def is_isomorphic_indec(M: FpModule, N: FpModule) -> bool:
    """Indecomposables only; pairing span outside rad End detects isos."""
    if {x: M.dim(x) for x in M.cat.objects} != {x: N.dim(x) for x in N.cat.objects}:
        return False
    fwd = hom_module(M, N)
    bwd = hom_module(N, M)
    if not fwd or not bwd:
        return M.is_zero() and N.is_zero()
    basis, alg = end_algebra(M)
    f = M.cat.field

    def flat(mp):
        vec = []
        for x in M.cat.objects:
            vec.extend(mp.mats[x].data)
        return vec

    basis_rows = Mat.from_rows(f, [flat(b) for b in basis])
    rad = radical(alg)
    radmat = Mat.from_rows(f, rad) if rad else Mat(f, 0, alg.dim, [])
    for a in fwd:
        for b in bwd:
            comp = b.compose(a)
            coords = solve_coords(basis_rows, flat(comp))
            if coords is None:
                raise ModuleError("composite left End span")
            if any(c != f.zero for c in coords) and solve_coords(radmat, coords) is None:
                return True
    return False


def find_isomorphism(M: FpModule, N: FpModule, rng, tries: int = 300):
    """Explicit iso M -> N, or None (modules need not be indecomposable)."""
    if {x: M.dim(x) for x in M.cat.objects} != {x: N.dim(x) for x in N.cat.objects}:
        return None
    if M.is_zero():
        return zero_map(M, N)
    fwd = hom_module(M, N)
    if not fwd:
        return None
    f = M.cat.field
    for i, cand in enumerate(fwd):
        if cand.is_iso():
            return cand
    for _ in range(tries):
        coef = [f.rand(rng) for _ in fwd]
        cand = None
        for c, b in zip(coef, fwd):
            term = b.scale(c)
            cand = term if cand is None else cand.add(term)
        if cand is not None and cand.is_iso():
            return cand
    return None


# ---------------------------------------------------------------------------
# module enumeration (raw, per dimension vector) used by the desk-scale
# exhaustive checks; only sensible over small prime fields


def _classify_keys(cat: FiniteLinearCategory):
    """Split basis keys into identity-forced, derived (exact composites of
    earlier keys) and free ones; derived entries never get enumerated."""
    forced = {}
    for x in cat.objects:
        ident = cat.identities[x]
        ones = [i for i, c in enumerate(ident) if c == cat.field.one]
        zeros_ok = all(c in (cat.field.zero, cat.field.one) for c in ident)
        if len(ones) == 1 and zeros_ok and sum(1 for c in ident if c != cat.field.zero) == 1:
            forced[(x, x, ones[0])] = "identity"
    keys = cat.all_basis_keys()
    known = set(forced)
    derived = {}
    changed = True
    while changed:
        changed = False
        for k in keys:
            if k in known:
                continue
            target = cat.basis_mor(k)
            for kg in keys:
                if kg == k or kg not in known:
                    continue
                g = cat.basis_mor(kg)
                for kf in keys:
                    if kf == k or kf not in known or kf[1] != kg[0]:
                        continue
                    comp = cat.compose_mor(g, cat.basis_mor(kf))
                    if comp.src == target.src and comp.tgt == target.tgt and comp.coords == target.coords:
                        derived[k] = (kg, kf)
                        known.add(k)
                        changed = True
                        break
                if k in known:
                    break
    free = [k for k in keys if k not in known]
    return forced, derived, free


def enumerate_modules(cat: FiniteLinearCategory, dim_vector: dict):
    """Yield every module with the given dimension vector, exhaustively.

    Backtracks over the free action matrices, solving the functoriality
    equations that become linear once earlier keys are fixed, and filters
    the leaves through full validation.
    """
    f = cat.field
    if f.kind != "prime":
        raise ModuleError("raw enumeration requires a finite field")
    forced, derived, free = _classify_keys(cat)
    keys = cat.all_basis_keys()
    dimv = {x: int(dim_vector.get(x, 0)) for x in cat.objects}

    def shape(k):
        return dimv[k[0]], dimv[k[1]]

    # composable basis pairs and the expansion of their composite
    equations = []
    for kg in keys:
        g = cat.basis_mor(kg)
        for kf in keys:
            if kf[1] != kg[0]:
                continue
            comp = cat.compose_mor(g, cat.basis_mor(kf))
            support = [
                (comp.src, comp.tgt, i) for i, c in enumerate(comp.coords) if c != f.zero
            ]
            equations.append((kg, kf, comp, support))

    def fill_derived(action):
        for k, (kg, kf) in derived.items():
            if k in action:
                continue
            if kg in action and kf in action:
                action[k] = action[kf] @ action[kg]
        # iterate until stable (derivations may chain)
        again = True
        while again:
            again = False
            for k, (kg, kf) in derived.items():
                if k not in action and kg in action and kf in action:
                    action[k] = action[kf] @ action[kg]
                    again = True

    def recurse(idx, action):
        if idx == len(free):
            full = dict(action)
            fill_derived(full)
            if len(full) != len(keys):
                return
            F = FpModule(cat, dimv, full)
            if not F.validate():
                yield F
            return
        k = free[idx]
        r, c = shape(k)
        # collect linear constraints on the entries of action[k]
        rows = []
        rhs = []
        probe_action = dict(action)
        fill_derived(probe_action)

        def known_mat(kk, kmat):
            if kk == k:
                return kmat
            return probe_action.get(kk)

        n_unknown = r * c
        for kg, kf, comp, support in equations:
            # F(comp) == F(kf) @ F(kg); linear in k when k appears exactly once
            occurrences = int(kg == k) + int(kf == k) + sum(1 for s in support if s == k)
            others = {kg, kf, *support} - {k}
            if occurrences != 1 or any(o not in probe_action for o in others):
                continue
            x, y = comp.src, comp.tgt
            rdim, cdim = dimv[x], dimv[y]
            if rdim == 0 or cdim == 0:
                continue
            # build: lhs(entries) - rhs(entries) = 0 entrywise, affine in unknown
            for a in range(rdim):
                for b in range(cdim):
                    coeffs = [f.zero] * n_unknown
                    const = f.zero
                    # left side: sum over support of comp coords
                    for s in support:
                        cval = comp.coords[s[2]]
                        if s == k:
                            coeffs[a * c + b] = f.add(coeffs[a * c + b], cval)
                        else:
                            const = f.add(const, f.mul(cval, probe_action[s][a, b]))
                    # right side: (F(kf) @ F(kg))[a, b]
                    Fg = known_mat(kg, None)
                    Ff = known_mat(kf, None)
                    if kg == k and kf == k:
                        continue
                    if kg == k:
                        Ff = probe_action[kf]
                        for m in range(Ff.cols):
                            coeffs[m * c + b] = f.sub(coeffs[m * c + b], Ff[a, m])
                    elif kf == k:
                        Fg = probe_action[kg]
                        for m in range(Fg.rows):
                            coeffs[a * c + m] = f.sub(coeffs[a * c + m], Fg[m, b])
                    else:
                        prod = probe_action[kf] @ probe_action[kg]
                        const = f.sub(const, prod[a, b])
                    if any(cc != f.zero for cc in coeffs) or const != f.zero:
                        rows.append(coeffs)
                        rhs.append(f.neg(const))
        if rows:
            A = Mat.from_rows(f, rows)
            B = Mat(f, len(rhs), 1, rhs)
            part = solve(A, B)
            if part is None:
                return
            ker = kernel_basis(A)
            # enumerate particular + kernel combinations
            if f.p ** ker.cols > 2_000_000:
                raise ModuleError("module enumeration space too large")
            for combo in itertools.product(range(f.p), repeat=ker.cols):
                entries = [part[i, 0] for i in range(n_unknown)]
                for j, cc in enumerate(combo):
                    if cc:
                        for i in range(n_unknown):
                            entries[i] = f.add(entries[i], f.mul(cc, ker[i, j]))
                action[k] = Mat(f, r, c, entries)
                yield from recurse(idx + 1, action)
            action.pop(k, None)
        else:
            if f.p ** n_unknown > 2_000_000:
                raise ModuleError("module enumeration space too large")
            for combo in itertools.product(range(f.p), repeat=n_unknown):
                action[k] = Mat(f, r, c, list(combo))
                yield from recurse(idx + 1, action)
            action.pop(k, None)

    start = {}
    for k, why in forced.items():
        x = k[0]
        start[k] = Mat.identity(f, dimv[x])
    yield from recurse(0, start)
