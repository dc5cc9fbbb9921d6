"""Stable module category of a self-injective path algebra as a
triangulated backend: objects are chosen non-projective indecomposables,
homs are taken modulo maps factoring through projectives, the shift is
the cosyzygy, and cones come from injective-envelope pushouts.
"""

from __future__ import annotations

import random

from ..category import BlockMorphism, CategoryError, FiniteLinearCategory, Mor
from ..exactlin import Mat, rank, solve, solve_factorization
from ..modules import (
    FpModule,
    ModuleMap,
    cokernel,
    coords_in_basis,
    combine,
    find_isomorphism,
    hom_module,
    identity_map,
    kernel,
    map_flat_coords,
    yoneda,
    zero_map,
)
from .base import Caps, ETriangle, ExtriError, ExtriStructure
from .homcat import HomCategory


def co_yoneda_injective(base: FiniteLinearCategory, v: str) -> FpModule:
    """The injective with socle at v: w |-> Hom(v, w)^* with dual actions."""
    f = base.field
    dims = {w: base.hom_dim(v, w) for w in base.objects}
    action = {}
    for k in base.all_basis_keys():
        x, y, _ = k
        u = base.basis_mor(k)
        # covariant Hom(v, x) -> Hom(v, y), h |-> u ∘ h; dualize to I(y) -> I(x)
        cols = []
        for b in range(base.hom_dim(v, x)):
            h = base.basis_mor((v, x, b))
            cols.append(base.compose_mor(u, h).coords)
        m = (
            Mat(f, dims[y], dims[x], [cols[j][i] for i in range(dims[y]) for j in range(len(cols))])
            if cols
            else Mat(f, dims[y], 0, [])
        )
        action[k] = m.transpose()
    return FpModule(base, dims, action)


class StableHoms(HomCategory):
    """Hom category with morphism spaces reduced modulo [projectives]."""

    def __init__(self, base, objects, rng, projectives: list):
        self.projectives = projectives
        self._raw: dict = {}
        self._proj_span: dict = {}
        super().__init__(base, objects, rng)

    def module_pair(self, x, y):
        return self.objects[x], self.objects[y]

    def projective_span(self, M: FpModule, N: FpModule) -> list:
        """Spanning maps of [proj](M, N)."""
        key = (id(M), id(N))
        if key not in self._proj_span:
            span = []
            for P in self.projectives:
                to_p = hom_module(M, P)
                from_p = hom_module(P, N)
                for a in to_p:
                    for b in from_p:
                        span.append(b.compose(a))
            self._proj_span[key] = span
        return self._proj_span[key]

    def raw_hom_basis(self, x: str, y: str) -> list:
        raise NotImplementedError  # stable categories use stable_hom_basis

    def hom_basis(self, x: str, y: str) -> list:
        if (x, y) not in self._hom_bases:
            M, N = self.objects[x], self.objects[y]
            basis, _ = self.stable_basis_normalized(x, y)
            self._hom_bases[(x, y)] = basis
        return self._hom_bases[(x, y)]

    def stable_basis_normalized(self, x: str, y: str):
        M, N = self.objects[x], self.objects[y]
        f = self.base.field
        span_rows = [map_flat_coords(s) for s in self.projective_span(M, N)]
        picked = []

        def current_rank():
            rows = span_rows + [map_flat_coords(b) for b in picked]
            return rank(Mat.from_rows(f, rows)) if rows else 0

        base_rank = current_rank()
        candidates = []
        if x == y:
            candidates.append(identity_map(M))
        candidates.extend(hom_module(M, N))
        for h in candidates:
            before = current_rank()
            picked.append(h)
            if current_rank() == before:
                picked.pop()
        return picked, span_rows

    def coords_in_hom(self, x: str, z: str, mp: ModuleMap) -> list:
        """Stable coordinates: solve in basis + projective span, drop the span part."""
        f = self.base.field
        basis = self.hom_basis(x, z)
        M, N = self.objects[x], self.objects[z]
        span = self.projective_span(M, N)
        if not basis:
            return []
        rows = [map_flat_coords(b) for b in basis] + [map_flat_coords(s) for s in span]
        from ..algebra import solve_coords

        c = solve_coords(Mat.from_rows(f, rows), map_flat_coords(mp))
        if c is None:
            raise CategoryError("stable composite escaped Hom")
        return c[: len(basis)]

    def stable_is_zero(self, x: str, z: str, mp: ModuleMap) -> bool:
        return all(c == self.base.field.zero for c in self.coords_in_hom(x, z, mp))


class StableBackend(ExtriStructure):
    kind = "stable"

    def __init__(self, base: FiniteLinearCategory, objects: dict, caps: Caps):
        self.base = base
        rng = random.Random(caps.seed)
        self.proj_modules = [yoneda(base, (v,)) for v in base.objects]
        self.inj_modules = [co_yoneda_injective(base, v) for v in base.objects]
        self._check_self_injective(rng)
        self.homcat = StableHoms(base, objects, rng, self.proj_modules)
        super().__init__(self.homcat.cat, caps)
        self._shift_obj: dict = {}
        self._shift_data: dict = {}
        self._cone_cache: dict = {}

    # -- validation -------------------------------------------------------
    def _check_self_injective(self, rng):
        for inj in self.inj_modules:
            if not any(find_isomorphism(inj, p, rng) for p in self.proj_modules):
                raise CategoryError("base algebra is not self-injective")

    def is_projective_module(self, M: FpModule) -> bool:
        for p in self.proj_modules:
            if {x: M.dim(x) for x in self.base.objects} == {
                x: p.dim(x) for x in self.base.objects
            } and find_isomorphism(p, M, self.homcat.rng):
                return True
        return False

    # -- injective embedding and shift --------------------------------------
    def injective_embedding(self, M: FpModule) -> tuple[FpModule, ModuleMap]:
        """Canonical mono M -> ⊕_v I_v^{dim M(v)} (not minimal, stably harmless)."""
        f = self.base.field
        pieces = []
        for v in self.base.objects:
            for t in range(M.dim(v)):
                pieces.append((v, t))
        if not pieces:
            Z = FpModule.zero(self.base)
            return Z, zero_map(M, Z)
        total = None
        for v, _ in pieces:
            iv = co_yoneda_injective(self.base, v)
            total = iv if total is None else total.direct_sum(iv)
        mats = {}
        for w in self.base.objects:
            rows = []
            for v, t in pieces:
                for b in range(self.base.hom_dim(v, w)):
                    fb = self.base.basis_mor((v, w, b))
                    act = M.act_mor(fb)  # M(w) -> M(v)
                    rows.append([act[t, c] for c in range(M.dim(w))])
            mats[w] = (
                Mat.from_rows(f, rows) if rows else Mat(f, 0, M.dim(w), [])
            )
        emb = ModuleMap(M, total, mats)
        if not emb.is_natural() or not emb.is_mono():
            raise ExtriError("injective embedding failed")
        return total, emb

    def shift_module(self, M: FpModule):
        """(raw cosyzygy, embedding data) before stable reduction."""
        I, emb = self.injective_embedding(M)
        C, proj = cokernel(emb)
        return I, emb, C, proj

    def shift_object(self, x: str) -> str:
        """Label of x[1]; must land in the object list."""
        if x not in self._shift_obj:
            M = self.homcat.objects[x]
            I, emb, C, proj = self.shift_module(M)
            fo, section, retraction = self.homcat.identify(C, allow_drop=self.is_projective_module)
            if len(fo) != 1:
                raise CategoryError(f"shift of {x} is not one listed indecomposable: {fo}")
            self._shift_obj[x] = fo[0]
            self._shift_data[x] = (I, emb, C, proj, section, retraction)
        return self._shift_obj[x]

    def shift_fo(self, fo: tuple) -> tuple:
        return tuple(self.shift_object(x) for x in fo)

    def unshift_object(self, x: str) -> str:
        for y in self.cat.objects:
            if self.shift_object(y) == x:
                return y
        raise ExtriError(f"no object shifts onto {x}")

    def unshift_fo(self, fo: tuple) -> tuple:
        return tuple(self.unshift_object(x) for x in fo)

    def shift_map(self, x: str, y: str, rep: ModuleMap) -> ModuleMap:
        """Representative of rep[1]: x[1] -> y[1] on the reduced objects."""
        Mx = self.homcat.objects[x]
        My = self.homcat.objects[y]
        self.shift_object(x)
        self.shift_object(y)
        Ix, embx, Cx, projx, sectx, retrx = self._shift_data[x]
        Iy, emby, Cy, projy, secty, retry_ = self._shift_data[y]
        # lift rep through the injective embeddings: L: Ix -> Iy
        L = _solve_square(embx, emby.compose(rep), Ix, Iy)
        # induced on cokernels
        ind_mats = {}
        for w in self.base.objects:
            # Cx -> Cy: solve through projx (pointwise surjective)
            m = _induced_on_coker(projx.mats[w], projy.mats[w] @ L.mats[w])
            ind_mats[w] = m
        ind = ModuleMap(Cx, Cy, ind_mats)
        return retry_.compose(ind).compose(sectx)

    def shift_mor(self, m: Mor) -> Mor:
        """[1] on a stable basis-coordinate morphism."""
        rep = self.homcat.mor_to_map(m)
        shifted = self.shift_map(m.src, m.tgt, rep)
        sx, sy = self.shift_object(m.src), self.shift_object(m.tgt)
        coords = self.homcat.coords_in_hom(sx, sy, shifted)
        return Mor(sx, sy, tuple(coords))

    def unshift_mor(self, m: Mor) -> Mor:
        """[-1]: invert the shift on hom spaces (bijective by construction)."""
        f = self.cat.field
        sx, sy = self.unshift_object(m.src), self.unshift_object(m.tgt)
        basis = self.homcat.hom_basis(sx, sy)
        if not basis:
            if any(c != f.zero for c in m.coords):
                raise ExtriError("unshift of a nonzero morphism in a zero hom")
            return self.cat.zero_mor(sx, sy)
        cols = []
        for i in range(len(basis)):
            b = self.cat.basis_mor((sx, sy, i))
            cols.append(self.shift_mor(b).coords)
        mat = Mat(
            f, len(m.coords), len(basis), [cols[j][i] for i in range(len(m.coords)) for j in range(len(cols))]
        )
        target = Mat(f, len(m.coords), 1, list(m.coords))
        sol = solve(mat, target)
        if sol is None:
            raise ExtriError("shift not surjective on hom spaces")
        return Mor(sx, sy, tuple(sol[i, 0] for i in range(sol.rows)))

    # -- stable hom helpers ---------------------------------------------------
    def stable_hom_dim(self, x: str, y: str) -> int:
        return self.cat.hom_dim(x, y)

    # -- cones ------------------------------------------------------------------
    def cone_of_map(self, src_fo: tuple, tgt_fo: tuple, rep: ModuleMap):
        """Triangle data for sum(src) --rep--> sum(tgt) via the pushout cone.

        Returns (fo_c, q_block: tgt -> cone, r_block: cone -> src[1]).
        """
        M = self.homcat.sum_module(src_fo)
        N = self.homcat.sum_module(tgt_fo)
        I, emb = self.injective_embedding(M)
        f = self.base.field
        # C = coker(M -> I ⊕ N), m |-> (emb m, -rep m)
        IN = I.direct_sum(N)
        mats = {}
        for w in self.base.objects:
            top = emb.mats[w]
            bot = -rep.mats[w]
            mats[w] = top.vstack(bot)
        into = ModuleMap(M, IN, mats)
        C, proj = cokernel(into)
        fo_c, section, retraction = self.homcat.identify(C, allow_drop=self.is_projective_module)
        # q: N -> C
        q_mats = {}
        for w in self.base.objects:
            incl = Mat.zeros(f, I.dim(w), N.dim(w)).vstack(Mat.identity(f, N.dim(w)))
            q_mats[w] = proj.mats[w] @ incl
        q = ModuleMap(N, C, q_mats)
        # r: C -> coker(emb) = M[1]-raw: induced by projection I ⊕ N -> I
        Iq, embq, Craw, projq = self.shift_module(M)
        r_mats = {}
        for w in self.base.objects:
            pick_i = Mat.identity(f, I.dim(w)).hstack(Mat.zeros(f, I.dim(w), N.dim(w)))
            r_mats[w] = _induced_on_coker(proj.mats[w], projq.mats[w] @ pick_i)
        r = ModuleMap(C, Craw, r_mats)
        # reduce M[1]-raw onto listed objects
        shifted_fo = self.shift_fo(src_fo)
        red_fo, red_section, red_retraction = self.homcat.identify(
            Craw, allow_drop=self.is_projective_module
        )
        if sorted(red_fo) != sorted(shifted_fo):
            raise ExtriError("cone target disagrees with the object shift")
        # align red_fo with shifted_fo via a permutation-free reorder map
        reorder = _reorder_block(self.homcat, red_fo, shifted_fo)
        q_block = self.homcat.map_to_block(tgt_fo, fo_c, retraction.compose(q))
        r_red = red_retraction.compose(r).compose(section)
        r_block0 = self.homcat.map_to_block(fo_c, red_fo, r_red)
        from ..category import block_compose

        r_block = block_compose(self.cat, reorder, r_block0)
        return fo_c, q_block, r_block

    # -- ExtriStructure hooks ------------------------------------------------
    def e_dim_pair(self, x: str, z: str) -> int:
        return self.cat.hom_dim(x, self.shift_object(z))

    def e_module_indec(self, z: str) -> FpModule:
        """E(-, z) = stable Hom(-, z[1]) = yoneda module of z[1]."""
        return self.yoneda_module((self.shift_object(z),))

    def e_push_pair(self, z_mor: Mor) -> dict:
        """Postcomposition with z_mor[1] on stable homs."""
        f = self.cat.field
        shifted = self.shift_mor(z_mor)
        out = {}
        for x in self.cat.objects:
            src_d = self.cat.hom_dim(x, shifted.src)
            tgt_d = self.cat.hom_dim(x, shifted.tgt)
            cols = []
            for b in range(src_d):
                h = self.cat.basis_mor((x, shifted.src, b))
                cols.append(self.cat.compose_mor(shifted, h).coords)
            out[x] = (
                Mat(f, tgt_d, src_d, [cols[j][i] for i in range(tgt_d) for j in range(len(cols))])
                if cols
                else Mat(f, tgt_d, 0, [])
            )
        return out

    def delta_to_mor_block(self, X: tuple, Z: tuple, delta: tuple) -> BlockMorphism:
        """delta as a block morphism X -> Z[1]."""
        f = self.cat.field
        offs = self.e_offsets(X, Z)
        zshift = self.shift_fo(Z)
        rows = []
        for j, z in enumerate(Z):
            row = []
            for i, x in enumerate(X):
                d = self.e_dim_pair(x, z)
                coords = tuple(delta[offs[(i, j)] + s] for s in range(d))
                row.append(Mor(x, zshift[j], coords))
            rows.append(tuple(row))
        return BlockMorphism(X, zshift, tuple(rows))

    def realize_pair_blocks(self, X: tuple, Z: tuple, delta: tuple) -> ETriangle:
        key = (X, Z, tuple(delta))
        if key in self._cone_cache:
            return self._cone_cache[key]
        f = self.cat.field
        # triangle Z -> Y -> X realizing delta: Y = cone(-delta[-1]: X[-1] -> Z)
        dblock = self.delta_to_mor_block(X, Z, delta)
        wrows = []
        for j in range(len(Z)):
            row = []
            for i in range(len(X)):
                ent = dblock.entry(j, i)
                um = self.unshift_mor(Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords)))
                row.append(um)
            wrows.append(tuple(row))
        Xm = self.unshift_fo(X)
        w = BlockMorphism(Xm, Z, tuple(wrows))
        rep = self.homcat.block_to_map(w)
        fo_c, q_block, r_block = self.cone_of_map(Xm, Z, rep)
        # r lands in Xm[1]; identify Xm[1] with X summandwise
        t = ETriangle(Z, fo_c, X, q_block, _retarget_block(r_block, X), tuple(delta))
        self._cone_cache[key] = t
        return t

    def cone_data(self, w: BlockMorphism):
        """(cone fo, q: tgt -> cone, r: cone -> src[1]) for the block w."""
        rep = self.homcat.block_to_map(w)
        return self.cone_of_map(w.src, w.tgt, rep)

    def is_deflation(self, w: BlockMorphism):
        """Every stable morphism is a deflation; build its triangle.

        From the cone triangle (w, q, r) the anti-rotation gives the
        distinguished (-r[-1], w, q), so the conflation onto tgt is
        cone(w)[-1] --(-r[-1])--> src --w--> tgt with class q.
        """
        rep = self.homcat.block_to_map(w)
        fo_c, q_block, r_block = self.cone_of_map(w.src, w.tgt, rep)
        Z = self.unshift_fo(fo_c)
        f = self.cat.field
        # delta in E(tgt, Z) = Hom(tgt, Z[1]) = Hom(tgt, cone): exactly q
        offs = self.e_offsets(w.tgt, Z)
        out = [f.zero] * self.e_dim(w.tgt, Z)
        for i, t in enumerate(w.tgt):
            for j, z in enumerate(Z):
                ent = q_block.entry(j, i)
                for s, c in enumerate(ent.coords):
                    out[offs[(i, j)] + s] = c
        delta = tuple(out)
        grows = []
        for i, s in enumerate(w.src):
            row = []
            for j, z in enumerate(Z):
                ent = r_block.entry(i, j)  # fo_c[j] -> src[i][1]
                neg = Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords))
                row.append(self.unshift_mor(neg))
            grows.append(tuple(row))
        g = BlockMorphism(Z, w.src, tuple(grows))
        return ETriangle(Z, w.src, w.tgt, g, w, delta)

    def is_inflation(self, w: BlockMorphism):
        rep = self.homcat.block_to_map(w)
        fo_c, q_block, r_block = self.cone_of_map(w.src, w.tgt, rep)
        # triangle src -> tgt -> cone -> src[1]: as conflation (src, tgt, cone)
        # with delta = class of r_block in E(cone, src) = Hom(cone, src[1])
        f = self.cat.field
        offs = self.e_offsets(fo_c, w.src)
        out = [f.zero] * self.e_dim(fo_c, w.src)
        for i, c_lab in enumerate(fo_c):
            for j, s_lab in enumerate(w.src):
                ent = r_block.entry(j, i)
                for s, cval in enumerate(ent.coords):
                    out[offs[(i, j)] + s] = cval
        return ETriangle(w.src, w.tgt, fo_c, w, q_block, tuple(out))

    def every_morphism_conflates(self) -> bool:
        return True


def _solve_square(embx: ModuleMap, target: ModuleMap, Ix: FpModule, Iy: FpModule) -> ModuleMap:
    """L: Ix -> Iy natural with L ∘ embx = target (injectivity of Iy)."""
    f = Ix.cat.field
    basis = hom_module(Ix, Iy)
    if not basis:
        if all(target.mats[w].is_zero() for w in Ix.cat.objects):
            return zero_map(Ix, Iy)
        raise ExtriError("no maps between injective hulls")
    cols = []
    for b in basis:
        comp = b.compose(embx)
        cols.append(map_flat_coords(comp))
    tvec = map_flat_coords(target)
    A = Mat.from_rows(f, cols).transpose()
    bcol = Mat(f, len(tvec), 1, tvec)
    sol = solve(A, bcol)
    if sol is None:
        raise ExtriError("injectivity lift failed")
    return combine(basis, [sol[i, 0] for i in range(sol.rows)])


def _induced_on_coker(proj_src: Mat, composite: Mat) -> Mat:
    """m with m @ proj_src = composite (proj_src pointwise surjective)."""
    sol = solve_factorization(composite.transpose(), proj_src.transpose())
    if sol is None:
        raise ExtriError("map does not descend to the cokernel")
    return sol.transpose()


def _reorder_block(homcat, src_fo: tuple, tgt_fo: tuple) -> BlockMorphism:
    """Identity-like block matching equal labels of two orderings."""
    cat = homcat.cat
    used = [False] * len(src_fo)
    assign = {}
    for i, t in enumerate(tgt_fo):
        for j, s in enumerate(src_fo):
            if not used[j] and s == t:
                used[j] = True
                assign[i] = j
                break
        else:
            raise ExtriError("reorder mismatch")
    rows = []
    for i, t in enumerate(tgt_fo):
        row = []
        for j, s in enumerate(src_fo):
            row.append(cat.identity_mor(s) if assign[i] == j else cat.zero_mor(s, t))
        rows.append(tuple(row))
    return BlockMorphism(src_fo, tgt_fo, tuple(rows))


def _retarget_block(b: BlockMorphism, new_tgt: tuple) -> BlockMorphism:
    if tuple(b.tgt) != tuple(new_tgt):
        # labels must agree; the shift_fo order is preserved by construction
        if sorted(b.tgt) != sorted(new_tgt):
            raise ExtriError("block target mismatch")
        raise ExtriError("block target order mismatch")
    return BlockMorphism(b.src, new_tgt, b.blocks)
