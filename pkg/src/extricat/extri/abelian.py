"""Abelian backend: conflations are all short exact sequences of modules
over a base path algebra, restricted to the additive closure of a chosen
set of indecomposables.
"""

from __future__ import annotations

import random

from ..category import BlockMorphism, FiniteLinearCategory, Mor, block_compose
from ..exactlin import Mat, is_injective, is_surjective, solve_factorization
from ..modules import (
    ExtSpace,
    FpModule,
    ModuleMap,
    Presentation,
    cokernel,
    extension_class_of,
    kernel,
    lift_projective,
    realize_extension_from,
    zero_map,
)
from .base import Caps, ETriangle, ExtriError, ExtriStructure
from .homcat import HomCategory


class AbelianBackend(ExtriStructure):
    kind = "abelian"

    def __init__(self, base: FiniteLinearCategory, objects: dict, caps: Caps):
        self.base = base
        rng = random.Random(caps.seed)
        self.homcat = HomCategory(base, objects, rng)
        super().__init__(self.homcat.cat, caps)
        self._pres: dict = {}
        self._pres_fo: dict = {}
        self._ext: dict = {}
        self._omega_lift_cache: dict = {}
        self._e_mod_indec: dict = {}

    # -- presentations over the base ------------------------------------
    def presentation(self, x: str) -> Presentation:
        if x not in self._pres:
            self._pres[x] = Presentation(self.homcat.objects[x])
        return self._pres[x]

    def presentation_fo(self, fo: tuple) -> Presentation:
        if fo not in self._pres_fo:
            if not fo:
                pres = Presentation(FpModule.zero(self.base))
            else:
                pres = self.presentation(fo[0])
                for l in fo[1:]:
                    pres = Presentation.direct_sum(pres, self.presentation(l))
            self._pres_fo[fo] = pres
        return self._pres_fo[fo]

    def _omega_offsets(self, fo: tuple) -> list:
        """Per-summand offsets of Omega(sum) = ⊕ Omega(x) (blockwise kernels)."""
        offs = []
        acc = {w: 0 for w in self.base.objects}
        for l in fo:
            offs.append(dict(acc))
            po = self.presentation(l).omega
            for w in self.base.objects:
                acc[w] += po.dim(w)
        return offs

    def omega_projection(self, fo: tuple, i: int) -> ModuleMap:
        pres = self.presentation_fo(fo)
        px = self.presentation(fo[i])
        offs = self._omega_offsets(fo)[i]
        f = self.cat.field
        mats = {}
        for w in self.base.objects:
            rows, cols = px.omega.dim(w), pres.omega.dim(w)
            mats[w] = Mat(
                f, rows, cols,
                [f.one if offs[w] + r == c else f.zero for r in range(rows) for c in range(cols)],
            )
        out = ModuleMap(pres.omega, px.omega, mats)
        return out

    def omega_inclusion(self, fo: tuple, i: int) -> ModuleMap:
        pres = self.presentation_fo(fo)
        px = self.presentation(fo[i])
        offs = self._omega_offsets(fo)[i]
        f = self.cat.field
        mats = {}
        for w in self.base.objects:
            rows, cols = pres.omega.dim(w), px.omega.dim(w)
            mats[w] = Mat(
                f, rows, cols,
                [f.one if r == offs[w] + c else f.zero for r in range(rows) for c in range(cols)],
            )
        return ModuleMap(px.omega, pres.omega, mats)

    def ext_space(self, x: str, z: str) -> ExtSpace:
        if (x, z) not in self._ext:
            self._ext[(x, z)] = ExtSpace(
                self.homcat.objects[x], self.homcat.objects[z], self.presentation(x)
            )
        return self._ext[(x, z)]

    # -- ExtriStructure hooks ---------------------------------------------
    def e_dim_pair(self, x: str, z: str) -> int:
        return self.ext_space(x, z).dim

    def omega_lift(self, u: Mor) -> ModuleMap:
        """Omega(u): Omega(src) -> Omega(tgt) induced on syzygies."""
        key = (u.src, u.tgt, u.coords)
        if key in self._omega_lift_cache:
            return self._omega_lift_cache[key]
        px = self.presentation(u.src)
        py = self.presentation(u.tgt)
        umap = self.homcat.mor_to_map(u)
        lifted = lift_projective(px.fo, umap.compose(px.epi), py.epi)
        mats = {}
        for w in self.base.objects:
            img = lifted.mats[w] @ px.inc.mats[w]
            m = solve_factorization(img, py.inc.mats[w])
            if m is None:
                raise ExtriError("syzygy lift escaped the syzygy")
            mats[w] = m
        out = ModuleMap(px.omega, py.omega, mats)
        self._omega_lift_cache[key] = out
        return out

    def e_module_indec(self, z: str) -> FpModule:
        """E(-, z) over the presented category via syzygy pullbacks."""
        if z in self._e_mod_indec:
            return self._e_mod_indec[z]
        cat = self.cat
        f = cat.field
        dims = {x: self.e_dim_pair(x, z) for x in cat.objects}
        action = {}
        for k in cat.all_basis_keys():
            x, y, _ = k
            sp_y = self.ext_space(y, z)
            sp_x = self.ext_space(x, z)
            u = cat.basis_mor(k)
            omega_u = self.omega_lift(u)
            cols = [sp_x.coords_of(rep.compose(omega_u)) for rep in sp_y.reps]
            action[k] = (
                Mat(f, dims[x], dims[y], [cols[j][i] for i in range(dims[x]) for j in range(len(cols))])
                if cols
                else Mat(f, dims[x], 0, [])
            )
        mod = FpModule(cat, dims, action)
        self._e_mod_indec[z] = mod
        return mod

    def e_push_pair(self, z_mor: Mor) -> dict:
        zmap = self.homcat.mor_to_map(z_mor)
        out = {}
        f = self.cat.field
        for x in self.cat.objects:
            sp_src = self.ext_space(x, z_mor.src)
            sp_tgt = self.ext_space(x, z_mor.tgt)
            cols = [sp_tgt.coords_of(zmap.compose(rep)) for rep in sp_src.reps]
            out[x] = (
                Mat(f, sp_tgt.dim, sp_src.dim, [cols[j][i] for i in range(sp_tgt.dim) for j in range(len(cols))])
                if cols
                else Mat(f, sp_tgt.dim, 0, [])
            )
        return out

    # -- class representatives and coordinates ------------------------------
    def class_rep(self, X: tuple, Z: tuple, delta: tuple) -> ModuleMap:
        """Representative Omega(sum X) -> sum Z of block coordinates delta."""
        f = self.cat.field
        pres = self.presentation_fo(X)
        sumZ = self.homcat.sum_module(Z)
        offs = self.e_offsets(X, Z)
        total = zero_map(pres.omega, sumZ)
        for i, x in enumerate(X):
            proj_omega = self.omega_projection(X, i)
            for j, z in enumerate(Z):
                sp = self.ext_space(x, z)
                block = [delta[offs[(i, j)] + s] for s in range(sp.dim)]
                if all(c == f.zero for c in block):
                    continue
                rep = None
                for c, r in zip(block, sp.reps):
                    term = r.scale(c)
                    rep = term if rep is None else rep.add(term)
                zinc = self.homcat.inclusion(Z, j)
                total = total.add(zinc.compose(rep).compose(proj_omega))
        return total

    def coords_of_rep(self, X: tuple, Z: tuple, h: ModuleMap) -> tuple:
        """Block coordinates of the class of h: Omega(sum X) -> sum Z."""
        f = self.cat.field
        offs = self.e_offsets(X, Z)
        out = [f.zero] * self.e_dim(X, Z)
        for i, x in enumerate(X):
            inc_omega = self.omega_inclusion(X, i)
            for j, z in enumerate(Z):
                projz = self.homcat.projection(Z, j)
                comp = projz.compose(h).compose(inc_omega)
                sp = self.ext_space(x, z)
                for s, c in enumerate(sp.coords_of(comp)):
                    out[offs[(i, j)] + s] = c
        return tuple(out)

    # -- realization ----------------------------------------------------------
    def realize_pair_blocks(self, X: tuple, Z: tuple, delta: tuple) -> ETriangle:
        pres = self.presentation_fo(X)
        sumZ = self.homcat.sum_module(Z)
        h = self.class_rep(X, Z, delta)
        E, g, p = realize_extension_from(pres, sumZ, h)
        fo_y, section, retraction = self.homcat.identify(E)
        gmap = retraction.compose(g)
        fmap = ModuleMap(p.src, self.homcat.sum_module(X), p.mats).compose(section)
        g_block = self.homcat.map_to_block(Z, fo_y, gmap)
        f_block = self.homcat.map_to_block(fo_y, X, fmap)
        t = ETriangle(Z, fo_y, X, g_block, f_block, tuple(delta))
        if not block_compose(self.cat, f_block, g_block).is_zero():
            raise ExtriError("realized conflation has nonzero composite")
        return t

    # -- deflation / inflation tests -------------------------------------------
    def _triangle_from_ses(self, Z: tuple, Y: tuple, X: tuple, g_raw: ModuleMap, f_raw: ModuleMap) -> ETriangle:
        """ETriangle from exact 0 -> sum(Z) -> sum(Y) -> sum(X) -> 0 maps."""
        pres = self.presentation_fo(X)
        sumZ = self.homcat.sum_module(Z)
        sumX = self.homcat.sum_module(X)
        f_as = ModuleMap(f_raw.src, sumX, f_raw.mats)
        g_as = ModuleMap(sumZ, g_raw.tgt, g_raw.mats)
        h = extension_class_of(pres, sumZ, g_as, f_as)
        delta = self.coords_of_rep(X, Z, h)
        g_block = self.homcat.map_to_block(Z, Y, g_as)
        f_block = self.homcat.map_to_block(Y, X, f_as)
        return ETriangle(Z, Y, X, g_block, f_block, delta)

    def is_deflation(self, w: BlockMorphism):
        wmap = self.homcat.block_to_map(w)
        if not all(is_surjective(wmap.mats[x]) for x in self.base.objects):
            return None
        K, inc = kernel(wmap)
        fo_k, section, _ = self.homcat.identify(K)
        g_raw = inc.compose(section)
        return self._triangle_from_ses(fo_k, w.src, w.tgt, g_raw, wmap)

    def is_inflation(self, w: BlockMorphism):
        wmap = self.homcat.block_to_map(w)
        if not all(is_injective(wmap.mats[x]) for x in self.base.objects):
            return None
        C, proj = cokernel(wmap)
        fo_c, _, retraction = self.homcat.identify(C)
        f_raw = retraction.compose(proj)
        return self._triangle_from_ses(w.src, w.tgt, fo_c, wmap, f_raw)

    # -- closure validation ------------------------------------------------------
    def extension_closed_check(self) -> list:
        """Realize every basis class between indecomposables; middles must identify."""
        problems = []
        one = self.cat.field.one
        zero = self.cat.field.zero
        for x in self.cat.objects:
            for z in self.cat.objects:
                sp = self.ext_space(x, z)
                for i in range(sp.dim):
                    delta = tuple(one if s == i else zero for s in range(sp.dim))
                    try:
                        self.realize((x,), (z,), delta)
                    except Exception as exc:
                        problems.append(("extension-closure", f"E({x},{z}) basis {i}: {exc}"))
        return problems
