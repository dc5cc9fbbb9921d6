"""Categories whose objects are chosen modules over a base path category.

Hom spaces, composition tables and identification of arbitrary modules
against the chosen object list are computed here once and shared by the
abelian and stable backends.
"""

from __future__ import annotations

import random

from ..category import BlockMorphism, CategoryError, FiniteLinearCategory, Mor
from ..exactlin import Mat, rank
from ..modules import (
    FpModule,
    ModuleMap,
    combine,
    coords_in_basis,
    decompose_with_maps,
    find_isomorphism,
    is_isomorphic_indec,
    hom_module,
    identity_map,
    map_flat_coords,
    zero_map,
)


class HomCategory:
    """add(M_1, ..., M_r) presented as a FiniteLinearCategory.

    hom_space_basis may be overridden (the stable backend quotients by
    maps factoring through projectives); by default it is the full hom.
    """

    def __init__(self, base: FiniteLinearCategory, objects: dict, rng: random.Random):
        self.base = base
        self.objects = dict(objects)  # label -> FpModule over base
        self.rng = rng
        self.labels = tuple(sorted(self.objects))
        self._hom_bases: dict = {}
        self._sum_cache: dict = {}
        self._identify_cache: dict = {}
        self.cat = self._build_cat()

    # -- hom spaces -----------------------------------------------------
    def raw_hom_basis(self, x: str, y: str) -> list:
        return hom_module(self.objects[x], self.objects[y])

    def hom_basis(self, x: str, y: str) -> list:
        """Basis of the hom space used by the presented category.

        Identity-first normalization on endomorphism spaces keeps forced
        keys detectable downstream.
        """
        if (x, y) not in self._hom_bases:
            basis = self.normalized_basis(x, y)
            self._hom_bases[(x, y)] = basis
        return self._hom_bases[(x, y)]

    def normalized_basis(self, x: str, y: str) -> list:
        basis = self.raw_hom_basis(x, y)
        if x != y or not basis:
            return basis
        f = self.base.field
        ident = identity_map(self.objects[x])
        chosen = [ident]
        rows = [map_flat_coords(ident)]
        for b in basis:
            cand = rows + [map_flat_coords(b)]
            if rank(Mat.from_rows(f, cand)) > len(rows):
                rows.append(map_flat_coords(b))
                chosen.append(b)
        return chosen

    def _build_cat(self) -> FiniteLinearCategory:
        f = self.base.field
        hom_dims = {}
        comp = {}
        identities = {}
        names = {}
        bases = {}
        for x in self.labels:
            for y in self.labels:
                bases[(x, y)] = self.hom_basis(x, y)
                hom_dims[(x, y)] = len(bases[(x, y)])
        for x in self.labels:
            d = hom_dims[(x, x)]
            identities[x] = tuple(
                f.one if i == 0 else f.zero for i in range(d)
            )
        for (x, y), fb in bases.items():
            for (y2, z), gb in bases.items():
                if y2 != y:
                    continue
                for j, fm in enumerate(fb):
                    for i, gm in enumerate(gb):
                        comp_map = self.compose_reps(gm, fm)
                        coords = self.coords_in_hom(x, z, comp_map)
                        comp[((y, z, i), (x, y, j))] = tuple(coords)
        return FiniteLinearCategory(f, self.labels, hom_dims, comp, identities, names)

    # hooks for subclasses ------------------------------------------------
    def compose_reps(self, g: ModuleMap, f: ModuleMap) -> ModuleMap:
        return g.compose(f)

    def coords_in_hom(self, x: str, z: str, mp: ModuleMap) -> list:
        basis = self.hom_basis(x, z)
        if not basis:
            return []
        c = coords_in_basis(basis, mp)
        if c is None:
            raise CategoryError("composite escaped the hom space")
        return c

    # -- morphism conversion ----------------------------------------------
    def sum_module(self, fo: tuple) -> FpModule:
        if fo not in self._sum_cache:
            if not fo:
                self._sum_cache[fo] = FpModule.zero(self.base)
            else:
                m = self.objects[fo[0]]
                for l in fo[1:]:
                    m = m.direct_sum(self.objects[l])
                self._sum_cache[fo] = m
        return self._sum_cache[fo]

    def summand_offsets(self, fo: tuple) -> dict:
        offs = {}
        acc = {x: 0 for x in self.base.objects}
        for pos, l in enumerate(fo):
            offs[pos] = dict(acc)
            for x in self.base.objects:
                acc[x] += self.objects[l].dim(x)
        return offs

    def inclusion(self, fo: tuple, pos: int) -> ModuleMap:
        f = self.base.field
        total = self.sum_module(fo)
        piece = self.objects[fo[pos]]
        offs = self.summand_offsets(fo)[pos]
        mats = {}
        for x in self.base.objects:
            rows = total.dim(x)
            cols = piece.dim(x)
            mats[x] = Mat(
                f, rows, cols,
                [f.one if i == offs[x] + j else f.zero for i in range(rows) for j in range(cols)],
            )
        return ModuleMap(piece, total, mats)

    def projection(self, fo: tuple, pos: int) -> ModuleMap:
        f = self.base.field
        total = self.sum_module(fo)
        piece = self.objects[fo[pos]]
        offs = self.summand_offsets(fo)[pos]
        mats = {}
        for x in self.base.objects:
            rows = piece.dim(x)
            cols = total.dim(x)
            mats[x] = Mat(
                f, rows, cols,
                [f.one if offs[x] + i == j else f.zero for i in range(rows) for j in range(cols)],
            )
        return ModuleMap(total, piece, mats)

    def mor_to_map(self, m: Mor) -> ModuleMap:
        basis = self.hom_basis(m.src, m.tgt)
        if not basis:
            return zero_map(self.objects[m.src], self.objects[m.tgt])
        f = self.base.field
        if all(c == f.zero for c in m.coords):
            return zero_map(self.objects[m.src], self.objects[m.tgt])
        return combine(basis, m.coords)

    def block_to_map(self, phi: BlockMorphism) -> ModuleMap:
        f = self.base.field
        src = self.sum_module(phi.src)
        tgt = self.sum_module(phi.tgt)
        out = zero_map(src, tgt)
        for i in range(len(phi.tgt)):
            inc = self.inclusion(phi.tgt, i)
            for j in range(len(phi.src)):
                ent = phi.entry(i, j)
                if ent.is_zero():
                    continue
                proj = self.projection(phi.src, j)
                piece = inc.compose(self.mor_to_map(ent).compose(proj))
                out = out.add(piece)
        return out

    def map_to_block(self, fo_src: tuple, fo_tgt: tuple, mp: ModuleMap) -> BlockMorphism:
        rows = []
        for i in range(len(fo_tgt)):
            proj = self.projection(fo_tgt, i)
            row = []
            for j in range(len(fo_src)):
                inc = self.inclusion(fo_src, j)
                comp = proj.compose(mp).compose(inc)
                coords = self.coords_in_hom(fo_src[j], fo_tgt[i], comp)
                row.append(Mor(fo_src[j], fo_tgt[i], tuple(coords)))
            rows.append(tuple(row))
        return BlockMorphism(fo_src, fo_tgt, tuple(rows))

    # -- identification ----------------------------------------------------
    def identify(self, module: FpModule, allow_drop=None):
        """Match a module against the object list up to isomorphism.

        Returns (fo, section, retraction) where section: sum_module(fo) ->
        module and retraction: module -> sum_module(fo) satisfy
        retraction ∘ section = id.  Summands accepted by allow_drop are
        omitted from fo (the stable backend drops projectives); without
        drops, section is an isomorphism.
        """
        ck = (module.key(), allow_drop is not None)
        hit = self._identify_cache.get(ck)
        if hit is not None:
            fo, section, retraction = hit
            if section.tgt is not module:
                section = ModuleMap(section.src, module, section.mats)
                retraction = ModuleMap(module, retraction.tgt, retraction.mats)
            return fo, section, retraction
        fast = self._identify_fast(module, allow_drop)
        if fast is not None:
            self._identify_cache[ck] = fast
            return fast
        parts = decompose_with_maps(module, self.rng)
        labels = []
        pieces = []
        for part, inc, proj in parts:
            if allow_drop is not None and allow_drop(part):
                continue
            found = None
            for lbl in self.labels:
                if not is_isomorphic_indec(self.objects[lbl], part):
                    continue
                iso = find_isomorphism(self.objects[lbl], part, self.rng)
                if iso is None:
                    raise CategoryError(f"iso witness search failed for label {lbl}")
                found = (lbl, iso)
                break
            if found is None:
                raise CategoryError(
                    f"module with dims {module.dims} has a summand outside the object list"
                )
            labels.append(found[0])
            pieces.append((inc, proj, found[1]))
        fo = tuple(labels)
        total = self.sum_module(fo)
        section = zero_map(total, module)
        retraction = zero_map(module, total)
        for pos, (inc, proj, iso) in enumerate(pieces):
            section = section.add(inc.compose(iso).compose(self.projection(fo, pos)))
            retraction = retraction.add(
                self.inclusion(fo, pos).compose(iso.inverse()).compose(proj)
            )
        self._identify_cache[ck] = (fo, section, retraction)
        return fo, section, retraction

    def _candidate_fos(self, dims: dict):
        """Formal objects over the object list with the given dim vector."""
        labels = list(self.labels)

        def rec(remaining, start):
            if all(v == 0 for v in remaining.values()):
                yield ()
                return
            for i in range(start, len(labels)):
                od = self.objects[labels[i]].dims
                if all(remaining.get(x, 0) >= od.get(x, 0) for x in remaining) and any(
                    od.get(x, 0) for x in remaining
                ):
                    nxt = {x: remaining[x] - od.get(x, 0) for x in remaining}
                    for rest in rec(nxt, i):
                        yield (labels[i],) + rest

        yield from rec(dict(dims), 0)

    def _identify_fast(self, module: FpModule, allow_drop):
        """Direct isomorphism guesses by dimension vector; None on miss.

        Only used when no summand may be dropped: a dropped part changes
        the dimension vector, which the fallback handles.
        """
        if allow_drop is not None:
            return None
        if module.is_zero():
            Z = self.sum_module(())
            return (), zero_map(Z, module), zero_map(module, Z)
        dims = {x: module.dim(x) for x in self.base.objects}
        for cand in self._candidate_fos(dims):
            total = self.sum_module(cand)
            iso = find_isomorphism(total, module, self.rng, tries=40)
            if iso is not None:
                return cand, iso, iso.inverse()
        return None
