"""Cotorsion pairs in a triangulated backend, their hearts, reflection
and coreflection triangles, the cohomological functor, and the
certificate comparing the heart with left-exact functors.

The triangulated backend must provide shift_object / unshift_object,
shift_mor / unshift_mor and cone_data on block morphisms; the stable and
table backends both do.
"""

from __future__ import annotations

import itertools
import random

from .category import BlockMorphism, Mor, block_compose, formal_object
from .defloc import DeflocEngine, Verdict
from .exactlin import Mat, rank, solve
from .extri.base import Caps, ExtriError
from .extri.subcat import SubcategoryBackend
from .modules import (
    FpModule,
    ModuleMap,
    cokernel,
    composition_factors,
    decompose,
    factor_through_cokernel,
    hom_module,
    is_isomorphic_indec,
    kernel,
    yoneda,
    zero_map,
)


class HeartError(RuntimeError):
    pass


class CotorsionPair:
    def __init__(self, U: tuple, V: tuple):
        self.U = tuple(sorted(U))
        self.V = tuple(sorted(V))
        self.W = tuple(sorted(set(self.U) & set(self.V)))

    def key(self):
        return (self.U, self.V)

    def describe(self):
        return {"U": list(self.U), "V": list(self.V), "W": list(self.W)}


class HeartEngine:
    def __init__(self, backend):
        if not backend.every_morphism_conflates():
            raise HeartError("heart machinery needs a triangulated backend")
        self.backend = backend
        self.cat = backend.cat
        self.caps = backend.caps
        self.rng = random.Random(backend.caps.seed + 2)
        self._ideal_cache: dict = {}
        self._decomp_witness: dict = {}
        self._refl_cache: dict = {}
        self._corefl_cache: dict = {}

    # ---- morphism spaces and the [W] ideal -----------------------------
    def hom_points(self, src_fo: tuple, tgt_fo: tuple):
        """(coordinate tuples, exhaustive) for Hom(src_fo, tgt_fo)."""
        f = self.cat.field
        d = sum(self.cat.hom_dim(s, t) for s in src_fo for t in tgt_fo)
        if d == 0:
            return [()], True
        if f.kind == "prime" and f.p**d <= self.caps.enum_bound:
            return [tuple(c) for c in itertools.product(range(f.p), repeat=d)], True
        pts = [tuple(f.zero for _ in range(d))]
        for i in range(d):
            pts.append(tuple(f.one if j == i else f.zero for j in range(d)))
        for _ in range(self.caps.samples):
            pts.append(tuple(f.rand(self.rng) for _ in range(d)))
        return pts, False

    def block_from_coords(self, src_fo: tuple, tgt_fo: tuple, coords: tuple) -> BlockMorphism:
        f = self.cat.field
        rows = []
        off = 0
        grid = {}
        for j, s in enumerate(src_fo):
            for i, t in enumerate(tgt_fo):
                d = self.cat.hom_dim(s, t)
                grid[(i, j)] = Mor(s, t, tuple(coords[off : off + d]))
                off += d
        for i, t in enumerate(tgt_fo):
            rows.append(tuple(grid[(i, j)] for j, s in enumerate(src_fo)))
        return BlockMorphism(src_fo, tgt_fo, tuple(rows))

    def ideal_span(self, x: str, y: str, through: tuple) -> Mat:
        """Rows spanning the subspace of Hom(x, y) factoring through add(through)."""
        key = (x, y, tuple(sorted(through)))
        if key in self._ideal_cache:
            return self._ideal_cache[key]
        f = self.cat.field
        rows = []
        for w in through:
            for a in range(self.cat.hom_dim(x, w)):
                am = self.cat.basis_mor((x, w, a))
                for b in range(self.cat.hom_dim(w, y)):
                    bm = self.cat.basis_mor((w, y, b))
                    rows.append(self.cat.compose_mor(bm, am).coords)
        m = Mat.from_rows(f, rows) if rows else Mat(f, 0, self.cat.hom_dim(x, y), [])
        self._ideal_cache[key] = m
        return m

    def quotient_hom_dim(self, x: str, y: str, through: tuple) -> int:
        return self.cat.hom_dim(x, y) - rank(self.ideal_span(x, y, through))

    def in_ideal(self, m: Mor, through: tuple) -> bool:
        from .algebra import solve_coords

        span = self.ideal_span(m.src, m.tgt, through)
        return solve_coords(span, m.coords) is not None

    def block_in_ideal(self, b: BlockMorphism, through: tuple) -> bool:
        return all(self.in_ideal(m, through) for row in b.blocks for m in row)

    # ---- cotorsion pairs -------------------------------------------------
    def hom_vanishing(self, U: tuple, V: tuple):
        for u in U:
            for v in V:
                if self.cat.hom_dim(u, self.backend.shift_object(v)):
                    return (u, v)
        return None

    def decomposition_witness(self, x: str, U: tuple, V: tuple):
        """Triangle U' -> x -> V'[1] via f: x -> V'[1] with cone(f)[-1] in add U."""
        key = (x, tuple(sorted(U)), tuple(sorted(V)))
        if key in self._decomp_witness:
            return self._decomp_witness[key]
        result = None
        exhaustive = True
        vshift = [self.backend.shift_object(v) for v in V]
        # candidate targets: multiplicities bounded by dim Hom(x, v[1])
        ranges = [range(min(self.caps.mult, self.cat.hom_dim(x, sv)) + 1) for sv in vshift]
        for counts in itertools.product(*ranges):
            tgt = []
            for v, c in zip(V, counts):
                tgt.extend([v] * c)
            tgt_fo = tuple(tgt)
            tgt_shift = tuple(self.backend.shift_object(v) for v in tgt_fo)
            pts, exh = self.hom_points((x,), tgt_shift)
            exhaustive = exhaustive and exh
            for coords in pts:
                fblock = self.block_from_coords((x,), tgt_shift, coords)
                cone_fo, q, r = self.backend.cone_data(fblock)
                upart = tuple(self.backend.unshift_object(c) for c in cone_fo)
                if all(l in U for l in upart):
                    result = {
                        "object": x,
                        "v_part": list(tgt_fo),
                        "u_part": list(upart),
                        "map_coords": [str(c) for c in coords],
                    }
                    break
            if result:
                break
        self._decomp_witness[key] = (result, exhaustive)
        return result, exhaustive

    def is_cotorsion_pair(self, U: tuple, V: tuple) -> Verdict:
        U, V = tuple(sorted(U)), tuple(sorted(V))
        bad = self.hom_vanishing(U, V)
        if bad:
            return Verdict(False, True, {"hom_nonzero": list(bad)})
        witnesses = {}
        exhaustive = True
        for x in self.cat.objects:
            wit, exh = self.decomposition_witness(x, U, V)
            exhaustive = exhaustive and exh
            if wit is None:
                return Verdict(False, exhaustive, {"no_decomposition": x})
            witnesses[x] = wit
        return Verdict(True, exhaustive, {"decompositions": witnesses})

    def enumerate_cotorsion_pairs(self) -> list:
        n = len(self.cat.objects)
        if n > 12:
            raise HeartError("cotorsion enumeration guard: more than 12 objects")
        out = []
        seen = set()
        for bits in itertools.product((0, 1), repeat=n):
            U = tuple(x for x, b in zip(self.cat.objects, bits) if b)
            V = tuple(
                x
                for x in self.cat.objects
                if all(self.cat.hom_dim(u, self.backend.shift_object(x)) == 0 for u in U)
            )
            pair = CotorsionPair(U, V)
            if pair.key() in seen:
                continue
            v = self.is_cotorsion_pair(pair.U, pair.V)
            if v:
                seen.add(pair.key())
                out.append((pair, v))
        return out

    # ---- star and the heart ------------------------------------------------
    def star(self, A: tuple, B: tuple) -> tuple:
        """Indecomposables among summands of middle terms of A * B triangles."""
        found = set()
        for a in A:
            found.add(a)
        for b in B:
            found.add(b)
        bm = tuple(self.backend.unshift_object(b) for b in B)
        ranges_a = [range(self.caps.mult + 1) for _ in A]
        ranges_b = [range(self.caps.mult + 1) for _ in bm]
        for ca in itertools.product(*ranges_a):
            afo = []
            for a, c in zip(A, ca):
                afo.extend([a] * c)
            for cb in itertools.product(*ranges_b):
                bfo = []
                for b, c in zip(bm, cb):
                    bfo.extend([b] * c)
                if not afo and not bfo:
                    continue
                pts, _ = self.hom_points(tuple(bfo), tuple(afo))
                for coords in pts:
                    h = self.block_from_coords(tuple(bfo), tuple(afo), coords)
                    cone_fo, _, _ = self.backend.cone_data(h)
                    for l in cone_fo:
                        found.add(l)
        return tuple(sorted(found & set(self.cat.objects)))

    def heart_presentation(self, pair: CotorsionPair) -> dict:
        W = pair.W
        vshift = tuple(self.backend.shift_object(v) for v in pair.V)
        umshift = tuple(self.backend.unshift_object(u) for u in pair.U)
        tplus = self.star(W, vshift)
        tminus = self.star(umshift, W)
        h = tuple(sorted(set(tplus) & set(tminus)))
        heart_objects = tuple(l for l in h if l not in W)
        hom_table = {}
        for x in h:
            for y in h:
                hom_table[(x, y)] = self.quotient_hom_dim(x, y, W)
        return {
            "tplus": tplus,
            "tminus": tminus,
            "h": h,
            "heart_objects": heart_objects,
            "hom_dims": hom_table,
            "pair": pair,
        }

    # ---- reflections ------------------------------------------------------------
    def reflection(self, x: str, pair: CotorsionPair, heart: dict) -> dict:
        """Reflection data for an indecomposable x."""
        ck = (x, pair.key())
        if ck in self._refl_cache:
            return self._refl_cache[ck]
        f = self.cat.field
        tplus = heart["tplus"]
        exhaustive = True
        for counts in itertools.product(
            *[range(min(self.caps.mult, max(self.cat.hom_dim(x, t), 1)) + 1) for t in tplus]
        ):
            tgt = []
            for t, c in zip(tplus, counts):
                tgt.extend([t] * c)
            tgt_fo = tuple(tgt)
            pts, exh = self.hom_points((x,), tgt_fo)
            exhaustive = exhaustive and exh
            for coords in pts:
                alpha = self.block_from_coords((x,), tgt_fo, coords)
                cone_fo, q, r = self.backend.cone_data(alpha)
                if any(l not in pair.U for l in cone_fo):
                    continue
                # the triangle leg U'[-1] -> x must factor through add U
                leg_ok = True
                for j in range(len((x,))):
                    for i, c_lab in enumerate(cone_fo):
                        ent = r.entry(j, i)
                        neg = Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords))
                        um = self.backend.unshift_mor(neg)
                        if not self.in_ideal(um, pair.U):
                            leg_ok = False
                if not leg_ok:
                    continue
                if not self._adjunction_ok(x, tgt_fo, alpha, heart, side="plus"):
                    continue
                out = {
                    "object": x,
                    "target": tgt_fo,
                    "alpha": alpha,
                    "cone": cone_fo,
                    "exhaustive": exhaustive,
                }
                self._refl_cache[ck] = out
                return out
        raise HeartError(f"reflection not found (caps) for {x}")

    def coreflection(self, x: str, pair: CotorsionPair, heart: dict) -> dict:
        ck = (x, pair.key())
        if ck in self._corefl_cache:
            return self._corefl_cache[ck]
        f = self.cat.field
        tminus = heart["tminus"]
        for counts in itertools.product(
            *[range(min(self.caps.mult, max(self.cat.hom_dim(t, x), 1)) + 1) for t in tminus]
        ):
            src = []
            for t, c in zip(tminus, counts):
                src.extend([t] * c)
            src_fo = tuple(src)
            pts, _ = self.hom_points(src_fo, (x,))
            for coords in pts:
                alpha = self.block_from_coords(src_fo, (x,), coords)
                cone_fo, q, r = self.backend.cone_data(alpha)
                vpart = tuple(self.backend.unshift_object(c) for c in cone_fo)
                if any(l not in pair.V for l in vpart):
                    continue
                # connecting x -> V'[1] must factor through add V
                leg_ok = all(
                    self.in_ideal(q.entry(i, 0), pair.V) for i in range(len(cone_fo))
                )
                if not leg_ok:
                    continue
                if not self._adjunction_ok(x, src_fo, alpha, heart, side="minus"):
                    continue
                out = {"object": x, "source": src_fo, "alpha": alpha, "cone": cone_fo}
                self._corefl_cache[ck] = out
                return out
        raise HeartError(f"coreflection not found (caps) for {x}")

    def _adjunction_ok(self, x: str, other_fo: tuple, alpha: BlockMorphism, heart: dict, side: str) -> bool:
        """Composition with alpha is bijective modulo [W] against T^± tests."""
        pair: CotorsionPair = heart["pair"]
        W = pair.W
        f = self.cat.field
        probes = heart["tplus"] if side == "plus" else heart["tminus"]
        for h2 in probes:
            if side == "plus":
                # Hom(target, h2)/[W] -> Hom(x, h2)/[W]
                rows = []
                for i, t in enumerate(other_fo):
                    for b in range(self.cat.hom_dim(t, h2)):
                        bm = self.cat.basis_mor((t, h2, b))
                        comp = self.cat.compose_mor(bm, alpha.entry(i, 0))
                        rows.append((t, bm, comp))
                src_dim = sum(self.quotient_hom_dim(t, h2, W) for t in other_fo)
                tgt_dim = self.quotient_hom_dim(x, h2, W)
                mat_rows = [self._quotient_coords(c.coords, x, h2, W) for (_, _, c) in rows]
                # quotient the source side too
                full_rank = rank(Mat.from_rows(f, mat_rows)) if mat_rows else 0
                ideal_rows = []
                for i, t in enumerate(other_fo):
                    span = self.ideal_span(t, h2, W)
                    for rr in range(span.rows):
                        bm = Mor(t, h2, tuple(span.row(rr)))
                        comp = self.cat.compose_mor(bm, alpha.entry(i, 0))
                        ideal_rows.append(self._quotient_coords(comp.coords, x, h2, W))
                if any(any(c != f.zero for c in r) for r in ideal_rows):
                    return False
                if full_rank != src_dim or src_dim != tgt_dim:
                    return False
            else:
                rows = []
                for i, t in enumerate(other_fo):
                    for b in range(self.cat.hom_dim(h2, t)):
                        bm = self.cat.basis_mor((h2, t, b))
                        comp = self.cat.compose_mor(alpha.entry(0, i), bm)
                        rows.append(comp)
                src_dim = sum(self.quotient_hom_dim(h2, t, W) for t in other_fo)
                tgt_dim = self.quotient_hom_dim(h2, x, W)
                mat_rows = [self._quotient_coords(c.coords, h2, x, W) for c in rows]
                full_rank = rank(Mat.from_rows(f, mat_rows)) if mat_rows else 0
                ideal_rows = []
                for i, t in enumerate(other_fo):
                    span = self.ideal_span(h2, t, W)
                    for rr in range(span.rows):
                        bm = Mor(h2, t, tuple(span.row(rr)))
                        comp = self.cat.compose_mor(alpha.entry(0, i), bm)
                        ideal_rows.append(self._quotient_coords(comp.coords, h2, x, W))
                if any(any(c != f.zero for c in r) for r in ideal_rows):
                    return False
                if full_rank != src_dim or src_dim != tgt_dim:
                    return False
        return True

    def _quotient_basis(self, x: str, y: str, W: tuple):
        """(ideal rows, completion rows) spanning Hom(x, y)."""
        key = ("qb", x, y, tuple(sorted(W)))
        if key in self._ideal_cache:
            return self._ideal_cache[key]
        f = self.cat.field
        span = self.ideal_span(x, y, W)
        d = self.cat.hom_dim(x, y)
        rows = [list(span.row(i)) for i in range(span.rows)]
        chosen = []
        for e in range(d):
            cand = [f.one if i == e else f.zero for i in range(d)]
            base = Mat.from_rows(f, rows + chosen) if (rows or chosen) else Mat(f, 0, d, [])
            withc = Mat.from_rows(f, rows + chosen + [cand])
            if rank(withc) > rank(base):
                chosen.append(cand)
        self._ideal_cache[key] = (rows, chosen)
        return rows, chosen

    def _quotient_coords(self, coords: tuple, x: str, y: str, W: tuple) -> list:
        """Coordinates in a complement of [W](x, y) inside Hom(x, y)."""
        f = self.cat.field
        rows, chosen = self._quotient_basis(x, y, W)
        if not rows and not chosen:
            return []
        basis_m = Mat.from_rows(f, rows + chosen)
        from .algebra import solve_coords

        sol = solve_coords(basis_m, coords)
        if sol is None:
            raise HeartError("coordinates escaped the hom space")
        return sol[len(rows) :]

    # ---- cohomology -----------------------------------------------------------
    def reflection_fo(self, fo: tuple, pair: CotorsionPair, heart: dict):
        """Componentwise reflection of a formal object: (target fo, alpha block)."""
        datas = [self.reflection(x, pair, heart) for x in fo]
        tgt = tuple(l for d in datas for l in d["target"])
        rows = []
        toff = 0
        grid = {}
        for j, d in enumerate(datas):
            for i, l in enumerate(d["target"]):
                grid[(toff + i, j)] = d["alpha"].entry(i, 0)
            toff += len(d["target"])
        out_rows = []
        for i, t in enumerate(tgt):
            row = []
            for j, s in enumerate(fo):
                row.append(grid.get((i, j), self.cat.zero_mor(s, t)))
            out_rows.append(tuple(row))
        return tgt, BlockMorphism(fo, tgt, tuple(out_rows))

    def coreflection_fo(self, fo: tuple, pair: CotorsionPair, heart: dict):
        datas = [self.coreflection(x, pair, heart) for x in fo]
        src = tuple(l for d in datas for l in d["source"])
        grid = {}
        soff = 0
        for j, d in enumerate(datas):
            for i, l in enumerate(d["source"]):
                grid[(j, soff + i)] = d["alpha"].entry(0, i)
            soff += len(d["source"])
        out_rows = []
        for i, t in enumerate(fo):
            row = []
            for j, s in enumerate(src):
                row.append(grid.get((i, j), self.cat.zero_mor(s, t)))
            out_rows.append(tuple(row))
        return src, BlockMorphism(src, fo, tuple(out_rows))

    def cohomology_object(self, x: str, pair: CotorsionPair, heart: dict):
        """H(x) = coreflection target of the reflection of x, as a heart object."""
        refl = self.reflection(x, pair, heart)
        xplus = refl["target"]
        src, beta = self.coreflection_fo(xplus, pair, heart)
        kept = tuple(l for l in src if l not in pair.W)
        return {
            "object": x,
            "xplus": xplus,
            "xpm": src,
            "heart_class": tuple(sorted(kept)),
            "alpha": refl["alpha"],
            "beta": beta,
        }

    def _lift_through(self, alpha_src: BlockMorphism, alpha_tgt: BlockMorphism, c: BlockMorphism, W: tuple):
        """Solve alpha_tgt ∘ c = c' ∘ alpha_src modulo [W] for c'.

        alpha_src: X -> X', alpha_tgt: Y -> Y', c: X -> Y; returns c': X' -> Y'.
        """
        f = self.cat.field
        rhs = block_compose(self.cat, alpha_tgt, c)
        src_fo, tgt_fo = alpha_src.tgt, alpha_tgt.tgt
        # unknowns: coordinates of c' entries; equations: c' ∘ alpha_src = rhs mod [W]
        unknown_shapes = []
        for i, t in enumerate(tgt_fo):
            for j, s in enumerate(src_fo):
                unknown_shapes.append((i, j, s, t, self.cat.hom_dim(s, t)))
        total = sum(sh[4] for sh in unknown_shapes)
        rows = []
        rhs_vals = []
        for i, t in enumerate(tgt_fo):
            for j0, s0 in enumerate(alpha_src.src):
                # entry (i, j0) of c' ∘ alpha_src: sum_j c'[i, j] ∘ alpha_src[j, j0]
                target_mor = rhs.entry(i, j0)
                qrows, qchosen = self._quotient_basis(s0, t, W)
                # project the equation to the quotient coordinates
                dim_q = len(qchosen)
                if dim_q == 0:
                    continue
                coeff_rows = [[f.zero] * total for _ in range(dim_q)]
                off = 0
                for (i2, j2, s, t2, d) in unknown_shapes:
                    if i2 == i and d:
                        a_ent = alpha_src.entry(j2, j0)
                        if not a_ent.is_zero():
                            for b in range(d):
                                bm = self.cat.basis_mor((s, t2, b))
                                comp = self.cat.compose_mor(bm, a_ent)
                                qc = self._quotient_coords(comp.coords, s0, t, W)
                                for r_i in range(dim_q):
                                    coeff_rows[r_i][off + b] = f.add(
                                        coeff_rows[r_i][off + b], qc[r_i]
                                    )
                    off += d
                tq = self._quotient_coords(target_mor.coords, s0, t, W)
                for r_i in range(dim_q):
                    rows.append(coeff_rows[r_i])
                    rhs_vals.append(tq[r_i])
        if rows:
            A = Mat.from_rows(f, rows)
            b = Mat(f, len(rhs_vals), 1, rhs_vals)
            sol = solve(A, b)
            if sol is None:
                raise HeartError("no lift through the reflection")
            vec = [sol[i, 0] for i in range(sol.rows)]
        else:
            vec = [f.zero] * total
        grid = {}
        off = 0
        for (i, j, s, t, d) in unknown_shapes:
            grid[(i, j)] = Mor(s, t, tuple(vec[off : off + d]))
            off += d
        out_rows = []
        for i, t in enumerate(tgt_fo):
            out_rows.append(tuple(grid[(i, j)] for j, s in enumerate(src_fo)))
        return BlockMorphism(src_fo, tgt_fo, tuple(out_rows))

    def cohomology_map(self, c: BlockMorphism, pair: CotorsionPair, heart: dict):
        """H on a morphism: lift through reflections then coreflections."""
        src_data = [self.cohomology_object(x, pair, heart) for x in c.src]
        tgt_data = [self.cohomology_object(x, pair, heart) for x in c.tgt]
        splus, alpha_s = self.reflection_fo(c.src, pair, heart)
        tplus, alpha_t = self.reflection_fo(c.tgt, pair, heart)
        cplus = self._lift_through(alpha_s, alpha_t, c, pair.W)
        spm, beta_s = self.coreflection_fo(splus, pair, heart)
        tpm, beta_t = self.coreflection_fo(tplus, pair, heart)
        # lift against coreflections: solve beta_t ∘ cpm = cplus ∘ beta_s mod [W]
        cpm = self._lift_back(beta_s, beta_t, cplus, pair.W)
        return {"src_pm": spm, "tgt_pm": tpm, "map": cpm}

    def _lift_back(self, beta_s: BlockMorphism, beta_t: BlockMorphism, c: BlockMorphism, W: tuple):
        """Solve beta_t ∘ c' = c ∘ beta_s modulo [W] for c': src_pm -> tgt_pm."""
        f = self.cat.field
        rhs = block_compose(self.cat, c, beta_s)
        src_fo, tgt_fo = beta_s.src, beta_t.src
        unknown_shapes = []
        for i, t in enumerate(tgt_fo):
            for j, s in enumerate(src_fo):
                unknown_shapes.append((i, j, s, t, self.cat.hom_dim(s, t)))
        total = sum(sh[4] for sh in unknown_shapes)
        rows = []
        rhs_vals = []
        for i0, t0 in enumerate(beta_t.tgt):
            for j, s in enumerate(src_fo):
                target_mor = rhs.entry(i0, j)
                qrows, qchosen = self._quotient_basis(s, t0, W)
                dim_q = len(qchosen)
                if dim_q == 0:
                    continue
                coeff_rows = [[f.zero] * total for _ in range(dim_q)]
                off = 0
                for (i2, j2, s2, t2, d) in unknown_shapes:
                    if j2 == j and d:
                        b_ent = beta_t.entry(i0, i2)
                        if not b_ent.is_zero():
                            for b in range(d):
                                bm = self.cat.basis_mor((s2, t2, b))
                                comp = self.cat.compose_mor(b_ent, bm)
                                qc = self._quotient_coords(comp.coords, s, t0, W)
                                for r_i in range(dim_q):
                                    coeff_rows[r_i][off + b] = f.add(
                                        coeff_rows[r_i][off + b], qc[r_i]
                                    )
                    off += d
                tq = self._quotient_coords(target_mor.coords, s, t0, W)
                for r_i in range(dim_q):
                    rows.append(coeff_rows[r_i])
                    rhs_vals.append(tq[r_i])
        if rows:
            A = Mat.from_rows(f, rows)
            b = Mat(f, len(rhs_vals), 1, rhs_vals)
            sol = solve(A, b)
            if sol is None:
                raise HeartError("no lift through the coreflection")
            vec = [sol[i, 0] for i in range(sol.rows)]
        else:
            vec = [f.zero] * total
        grid = {}
        off = 0
        for (i, j, s, t, d) in unknown_shapes:
            grid[(i, j)] = Mor(s, t, tuple(vec[off : off + d]))
            off += d
        out_rows = []
        for i, t in enumerate(tgt_fo):
            out_rows.append(tuple(grid[(i, j)] for j, s in enumerate(src_fo)))
        return BlockMorphism(src_fo, tgt_fo, tuple(out_rows))

    # ---- the localization side ------------------------------------------------
    def u_shifted_labels(self, pair: CotorsionPair) -> tuple:
        return tuple(sorted(self.backend.unshift_object(u) for u in pair.U))

    def sub_engine(self, pair: CotorsionPair) -> DeflocEngine:
        labels = self.u_shifted_labels(pair)
        sub = SubcategoryBackend(self.backend, labels, self.caps)
        return DeflocEngine(sub)

    def restricted_yoneda(self, fo: tuple, labels: tuple, subcat) -> FpModule:
        """(-, fo) restricted to the given subcategory labels."""
        f = self.cat.field
        dims = {u: sum(self.cat.hom_dim(u, l) for l in fo) for u in labels}
        action = {}
        for k in subcat.all_basis_keys():
            x, y, _ = k
            u = subcat.basis_mor(k)
            colvecs = []
            for pos, l in enumerate(fo):
                for j in range(self.cat.hom_dim(y, l)):
                    g = self.cat.basis_mor((y, l, j))
                    comp = self.cat.compose_mor(g, Mor(x, y, u.coords))
                    vec = []
                    for pos2, l2 in enumerate(fo):
                        if pos2 == pos:
                            vec.extend(comp.coords)
                        else:
                            vec.extend([f.zero] * self.cat.hom_dim(x, l2))
                    colvecs.append(vec)
            action[k] = (
                Mat(f, dims[x], dims[y], [colvecs[j][i] for i in range(dims[x]) for j in range(len(colvecs))])
                if colvecs
                else Mat(f, dims[x], dims[y], [f.zero] * (dims[x] * dims[y]))
            )
        return FpModule(subcat, dims, action)

    def psi_image(self, fo: tuple, defloc_sub: DeflocEngine, sigma: tuple) -> FpModule:
        ry = self.restricted_yoneda(fo, defloc_sub.cat.objects, defloc_sub.cat)
        return defloc_sub.restrict_module(ry, sigma)

    def psi_on_basis(self, x: str, y: str, defloc_sub: DeflocEngine, sigma: tuple):
        """Matrices of Hom_T(x, y) basis under the restricted-Yoneda functor."""
        out = []
        for b in range(self.cat.hom_dim(x, y)):
            m = self.cat.basis_mor((x, y, b))
            src = self.restricted_yoneda((x,), defloc_sub.cat.objects, defloc_sub.cat)
            tgt = self.restricted_yoneda((y,), defloc_sub.cat.objects, defloc_sub.cat)
            mats = {}
            for u in defloc_sub.cat.objects:
                cols = []
                for j in range(self.cat.hom_dim(u, x)):
                    h = self.cat.basis_mor((u, x, j))
                    cols.append(self.cat.compose_mor(m, h).coords)
                f = self.cat.field
                mats[u] = (
                    Mat(f, tgt.dim(u), src.dim(u), [cols[j][i] for i in range(tgt.dim(u)) for j in range(len(cols))])
                    if cols
                    else Mat(f, tgt.dim(u), 0, [])
                )
            out.append(
                defloc_sub.restrict_map(ModuleMap(src, tgt, mats), sigma)
            )
        return out

    def verify_theorem_b(self, pair: CotorsionPair, heart: dict | None = None) -> dict:
        """Certificate for the heart/left-exact comparison."""
        if heart is None:
            heart = self.heart_presentation(pair)
        out = {"pair": pair.describe(), "heart_objects": list(heart["heart_objects"])}
        sub = self.sub_engine(pair)
        sigma = sub.def_simples()
        out["sub_sigma"] = list(sigma)
        W = pair.W
        checks = []
        # (i) left exactness of each restricted representable via the perp test
        for hlab in heart["h"]:
            mod = self.psi_image((hlab,), sub, sigma)
            full = self.restricted_yoneda((hlab,), sub.cat.objects, sub.cat)
            pt = sub.perp_test(full, sigma)
            lex = sub.is_left_exact(full)
            checks.append({
                "name": f"left-exact:(-,{hlab})",
                "pass": bool(pt) and bool(lex) and (bool(pt) == bool(lex)),
            })
        # (ii) full and faithful: quotient hom dims match and maps are bijective
        psis = {h: self.psi_image((h,), sub, sigma) for h in heart["h"]}
        ff_pass = True
        table = {}
        for x in heart["h"]:
            for y in heart["h"]:
                heart_dim = heart["hom_dims"][(x, y)]
                target_basis = hom_module(psis[x], psis[y])
                maps = self.psi_on_basis(x, y, sub, sigma)
                from .modules import coords_in_basis, map_flat_coords

                rows = []
                for mp in maps:
                    if target_basis:
                        c = coords_in_basis(target_basis, mp)
                        if c is None:
                            ff_pass = False
                            c = []
                    else:
                        c = []
                        if any(not mp.mats[u].is_zero() for u in sub.cat.objects):
                            ff_pass = False
                    rows.append(c)
                m = (
                    Mat.from_rows(self.cat.field, [r for r in rows if r])
                    if any(rows)
                    else Mat(self.cat.field, 0, len(target_basis), [])
                )
                image_rank = rank(m) if rows and target_basis else 0
                eae_dim = len(target_basis)
                # the ideal through W must map to zero (faithfulness direction)
                ideal_killed = True
                span = self.ideal_span(x, y, W)
                for rr in range(span.rows):
                    coords = span.row(rr)
                    combomats = {}
                    for u in sub.cat.objects:
                        acc = None
                        for bidx, cval in enumerate(coords):
                            if cval != self.cat.field.zero:
                                term = maps[bidx].mats[u].scale(cval)
                                acc = term if acc is None else acc + term
                        if acc is not None and not acc.is_zero():
                            ideal_killed = False
                ok = heart_dim == eae_dim and image_rank == heart_dim and ideal_killed
                table[f"{x}->{y}"] = {
                    "heart_dim": heart_dim,
                    "lex_dim": eae_dim,
                    "image_rank": image_rank,
                    "pass": ok,
                }
                if not ok:
                    ff_pass = False
        checks.append({"name": "full-faithful", "pass": ff_pass, "table": table})
        # (iii) density
        bound = max((psis[h].total_dim() for h in heart["h"]), default=0) + 2
        from .defloc import _QuotientIndecs

        qcat = sub.quotient_category(sigma)
        indecs = _QuotientIndecs(qcat, self.rng).enumerate(bound)
        images = []
        for h in heart["heart_objects"]:
            images.extend(decompose(psis[h], self.rng))
        dense = True
        object_map = []
        for N in indecs:
            hit = None
            for h in heart["heart_objects"]:
                for M in decompose(psis[h], self.rng):
                    if not M.is_zero() and is_isomorphic_indec(N, M):
                        hit = h
                        break
                if hit:
                    break
            object_map.append({"lex_dims": {k: v for k, v in N.dims.items()}, "heart_object": hit})
            if hit is None:
                dense = False
        checks.append({"name": "dense", "pass": dense, "bound": bound, "objects": object_map})
        out["checks"] = checks
        out["pass"] = all(c["pass"] for c in checks)
        return out

    def heart_vs_mod_p(self, pair: CotorsionPair, heart: dict | None = None) -> dict:
        if heart is None:
            heart = self.heart_presentation(pair)
        sub = self.sub_engine(pair)
        out = {"pair": pair.describe()}
        ep = sub.enough_projectives()
        out["enough_projectives"] = ep["ok"]
        if not ep["ok"]:
            out["status"] = "SKIPPED"
            return out
        projs = sub.projectives()
        out["projectives"] = list(projs)
        pcat = sub.cat.full_subcategory(projs)
        from .defloc import _QuotientIndecs

        indecs = _QuotientIndecs(pcat, self.rng).enumerate(
            max((yoneda(pcat, (p,)).total_dim() for p in projs), default=0) + 2
        )
        out["mod_p_indecomposables"] = len(indecs)
        out["heart_indecomposables"] = len(heart["heart_objects"])
        count_ok = len(indecs) == len(heart["heart_objects"])
        hom_ok = True
        # hom dimension comparison through the same matching as theorem B
        sigma = sub.def_simples()
        psis = {h: self.psi_image((h,), sub, sigma) for h in heart["heart_objects"]}
        for x in heart["heart_objects"]:
            for y in heart["heart_objects"]:
                if heart["hom_dims"][(x, y)] != len(hom_module(psis[x], psis[y])):
                    hom_ok = False
        out["status"] = "PASS" if (count_ok and hom_ok) else "FAIL"
        out["hom_dims_match"] = hom_ok
        return out

    # ---- the approximation sequence of the localization -------------------------
    def lex_approximation(self, F: FpModule, pair: CotorsionPair, defloc_sub: DeflocEngine):
        """(S, phi, G, psi) with S a defect, G perpendicular, im phi = ker psi.

        F is a module over the shifted cotorsion class; the construction
        follows the weak-kernel + decomposition-triangle diagram.
        """
        from .modules import projective_cover_onto

        subcat = defloc_sub.cat
        labels = subcat.objects
        f = self.cat.field
        fo0, epi = projective_cover_onto(F)
        Omega, _ = kernel(epi)
        fo1, epi1 = projective_cover_onto(Omega) if not Omega.is_zero() else ((), None)
        # presentation map f1: fo1 -> fo0 in T
        if epi1 is not None:
            comp_elements = []
            fblock = self._block_between(fo1, fo0, epi1, Omega, epi, subcat)
        else:
            fblock = BlockMorphism(
                (), fo0, tuple(tuple() for _ in fo0)
            )
        # K = cone(f1)[-1]
        cone_fo, q, r = self.backend.cone_data(fblock)
        K = tuple(self.backend.unshift_object(c) for c in cone_fo)
        kleg_rows = []
        for i, s in enumerate(fo1):
            row = []
            for j, z in enumerate(K):
                ent = r.entry(i, j)
                neg = Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords))
                row.append(self.backend.unshift_mor(neg))
            kleg_rows.append(tuple(row))
        kleg = BlockMorphism(K, fo1, tuple(kleg_rows))  # K -> U1
        # decomposition triangles for each summand of K
        u_parts = []
        u_blocks = []
        v_parts = []
        for j, klab in enumerate(K):
            wit, _ = self.decomposition_witness(klab, pair.U, pair.V)
            if wit is None:
                raise HeartError(f"cotorsion decomposition not found for {klab} (caps)")
            vfo = tuple(wit["v_part"])
            vshift = tuple(self.backend.shift_object(v) for v in vfo)
            coords = tuple(f.of(c) for c in wit["map_coords"])
            fb = self.block_from_coords((klab,), vshift, coords)
            cfo, qq, rr = self.backend.cone_data(fb)
            upart = tuple(self.backend.unshift_object(c) for c in cfo)
            # leg U_j -> k from the rotated cone triangle
            leg = []
            for jj, ulab in enumerate(upart):
                ent = rr.entry(0, jj)
                neg = Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords))
                leg.append(self.backend.unshift_mor(neg))
            u_parts.append(upart)
            u_blocks.append(leg)
            v_parts.append(vfo)
        U2 = tuple(l for part in u_parts for l in part)
        V2 = tuple(l for part in v_parts for l in part)
        # assemble U2 -> K block (block diagonal legs)
        grid = {}
        coff = 0
        for j, part in enumerate(u_parts):
            for t, leg_mor in enumerate(u_blocks[j]):
                grid[(j, coff + t)] = leg_mor
            coff += len(part)
        rows = []
        for j, klab in enumerate(K):
            row = []
            for c in range(len(U2)):
                row.append(grid.get((j, c), self.cat.zero_mor(U2[c], klab)))
            rows.append(tuple(row))
        u2_to_k = BlockMorphism(U2, K, tuple(rows))
        # composite c: U2 -> K -> U1, triangle U2 -> U1 -> C
        comp = block_compose(self.cat, kleg, u2_to_k)
        cfo2, qc, rc = self.backend.cone_data(comp)
        # g: C -> U0 with g ∘ qc = f1 (exists: f1 ∘ comp = 0); among the
        # solutions, the octahedral one has cone V2[2]; search the affine
        # solution space for it
        v2_twice = tuple(sorted(self.backend.shift_object(self.backend.shift_object(v)) for v in V2))
        g = self._solve_right_factor(qc, fblock, cfo2, fo0, want_cone=v2_twice)
        # S := coker((-,U1)| -> (-,C)|)
        ry_u1 = self.restricted_yoneda(fo1, labels, subcat)
        ry_c = self.restricted_yoneda(cfo2, labels, subcat)
        qc_map = self._restricted_postcompose(qc, fo1, cfo2, labels, subcat)
        Smod, proj_s = cokernel(qc_map)
        # phi: S -> F from (-,C) --g--> (-,U0) --> F
        g_map = self._restricted_postcompose(g, cfo2, fo0, labels, subcat)
        ry_u0 = self.restricted_yoneda(fo0, labels, subcat)
        to_f = epi.compose(ModuleMap(ry_c, ry_u0, g_map.mats))
        phi = factor_through_cokernel(proj_s, to_f)
        # G := (-, V2[2]) and psi: F -> G via the connecting map of cone(g)
        gcone_fo, qg, rg = self.backend.cone_data(g)
        if tuple(sorted(gcone_fo)) != v2_twice:
            raise HeartError("cone of the factor map is not the double-shifted coclass")
        G = self.restricted_yoneda(gcone_fo, labels, subcat)
        qg_map = self._restricted_postcompose(qg, fo0, gcone_fo, labels, subcat)
        psi = factor_through_cokernel(
            _as_cokernel_proj(epi), ModuleMap(ry_u0, G, qg_map.mats)
        )
        return Smod, phi, G, psi

    def _block_between(self, fo1, fo0, epi1, Omega, epi, subcat) -> BlockMorphism:
        """Presentation map between representables as a T-block morphism."""
        f = self.cat.field
        # composite yoneda(fo1) -> Omega -> yoneda(fo0); read off coordinates
        # by evaluating at identity elements (restricted Yoneda is full on
        # the subcategory's additive closure)
        from .modules import kernel as mod_kernel

        Omega_inc = None
        # recompute inclusion: kernel(epi) was taken in the caller; redo here
        Om2, inc = mod_kernel(epi)
        # epi1: yoneda(fo1) -> Omega (Om2); compose into yoneda(fo0)
        comp = inc.compose(ModuleMap(epi1.src, Om2, epi1.mats))
        rows = []
        for i, t in enumerate(fo0):
            rows.append(tuple(self._mor_from_element(comp, j, i, fo1, fo0, subcat) for j in range(len(fo1))))
        return BlockMorphism(fo1, fo0, tuple(rows))

    def _mor_from_element(self, comp: ModuleMap, j: int, i: int, fo1, fo0, subcat) -> Mor:
        """Entry (i, j): T-morphism fo1[j] -> fo0[i] from the Yoneda element."""
        f = self.cat.field
        s, t = fo1[j], fo0[i]
        # value of comp at the identity of the j-th summand, projected to the
        # i-th block of (-, fo0)(s)
        src_off = 0
        for pos in range(j):
            src_off += subcat.hom_dim(s, fo1[pos])
        idvec = [f.zero] * comp.src.dim(s)
        ident = subcat.identities[s]
        for b, c in enumerate(ident):
            idvec[src_off + b] = c
        col = comp.mats[s] @ Mat(f, len(idvec), 1, idvec)
        tgt_off = 0
        for pos in range(i):
            tgt_off += subcat.hom_dim(s, fo0[pos])
        d = subcat.hom_dim(s, t)
        return Mor(s, t, tuple(col[tgt_off + b, 0] for b in range(d)))

    def _solve_right_factor(
        self, qc: BlockMorphism, fblock: BlockMorphism, cfo: tuple, fo0: tuple, want_cone=None
    ) -> BlockMorphism:
        """g: C -> U0 with g ∘ qc = f1, solved in coordinates.

        When want_cone is given, the affine solution space is searched for a
        g whose cone has exactly those labels (the octahedral witness).
        """
        f = self.cat.field
        shapes = []
        for i, t in enumerate(fo0):
            for j, s in enumerate(cfo):
                shapes.append((i, j, s, t, self.cat.hom_dim(s, t)))
        total = sum(sh[4] for sh in shapes)
        rows = []
        rhs = []
        for i, t in enumerate(fo0):
            for j0, s0 in enumerate(qc.src):
                target = fblock.entry(i, j0)
                d0 = self.cat.hom_dim(s0, t)
                if d0 == 0:
                    if not target.is_zero():
                        raise HeartError("factor equation unsolvable: zero hom")
                    continue
                coeff = [[f.zero] * total for _ in range(d0)]
                off = 0
                for (i2, j2, s, t2, d) in shapes:
                    if i2 == i and d:
                        ent = qc.entry(j2, j0)
                        if not ent.is_zero():
                            for b in range(d):
                                bm = self.cat.basis_mor((s, t2, b))
                                comp = self.cat.compose_mor(bm, ent)
                                for r_i in range(d0):
                                    coeff[r_i][off + b] = f.add(coeff[r_i][off + b], comp.coords[r_i])
                    off += d
                for r_i in range(d0):
                    rows.append(coeff[r_i])
                    rhs.append(target.coords[r_i])

        def vec_to_block(vec) -> BlockMorphism:
            grid = {}
            off = 0
            for (i, j, s, t, d) in shapes:
                grid[(i, j)] = Mor(s, t, tuple(vec[off : off + d]))
                off += d
            out_rows = []
            for i, t in enumerate(fo0):
                out_rows.append(tuple(grid[(i, j)] for j, s in enumerate(cfo)))
            return BlockMorphism(cfo, fo0, tuple(out_rows))

        if rows:
            A = Mat.from_rows(f, rows)
            sol = solve(A, Mat(f, len(rhs), 1, rhs))
            if sol is None:
                raise HeartError("no factorization through the cone")
            base = [sol[i, 0] for i in range(sol.rows)]
            from .exactlin import kernel_basis

            ker = kernel_basis(A)
        else:
            base = [f.zero] * total
            ker = Mat.identity(f, total)
        candidates = [tuple(base)]
        if want_cone is not None and ker.cols:
            for j in range(ker.cols):
                candidates.append(
                    tuple(f.add(base[i], ker[i, j]) for i in range(total))
                )
            for _ in range(64):
                coeffs = [f.rand(self.rng) for _ in range(ker.cols)]
                v = list(base)
                for j, c in enumerate(coeffs):
                    if c != f.zero:
                        for i in range(total):
                            v[i] = f.add(v[i], f.mul(c, ker[i, j]))
                candidates.append(tuple(v))
        last_err = None
        for vec in candidates:
            g = vec_to_block(vec)
            if want_cone is None:
                return g
            try:
                gcone_fo, _, _ = self.backend.cone_data(g)
            except ExtriError as exc:
                last_err = exc
                continue
            if tuple(sorted(gcone_fo)) == tuple(want_cone):
                return g
        raise HeartError(f"octahedral factorization not found (caps); last: {last_err}")

    def _restricted_postcompose(self, b: BlockMorphism, src_fo, tgt_fo, labels, subcat) -> ModuleMap:
        """(-, src_fo)| -> (-, tgt_fo)| by postcomposition with b."""
        f = self.cat.field
        src = self.restricted_yoneda(src_fo, labels, subcat)
        tgt = self.restricted_yoneda(tgt_fo, labels, subcat)
        mats = {}
        for u in labels:
            cols = []
            for j, s in enumerate(src_fo):
                for bb in range(self.cat.hom_dim(u, s)):
                    h = self.cat.basis_mor((u, s, bb))
                    vec = []
                    for i, t in enumerate(tgt_fo):
                        comp = self.cat.compose_mor(b.entry(i, j), h)
                        vec.extend(comp.coords)
                    cols.append(vec)
            mats[u] = (
                Mat(f, tgt.dim(u), src.dim(u), [cols[j][i] for i in range(tgt.dim(u)) for j in range(len(cols))])
                if cols
                else Mat(f, tgt.dim(u), 0, [])
            )
        return ModuleMap(src, tgt, mats)


def _as_cokernel_proj(epi: ModuleMap) -> ModuleMap:
    """Treat a chosen epi as the cokernel projection it is."""
    return epi


def _psi_transport(engine: HeartEngine, block: BlockMorphism, sub, sigma: tuple) -> ModuleMap:
    """Image of a T-block morphism under restriction-then-quotient."""
    mp = engine._restricted_postcompose(block, block.src, block.tgt, sub.cat.objects, sub.cat)
    return sub.restrict_map(mp, sigma)


class CohomologyComparison:
    """H computed through reflections against the localization composite."""

    def __init__(self, engine: HeartEngine, pair: CotorsionPair, heart: dict | None = None):
        self.engine = engine
        self.pair = pair
        self.heart = heart if heart is not None else engine.heart_presentation(pair)
        self.sub = engine.sub_engine(pair)
        self.sigma = self.sub.def_simples()

    def q_yoneda(self, fo: tuple) -> FpModule:
        return self.engine.psi_image(fo, self.sub, self.sigma)

    def zigzag(self, x: str):
        """Iso Q(-, x)| -> Q(-, x^pm)| through the reflection pair."""
        engine = self.engine
        refl = engine.reflection(x, self.pair, self.heart)
        spm, beta = engine.coreflection_fo(refl["target"], self.pair, self.heart)
        a = _psi_transport(engine, refl["alpha"], self.sub, self.sigma)
        b = _psi_transport(engine, beta, self.sub, self.sigma)
        binv = b.inverse()
        return spm, binv.compose(a)

    def compare_objects(self) -> list:
        """Per object: H(x) matches the localization image up to isomorphism."""
        out = []
        for x in self.engine.cat.objects:
            data = self.engine.cohomology_object(x, self.pair, self.heart)
            lhs = self.q_yoneda((x,))
            rhs = self.q_yoneda(data["xpm"])
            from .modules import find_isomorphism

            ok = lhs.total_dim() == rhs.total_dim() and (
                lhs.is_zero() or find_isomorphism(lhs, rhs, self.engine.rng) is not None
            )
            out.append({"object": x, "heart_class": list(data["heart_class"]), "pass": bool(ok)})
        return out

    def compare_morphisms(self) -> list:
        """Per hom-basis morphism: Psi(H f) equals the conjugated Q(-, f)."""
        out = []
        engine = self.engine
        for kx in engine.cat.objects:
            for ky in engine.cat.objects:
                for b in range(engine.cat.hom_dim(kx, ky)):
                    m = engine.cat.basis_mor((kx, ky, b))
                    c = BlockMorphism((kx,), (ky,), ((m,),))
                    hf = engine.cohomology_map(c, self.pair, self.heart)
                    psi_hf = _psi_transport(engine, hf["map"], self.sub, self.sigma)
                    spm_x, zig_x = self.zigzag(kx)
                    spm_y, zig_y = self.zigzag(ky)
                    qf = _psi_transport(engine, c, self.sub, self.sigma)
                    lhs = psi_hf.compose(zig_x)
                    rhs = zig_y.compose(qf)
                    same = all(
                        lhs.mats[u] == rhs.mats[u] for u in self.sub.cat.objects
                    )
                    out.append(
                        {
                            "morphism": f"{kx}->{ky}#{b}",
                            "pass": bool(same),
                        }
                    )
        return out

    def exactness_on_triangles(self) -> list:
        """H sends enumerated triangles to exact sequences (through Psi)."""
        from .exactlin import is_injective

        out = []
        engine = self.engine
        for t in engine.backend.enumerate_triangles():
            hg = engine.cohomology_map(t.g, self.pair, self.heart)
            hf = engine.cohomology_map(t.f, self.pair, self.heart)
            a = _psi_transport(engine, hg["map"], self.sub, self.sigma)
            b = _psi_transport(engine, hf["map"], self.sub, self.sigma)
            ok = True
            for u in self.sub.cat.objects:
                am, bm = a.mats[u], b.mats[u]
                if not (bm @ am).is_zero() or rank(am) != bm.cols - rank(bm):
                    ok = False
            out.append({"triangle": t.describe(), "pass": ok})
        return out
