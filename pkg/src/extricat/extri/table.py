"""Triangulated backend from explicit tables: hom data, a shift
autoequivalence, and a cone oracle on basis morphisms.

Cones of non-basis morphisms are derived when the block matrix reduces,
by splitting off isomorphism entries and scaling, to a monomial matrix
of basis morphisms; anything else is rejected as underdetermined.
"""

from __future__ import annotations

from ..category import BlockMorphism, FiniteLinearCategory, Mor, block_compose
from ..exactlin import Mat, invert
from ..modules import FpModule, yoneda
from .base import Caps, ETriangle, ExtriError, ExtriStructure


class TableBackend(ExtriStructure):
    kind = "table"

    def __init__(
        self,
        cat: FiniteLinearCategory,
        shift_objects: dict,
        shift_matrices: dict,
        cones: dict,
        caps: Caps,
    ):
        """shift_objects: label -> label; shift_matrices[(x, y)]: Mat sending
        Hom(x,y) coordinates to Hom(x[1], y[1]) coordinates; cones: basis key
        -> (cone formal object, q: tgt -> cone blocks, r: cone -> src[1] blocks).
        """
        super().__init__(cat, caps)
        self.shift_objects = dict(shift_objects)
        if sorted(self.shift_objects) != sorted(cat.objects) or sorted(
            self.shift_objects.values()
        ) != sorted(cat.objects):
            raise ExtriError("shift must permute the object labels")
        self.unshift_objects = {v: k for k, v in self.shift_objects.items()}
        self.shift_matrices = shift_matrices
        self.cones = cones
        for k in cat.all_basis_keys():
            if k not in cones:
                raise ExtriError(f"cone oracle entry missing for {cat.basis_name(k)}")

    # -- shift -----------------------------------------------------------
    def shift_object(self, x: str) -> str:
        return self.shift_objects[x]

    def unshift_object(self, x: str) -> str:
        return self.unshift_objects[x]

    def shift_mor(self, m: Mor) -> Mor:
        sx, sy = self.shift_objects[m.src], self.shift_objects[m.tgt]
        mat = self.shift_matrices[(m.src, m.tgt)]
        col = mat @ Mat(self.cat.field, len(m.coords), 1, list(m.coords))
        return Mor(sx, sy, tuple(col[i, 0] for i in range(col.rows)))

    def unshift_mor(self, m: Mor) -> Mor:
        sx, sy = self.unshift_objects[m.src], self.unshift_objects[m.tgt]
        mat = invert(self.shift_matrices[(sx, sy)])
        if mat is None:
            raise ExtriError("shift matrix not invertible")
        col = mat @ Mat(self.cat.field, len(m.coords), 1, list(m.coords))
        return Mor(sx, sy, tuple(col[i, 0] for i in range(col.rows)))

    def shift_fo(self, fo: tuple) -> tuple:
        return tuple(self.shift_objects[l] for l in fo)

    def unshift_fo(self, fo: tuple) -> tuple:
        return tuple(self.unshift_objects[l] for l in fo)


    # -- extension spaces -----------------------------------------------------
    def e_dim_pair(self, x: str, z: str) -> int:
        return self.cat.hom_dim(x, self.shift_objects[z])

    def e_module_indec(self, z: str) -> FpModule:
        return self.yoneda_module((self.shift_objects[z],))

    def e_push_pair(self, z_mor: Mor) -> dict:
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

    # -- cones by reduction ------------------------------------------------------
    def cone_of_block(self, w: BlockMorphism):
        """(fo_c, q: tgt -> cone, r: cone -> src[1]) or raise on underdetermined."""
        w, pre, post_inv = _iso_reduce(self.cat, w)
        f = self.cat.field
        # after reduction entries must form a monomial pattern of scaled basis
        # morphisms (invertible entries contribute zero cones); assemble
        used_rows = set()
        used_cols = set()
        pieces = []  # (row, col, scalar, basis_key)
        for i, row in enumerate(w.blocks):
            for j, m in enumerate(row):
                if m.is_zero():
                    continue
                if i in used_rows or j in used_cols:
                    raise ExtriError("cone underdetermined: non-monomial block matrix")
                if m.src == m.tgt and self.cat.is_invertible_endo(m):
                    used_rows.add(i)
                    used_cols.add(j)
                    continue
                nz = [t for t, c in enumerate(m.coords) if c != f.zero]
                if len(nz) != 1:
                    raise ExtriError("cone underdetermined: non-basis entry")
                used_rows.add(i)
                used_cols.add(j)
                pieces.append((i, j, m.coords[nz[0]], (m.src, m.tgt, nz[0])))
        cone_fo = []
        q_entries = {}  # (cone position, tgt position) -> Mor
        r_entries = {}  # (src position, cone position) -> Mor
        pos = 0
        for i, j, scalar, key in pieces:
            cfo, qb, rb = self.cones[key]
            for t, lab in enumerate(cfo):
                cone_fo.append(lab)
            # q block: tgt[i] -> cfo; r block: cfo -> src[j][1], scaled 1/scalar
            inv = f.inv(scalar)
            for t, lab in enumerate(cfo):
                q_entries[(pos + t, i)] = qb[t]
                r_entries[(j, pos + t)] = Mor(
                    rb[t].src, rb[t].tgt, tuple(f.mul(inv, c) for c in rb[t].coords)
                )
            pos += len(cfo)
        # unmatched targets survive in the cone; unmatched sources shift in
        for i, lab in enumerate(w.tgt):
            if i not in used_rows:
                cone_fo.append(lab)
                q_entries[(pos, i)] = self.cat.identity_mor(lab)
                pos += 1
        for j, lab in enumerate(w.src):
            if j not in used_cols:
                cone_fo.append(self.shift_objects[lab])
                r_entries[(j, pos)] = self.cat.identity_mor(self.shift_objects[lab])
                pos += 1
        cone_fo = tuple(cone_fo)
        qrows = []
        for t, clab in enumerate(cone_fo):
            qrow = []
            for i, tlab in enumerate(w.tgt):
                qrow.append(q_entries.get((t, i), self.cat.zero_mor(tlab, clab)))
            qrows.append(tuple(qrow))
        q = BlockMorphism(w.tgt, cone_fo, tuple(qrows))
        sfo = self.shift_fo(w.src)
        rrows = []
        for j, slab in enumerate(w.src):
            rrow = []
            for t, clab in enumerate(cone_fo):
                rrow.append(r_entries.get((j, t), self.cat.zero_mor(clab, sfo[j])))
            rrows.append(tuple(rrow))
        r = BlockMorphism(cone_fo, sfo, tuple(rrows))
        # undo the conjugation reduced = pre ∘ w ∘ post: with the triangle
        # (reduced, q, r) distinguished, (w, q ∘ pre, post^{-1}[1] ∘ r) is too
        q_full = block_compose(self.cat, q, pre)
        r_full = block_compose(self.cat, _shift_block(self, post_inv), r)
        return cone_fo, q_full, r_full

    def cone_data(self, w: BlockMorphism):
        return self.cone_of_block(w)

    def realize_pair_blocks(self, X: tuple, Z: tuple, delta: tuple) -> ETriangle:
        f = self.cat.field
        offs = self.e_offsets(X, Z)
        # w = -delta[-1]: X[-1] -> Z
        Xm = self.unshift_fo(X)
        rows = []
        for j, z in enumerate(Z):
            row = []
            for i, x in enumerate(X):
                d = self.e_dim_pair(x, z)
                coords = tuple(f.neg(delta[offs[(i, j)] + s]) for s in range(d))
                row.append(self.unshift_mor(Mor(x, self.shift_objects[z], coords)))
            rows.append(tuple(row))
        w = BlockMorphism(Xm, Z, tuple(rows))
        fo_c, q, r = self.cone_of_block(w)
        # triangle (w, q, r): conflation (Z --q--> cone --r--> X) with class delta
        r_to_x = BlockMorphism(r.src, X, r.blocks)
        return ETriangle(Z, fo_c, X, q, r_to_x, tuple(delta))

    def is_deflation(self, w: BlockMorphism):
        f = self.cat.field
        fo_c, q, r = self.cone_of_block(w)
        Z = self.unshift_fo(fo_c)
        offs = self.e_offsets(w.tgt, Z)
        out = [f.zero] * self.e_dim(w.tgt, Z)
        for i, t in enumerate(w.tgt):
            for j, z in enumerate(Z):
                ent = q.entry(j, i)
                for s, c in enumerate(ent.coords):
                    out[offs[(i, j)] + s] = c
        grows = []
        for i, s in enumerate(w.src):
            row = []
            for j, z in enumerate(Z):
                ent = r.entry(i, j)
                neg = Mor(ent.src, ent.tgt, tuple(f.neg(c) for c in ent.coords))
                row.append(self.unshift_mor(neg))
            grows.append(tuple(row))
        g = BlockMorphism(Z, w.src, tuple(grows))
        return ETriangle(Z, w.src, w.tgt, g, w, tuple(out))

    def is_inflation(self, w: BlockMorphism):
        f = self.cat.field
        fo_c, q, r = self.cone_of_block(w)
        offs = self.e_offsets(fo_c, w.src)
        out = [f.zero] * self.e_dim(fo_c, w.src)
        for i, c_lab in enumerate(fo_c):
            for j, s_lab in enumerate(w.src):
                ent = r.entry(j, i)
                for s, cval in enumerate(ent.coords):
                    out[offs[(i, j)] + s] = cval
        return ETriangle(w.src, w.tgt, fo_c, w, q, tuple(out))

    def every_morphism_conflates(self) -> bool:
        return True


def _shift_block(backend: TableBackend, b: BlockMorphism) -> BlockMorphism:
    rows = []
    for i in range(len(b.tgt)):
        rows.append(tuple(backend.shift_mor(b.entry(i, j)) for j in range(len(b.src))))
    return BlockMorphism(backend.shift_fo(b.src), backend.shift_fo(b.tgt), tuple(rows))


def _iso_reduce(cat: FiniteLinearCategory, w: BlockMorphism):
    """Row/column eliminate through invertible entries.

    Returns (reduced, pre, post_inv) with reduced = pre ∘ w ∘ post and
    post_inv = post^{-1}; the elementary automorphisms invert by negating
    their off-diagonal coefficient.
    """
    from ..category import block_identity

    f = cat.field
    cur = w
    pre = block_identity(cat, w.tgt)
    post_inv = block_identity(cat, w.src)
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > 50:
            raise ExtriError("iso reduction did not terminate")
        for i in range(len(cur.tgt)):
            for j in range(len(cur.src)):
                m = cur.entry(i, j)
                if m.src != m.tgt or m.is_zero():
                    continue
                if not cat.is_invertible_endo(m):
                    continue
                # eliminate the rest of row i and column j through this unit
                minv = _endo_inverse(cat, m)
                for i2 in range(len(cur.tgt)):
                    if i2 == i:
                        continue
                    n = cur.entry(i2, j)
                    if n.is_zero():
                        continue
                    # row op: row_i2 -= n ∘ m^{-1} ∘ row_i
                    elim = _row_elim(cat, cur.tgt, i2, i, cat.compose_mor(n, minv))
                    pre = block_compose(cat, elim, pre)
                    cur = block_compose(cat, elim, cur)
                    changed = True
                for j2 in range(len(cur.src)):
                    if j2 == j:
                        continue
                    n = cur.entry(i, j2)
                    if n.is_zero():
                        continue
                    coeff = cat.compose_mor(minv, n)
                    elim = _col_elim(cat, cur.src, j, j2, coeff)
                    inv_elim = _col_elim(
                        cat, cur.src, j, j2, Mor(coeff.src, coeff.tgt, tuple(f.neg(c) for c in coeff.coords))
                    )
                    post_inv = block_compose(cat, inv_elim, post_inv)
                    cur = block_compose(cat, cur, elim)
                    changed = True
    return cur, pre, post_inv


def _endo_inverse(cat: FiniteLinearCategory, m: Mor) -> Mor:
    alg = cat.end_table(m.src)
    lm = alg.left_mult_matrix(m.coords)
    inv = invert(lm)
    if inv is None:
        raise ExtriError("inverse of non-unit")
    unit = Mat(cat.field, alg.dim, 1, list(alg.unit))
    col = inv @ unit
    return Mor(m.src, m.src, tuple(col[i, 0] for i in range(col.rows)))


def _row_elim(cat, fo, i2, i, coeff: Mor) -> BlockMorphism:
    """Elementary automorphism of ⊕fo: row_i2 -= coeff ∘ row_i."""
    f = cat.field
    rows = []
    for a, t in enumerate(fo):
        row = []
        for b, s in enumerate(fo):
            if a == b:
                row.append(cat.identity_mor(s))
            elif a == i2 and b == i:
                row.append(Mor(coeff.src, coeff.tgt, tuple(f.neg(c) for c in coeff.coords)))
            else:
                row.append(cat.zero_mor(s, t))
        rows.append(tuple(row))
    return BlockMorphism(fo, fo, tuple(rows))


def _col_elim(cat, fo, j, j2, coeff: Mor) -> BlockMorphism:
    """Elementary automorphism of ⊕fo: col_j2 -= col_j ∘ coeff."""
    f = cat.field
    rows = []
    for a, t in enumerate(fo):
        row = []
        for b, s in enumerate(fo):
            if a == b:
                row.append(cat.identity_mor(s))
            elif a == j and b == j2:
                row.append(Mor(coeff.src, coeff.tgt, tuple(f.neg(c) for c in coeff.coords)))
            else:
                row.append(cat.zero_mor(s, t))
        rows.append(tuple(row))
    return BlockMorphism(fo, fo, tuple(rows))
