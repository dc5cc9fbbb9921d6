"""Finite k-linear Krull-Schmidt categories presented by structure constants.

A category here is a finite set of indecomposable object labels, a chosen
basis for every hom space, and bilinear composition given on basis pairs.
Formal direct sums and block morphisms provide the additive closure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

from .algebra import AlgebraError, AlgebraTable, is_local_with_split_residue, radical, solve_coords
from .exactlin import FieldSpec, Mat, rank


class CategoryError(ValueError):
    pass


# A hom-basis element is addressed by (src_label, tgt_label, index).
BasisKey = tuple


@dataclass(frozen=True)
class Mor:
    """Morphism between two indecomposables, as coordinates in the hom basis."""

    src: str
    tgt: str
    coords: tuple

    def is_zero(self) -> bool:
        return all(not c for c in self.coords)


class FiniteLinearCategory:
    def __init__(
        self,
        field: FieldSpec,
        objects: Sequence[str],
        hom_dims: dict,
        comp: dict,
        identities: dict,
        basis_names: dict | None = None,
    ):
        """comp[(g_key, f_key)] = coordinate tuple of g∘f in Hom(src f, tgt g).

        Missing comp entries for composable pairs default to zero, which is
        only sound when the table author meant them to vanish; the builders
        in this package always write every entry.
        """
        self.field = field
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise CategoryError("duplicate object labels")
        self.hom_dims = dict(hom_dims)
        for x in self.objects:
            for y in self.objects:
                self.hom_dims.setdefault((x, y), 0)
        self.comp = comp
        self.identities = identities
        self.basis_names = basis_names or {}
        self._end_tables: dict = {}
        self._rad_end: dict = {}

    # basic access ------------------------------------------------------
    def hom_dim(self, x: str, y: str) -> int:
        return self.hom_dims.get((x, y), 0)

    def basis_keys(self, x: str, y: str) -> list:
        return [(x, y, i) for i in range(self.hom_dim(x, y))]

    def all_basis_keys(self) -> list:
        out = []
        for x in self.objects:
            for y in self.objects:
                out.extend(self.basis_keys(x, y))
        return out

    def zero_mor(self, x: str, y: str) -> Mor:
        return Mor(x, y, tuple(self.field.zero for _ in range(self.hom_dim(x, y))))

    def basis_mor(self, key: BasisKey) -> Mor:
        x, y, i = key
        f = self.field
        coords = [f.zero] * self.hom_dim(x, y)
        coords[i] = f.one
        return Mor(x, y, tuple(coords))

    def identity_mor(self, x: str) -> Mor:
        return Mor(x, x, tuple(self.identities[x]))

    def basis_name(self, key: BasisKey) -> str:
        if key in self.basis_names:
            return self.basis_names[key]
        x, y, i = key
        return f"{x}->{y}#{i}"

    # composition ---------------------------------------------------------
    def compose_mor(self, g: Mor, f: Mor) -> Mor:
        if f.tgt != g.src:
            raise CategoryError(f"compose mismatch: {f.tgt} vs {g.src}")
        fd = self.field
        out = [fd.zero] * self.hom_dim(f.src, g.tgt)
        for i, gi in enumerate(g.coords):
            if gi == fd.zero:
                continue
            for j, fj in enumerate(f.coords):
                if fj == fd.zero:
                    continue
                entry = self.comp.get(((g.src, g.tgt, i), (f.src, f.tgt, j)))
                if entry is None:
                    continue
                c = fd.mul(gi, fj)
                for k, e in enumerate(entry):
                    if e != fd.zero:
                        out[k] = fd.add(out[k], fd.mul(c, e))
        return Mor(f.src, g.tgt, tuple(out))

    # endomorphism algebras -------------------------------------------------
    def end_table(self, x: str) -> AlgebraTable:
        if x not in self._end_tables:
            d = self.hom_dim(x, x)
            mult = []
            for i in range(d):
                row = []
                gi = self.basis_mor((x, x, i))
                for j in range(d):
                    fj = self.basis_mor((x, x, j))
                    row.append(self.compose_mor(gi, fj).coords)
                mult.append(row)
            self._end_tables[x] = AlgebraTable(self.field, d, mult, tuple(self.identities[x]))
        return self._end_tables[x]

    def rad_end_basis(self, x: str) -> list:
        if x not in self._rad_end:
            self._rad_end[x] = radical(self.end_table(x))
        return self._rad_end[x]

    def is_invertible_endo(self, f: Mor) -> bool:
        if f.src != f.tgt:
            raise CategoryError("not an endomorphism")
        return self.end_table(f.src).is_invertible(f.coords)

    def radical_spanning_mors(self) -> list:
        """Mors spanning rad(x, y) for all ordered pairs."""
        out = []
        for x in self.objects:
            for y in self.objects:
                if x != y:
                    out.extend(self.basis_mor(k) for k in self.basis_keys(x, y))
                else:
                    out.extend(Mor(x, x, tuple(v)) for v in self.rad_end_basis(x))
        return out

    # validation ------------------------------------------------------------
    def validate(self) -> list:
        """All violations as (code, detail) pairs; empty means valid."""
        problems = []
        keys = self.all_basis_keys()
        for x in self.objects:
            if x not in self.identities or len(self.identities[x]) != self.hom_dim(x, x):
                problems.append(("identity-shape", f"identity of {x} malformed"))
                return problems
        for k in keys:
            f = self.basis_mor(k)
            if self.compose_mor(self.identity_mor(k[1]), f).coords != f.coords:
                problems.append(("unit-law", f"id∘{self.basis_name(k)} != {self.basis_name(k)}"))
            if self.compose_mor(f, self.identity_mor(k[0])).coords != f.coords:
                problems.append(("unit-law", f"{self.basis_name(k)}∘id != {self.basis_name(k)}"))
        for k3 in keys:
            h = self.basis_mor(k3)
            for k2 in keys:
                if k2[1] != k3[0]:
                    continue
                g = self.basis_mor(k2)
                hg = self.compose_mor(h, g)
                for k1 in keys:
                    if k1[1] != k2[0]:
                        continue
                    f = self.basis_mor(k1)
                    lhs = self.compose_mor(hg, f)
                    rhs = self.compose_mor(h, self.compose_mor(g, f))
                    if lhs.coords != rhs.coords:
                        problems.append(
                            (
                                "associativity",
                                f"({self.basis_name(k3)}∘{self.basis_name(k2)})∘{self.basis_name(k1)}"
                                f" != {self.basis_name(k3)}∘({self.basis_name(k2)}∘{self.basis_name(k1)})",
                            )
                        )
        if problems:
            return problems
        for x in self.objects:
            try:
                if not is_local_with_split_residue(self.end_table(x)):
                    problems.append(("non-local-end", f"End({x}) is not local with residue field k"))
            except AlgebraError as exc:
                problems.append(("end-analysis", f"End({x}): {exc}"))
        # distinct labels must be non-isomorphic
        for x in self.objects:
            for y in self.objects:
                if x >= y:
                    continue
                if self._labels_isomorphic(x, y):
                    problems.append(("iso-duplicate", f"{x} and {y} are isomorphic"))
        return problems

    def _labels_isomorphic(self, x: str, y: str) -> bool:
        if self.hom_dim(x, y) == 0 or self.hom_dim(y, x) == 0:
            return False
        prods = []
        for i in range(self.hom_dim(x, y)):
            f = self.basis_mor((x, y, i))
            for j in range(self.hom_dim(y, x)):
                g = self.basis_mor((y, x, j))
                prods.append(self.compose_mor(g, f).coords)
        rad = self.rad_end_basis(x)
        d = self.hom_dim(x, x)
        radmat = Mat.from_rows(self.field, rad) if rad else Mat(self.field, 0, d, [])
        for p in prods:
            if solve_coords(radmat, p) is None:
                return True
        return False

    # category algebra --------------------------------------------------------
    def category_algebra(self) -> AlgebraTable:
        keys = self.all_basis_keys()
        index = {k: i for i, k in enumerate(keys)}
        n = len(keys)
        f = self.field
        mult = []
        for ki in keys:
            row = []
            gi = self.basis_mor(ki)
            for kj in keys:
                coords = [f.zero] * n
                if kj[1] == ki[0]:
                    comp = self.compose_mor(gi, self.basis_mor(kj))
                    for t, c in enumerate(comp.coords):
                        coords[index[(comp.src, comp.tgt, t)]] = c
                row.append(tuple(coords))
            mult.append(row)
        unit = [f.zero] * n
        for x in self.objects:
            for t, c in enumerate(self.identities[x]):
                unit[index[(x, x, t)]] = f.add(unit[index[(x, x, t)]], c)
        return AlgebraTable(f, n, mult, tuple(unit))

    def primitive_idempotent_coords(self, x: str) -> tuple:
        keys = self.all_basis_keys()
        index = {k: i for i, k in enumerate(keys)}
        f = self.field
        out = [f.zero] * len(keys)
        for t, c in enumerate(self.identities[x]):
            out[index[(x, x, t)]] = c
        return tuple(out)

    def full_subcategory(self, objects: Sequence[str]) -> "FiniteLinearCategory":
        objs = [o for o in self.objects if o in set(objects)]
        hom_dims = {(x, y): self.hom_dim(x, y) for x in objs for y in objs}
        comp = {
            (g, f): v
            for (g, f), v in self.comp.items()
            if g[0] in objs and g[1] in objs and f[0] in objs and f[1] in objs
        }
        idents = {x: self.identities[x] for x in objs}
        names = {k: v for k, v in self.basis_names.items() if k[0] in objs and k[1] in objs}
        return FiniteLinearCategory(self.field, objs, hom_dims, comp, idents, names)


# ---------------------------------------------------------------------------
# formal objects and block morphisms


def formal_object(labels: Iterable[str]) -> tuple:
    """Canonical multiset form of a direct sum: sorted tuple of labels."""
    return tuple(sorted(labels))


def fo_dim_vector(cat: FiniteLinearCategory, fo: tuple) -> dict:
    out = {x: 0 for x in cat.objects}
    for l in fo:
        out[l] += 1
    return out


@dataclass(frozen=True)
class BlockMorphism:
    """Morphism between formal objects, entry (i, j): src[j] -> tgt[i]."""

    src: tuple
    tgt: tuple
    blocks: tuple  # tuple of rows, each a tuple of Mor

    def __post_init__(self):
        if len(self.blocks) != len(self.tgt):
            raise CategoryError("block row count mismatch")
        for row in self.blocks:
            if len(row) != len(self.src):
                raise CategoryError("block col count mismatch")

    def entry(self, i: int, j: int) -> Mor:
        return self.blocks[i][j]

    def is_zero(self) -> bool:
        return all(m.is_zero() for row in self.blocks for m in row)


def block_zero(cat: FiniteLinearCategory, src: tuple, tgt: tuple) -> BlockMorphism:
    return BlockMorphism(
        src, tgt, tuple(tuple(cat.zero_mor(s, t) for s in src) for t in tgt)
    )


def block_identity(cat: FiniteLinearCategory, fo: tuple) -> BlockMorphism:
    rows = []
    for i, t in enumerate(fo):
        row = []
        for j, s in enumerate(fo):
            row.append(cat.identity_mor(s) if i == j else cat.zero_mor(s, t))
        rows.append(tuple(row))
    return BlockMorphism(fo, fo, tuple(rows))


def block_compose(cat: FiniteLinearCategory, g: BlockMorphism, f: BlockMorphism) -> BlockMorphism:
    if f.tgt != g.src:
        raise CategoryError("block compose mismatch")
    fd = cat.field
    rows = []
    for i, t in enumerate(g.tgt):
        row = []
        for j, s in enumerate(f.src):
            acc = cat.zero_mor(s, t)
            for k in range(len(g.src)):
                term = cat.compose_mor(g.entry(i, k), f.entry(k, j))
                acc = Mor(s, t, tuple(fd.add(a, b) for a, b in zip(acc.coords, term.coords)))
            row.append(acc)
        rows.append(tuple(row))
    return BlockMorphism(f.src, g.tgt, tuple(rows))


def block_add(cat: FiniteLinearCategory, a: BlockMorphism, b: BlockMorphism) -> BlockMorphism:
    if a.src != b.src or a.tgt != b.tgt:
        raise CategoryError("block add mismatch")
    fd = cat.field
    rows = []
    for ra, rb in zip(a.blocks, b.blocks):
        rows.append(
            tuple(
                Mor(ma.src, ma.tgt, tuple(fd.add(x, y) for x, y in zip(ma.coords, mb.coords)))
                for ma, mb in zip(ra, rb)
            )
        )
    return BlockMorphism(a.src, a.tgt, tuple(rows))


def block_direct_sum(cat: FiniteLinearCategory, a: BlockMorphism, b: BlockMorphism) -> BlockMorphism:
    src = a.src + b.src
    tgt = a.tgt + b.tgt
    rows = []
    for i, t in enumerate(tgt):
        row = []
        for j, s in enumerate(src):
            if i < len(a.tgt) and j < len(a.src):
                row.append(a.entry(i, j))
            elif i >= len(a.tgt) and j >= len(a.src):
                row.append(b.entry(i - len(a.tgt), j - len(a.src)))
            else:
                row.append(cat.zero_mor(s, t))
        rows.append(tuple(row))
    return BlockMorphism(src, tgt, tuple(rows))


def in_radical(cat: FiniteLinearCategory, f: BlockMorphism) -> bool:
    """Membership in the radical ideal of the additive closure."""
    for row in f.blocks:
        for m in row:
            if m.src == m.tgt and not m.is_zero():
                d = cat.hom_dim(m.src, m.src)
                rad = cat.rad_end_basis(m.src)
                radmat = Mat.from_rows(cat.field, rad) if rad else Mat(cat.field, 0, d, [])
                if solve_coords(radmat, m.coords) is None:
                    return False
    return True


def enumerate_formal_objects(cat: FiniteLinearCategory, max_mult: int, include_zero: bool = True):
    """All formal objects with per-label multiplicity <= max_mult."""
    ranges = [range(max_mult + 1) for _ in cat.objects]
    for counts in itertools.product(*ranges):
        if not include_zero and not any(counts):
            continue
        labels = []
        for label, c in zip(cat.objects, counts):
            labels.extend([label] * c)
        yield formal_object(labels)


# ---------------------------------------------------------------------------
# path-algebra builder: a quiver with relations presented as a category
# whose objects are the vertices and Hom(x, y) = paths x -> y mod relations


def build_path_category(
    field: FieldSpec,
    vertices: Sequence[str],
    arrows: Sequence[dict],
    relations: Sequence[list],
    max_path_length: int = 6,
) -> FiniteLinearCategory:
    """relations: list of [[path, coeff], ...] where path = list of arrow names
    composed left to right (first arrow applied first).
    """
    arrow_map = {a["name"]: (a["from"], a["to"]) for a in arrows}
    if len(arrow_map) != len(arrows):
        raise CategoryError("duplicate arrow names")
    for v in vertices:
        if not isinstance(v, str):
            raise CategoryError("vertex labels must be strings")
    for a in arrows:
        if a["from"] not in vertices or a["to"] not in vertices:
            raise CategoryError(f"arrow {a['name']} references unknown vertex")

    # enumerate one layer past the bound: if every path of length bound+1
    # vanishes modulo the ideal, so does every longer one, which is what
    # justifies truncating products
    max_path_length = max_path_length + 1

    # enumerate paths up to the bound; a path is a tuple of arrow names
    paths_by_pair: dict = {(x, y): [] for x in vertices for y in vertices}
    for v in vertices:
        paths_by_pair[(v, v)].append(())
    frontier = [((), v, v) for v in vertices]
    all_paths = {(): None}
    for _ in range(max_path_length):
        new_frontier = []
        for path, src, tgt in frontier:
            for name, (a_from, a_to) in arrow_map.items():
                if a_from != tgt:
                    continue
                np_ = path + (name,)
                paths_by_pair[(src, a_to)].append(np_)
                all_paths[np_] = None
                new_frontier.append((np_, src, a_to))
        frontier = new_frontier
        if not frontier:
            break

    def path_endpoints(path: tuple) -> tuple | None:
        if not path:
            return None
        src = arrow_map[path[0]][0]
        tgt = arrow_map[path[-1]][1]
        return src, tgt

    # relation ideal, closed under pre/post composition with arrows
    rel_vectors: dict = {}  # (src,tgt) -> list of coefficient dicts {path: coeff}

    def add_relation(terms: dict):
        pts = {path_endpoints(p) or (None, None) for p in terms}
        pts = {p for p in pts if p != (None, None)}
        if len(pts) != 1:
            raise CategoryError("relation mixes hom spaces")
        key = pts.pop()
        rel_vectors.setdefault(key, []).append(terms)

    base_relations = []
    for rel in relations:
        terms = {}
        for path, coeff in rel:
            pt = tuple(path)
            for name in pt:
                if name not in arrow_map:
                    raise CategoryError(f"relation references unknown arrow {name}")
            terms[pt] = field.add(terms.get(pt, field.zero), field.of(coeff))
        base_relations.append(terms)
        add_relation(terms)

    # close the ideal: two-sided path extensions a + rel + b of every base
    # relation, with a and b ranging over all paths (including empty ones)
    path_pool = sorted(all_paths, key=lambda p: (len(p), p))
    for terms in base_relations:
        src, tgt = path_endpoints(next(iter(terms)))
        pres = [a for a in path_pool if not a or path_endpoints(a)[1] == src]
        posts = [b for b in path_pool if not b or path_endpoints(b)[0] == tgt]
        for a in pres:
            for b in posts:
                if not a and not b:
                    continue
                # over-length terms are zero in the truncated model
                ext = {a + q + b: c for q, c in terms.items() if len(a + q + b) <= max_path_length}
                if ext:
                    add_relation(ext)

    # choose basis: paths modulo relation span, per hom pair
    hom_basis: dict = {}
    reduce_maps: dict = {}
    for pair, plist in paths_by_pair.items():
        plist = sorted(set(plist), key=lambda p: (len(p), p))
        rels = rel_vectors.get(pair, [])
        if plist:
            rows = []
            for terms in rels:
                rows.append([terms.get(p, field.zero) for p in plist])
            relmat = Mat.from_rows(field, rows) if rows else Mat(field, 0, len(plist), [])
            red, piv = relmat.rref()
            # basis = paths not reachable as pivot leading terms; reduce others
            lead = {}
            for r_i, pv in enumerate(piv):
                lead[pv] = red.row(r_i)
            basis_idx = [i for i in range(len(plist)) if i not in lead]
            hom_basis[pair] = [plist[i] for i in basis_idx]

            def reduce_vec(vec, lead=lead, basis_idx=basis_idx, n=len(plist)):
                v = list(vec)
                for pv in sorted(lead):
                    if v[pv] != field.zero:
                        c = v[pv]
                        row = lead[pv]
                        for t in range(n):
                            v[t] = field.sub(v[t], field.mul(c, row[t]))
                return [v[i] for i in basis_idx]

            reduce_maps[pair] = (plist, reduce_vec)
        else:
            hom_basis[pair] = []
            reduce_maps[pair] = ([], lambda vec: [])

    # finite-dimensionality: paths of maximal length must all reduce to zero
    for pair, plist in paths_by_pair.items():
        full, reduce_vec = reduce_maps[pair]
        for p in plist:
            if len(p) == max_path_length:
                vec = [field.one if q == p else field.zero for q in full]
                if any(c != field.zero for c in reduce_vec(vec)):
                    raise CategoryError(
                        f"path {'*'.join(p)} of maximal length survives; "
                        "raise max_path_length or add relations"
                    )

    hom_dims = {pair: len(b) for pair, b in hom_basis.items()}
    identities = {}
    comp = {}
    names = {}
    for pair, basis in hom_basis.items():
        for i, p in enumerate(basis):
            names[(pair[0], pair[1], i)] = "*".join(p) if p else f"id_{pair[0]}"

    for v in vertices:
        full, reduce_vec = reduce_maps[(v, v)]
        vec = [field.one if q == () else field.zero for q in full]
        identities[v] = tuple(reduce_vec(vec))

    def path_coords(pair, path):
        full, reduce_vec = reduce_maps[pair]
        if len(path) > max_path_length or path not in set(full):
            return [field.zero] * hom_dims[pair]
        vec = [field.one if q == path else field.zero for q in full]
        return reduce_vec(vec)

    for (x, y), fbasis in hom_basis.items():
        for (y2, z), gbasis in hom_basis.items():
            if y2 != y:
                continue
            for j, fp in enumerate(fbasis):
                for i, gp in enumerate(gbasis):
                    combined = fp + gp  # g∘f traverses f's path first
                    comp[((y, z, i), (x, y, j))] = tuple(path_coords((x, z), combined))

    return FiniteLinearCategory(field, vertices, hom_dims, comp, identities, names)
