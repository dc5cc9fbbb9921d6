"""Defects, effaceable functors, the Serre subcategory they span, the
localization to left-exact functors, and the exact/abelian classifier.

Everything runs over an extriangulated backend; the engine owns the
quotient presentation (restriction to the complement of the defect
simples) and the right adjoint given by the finite Kan formula.
"""

from __future__ import annotations

import itertools
import random

from .category import BlockMorphism, enumerate_formal_objects, formal_object
from .exactlin import Mat, is_injective, rank
from .extri.base import Caps, ETriangle, ExtriStructure
from .modules import (
    ExtSpace,
    FpModule,
    ModuleMap,
    Presentation,
    cokernel,
    combine,
    composition_factors,
    decompose,
    element_to_map,
    ext1_dim,
    find_isomorphism,
    hom_module,
    image,
    is_isomorphic_indec,
    kernel,
    realize_extension_from,
    simple_module,
    yoneda,
    yoneda_map,
    zero_map,
)


class Verdict:
    """Boolean result with witnesses and an exhaustiveness flag."""

    def __init__(self, value: bool, exhaustive: bool = True, witness=None):
        self.value = bool(value)
        self.exhaustive = bool(exhaustive)
        self.witness = witness

    def __bool__(self):
        return self.value

    def describe(self) -> dict:
        out = {"value": self.value, "exhaustive": self.exhaustive}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


class DeflocEngine:
    def __init__(self, backend: ExtriStructure):
        self.backend = backend
        self.cat = backend.cat
        self.caps = backend.caps
        self.rng = random.Random(backend.caps.seed + 1)
        self._simples = {x: simple_module(self.cat, x) for x in self.cat.objects}
        self._indec_cache: dict = {}
        self._quotient_cache: dict = {}

    # ---- defects -------------------------------------------------------
    def defect(self, t: ETriangle) -> FpModule:
        ym = yoneda_map(self.cat, t.f)
        C, _ = cokernel(ym)
        return C

    def defect_with_proj(self, t: ETriangle):
        ym = yoneda_map(self.cat, t.f)
        return cokernel(ym)

    def defect_matches_image_of_delta_sharp(self, t: ETriangle) -> bool:
        """The defect is the image of delta_sharp (documented isomorphism)."""
        ds = self.backend.delta_sharp(t)
        I, _, _ = image(ds)
        D = self.defect(t)
        if D.total_dim() != I.total_dim():
            return False
        return find_isomorphism(D, I, self.rng) is not None

    # ---- effaceability -----------------------------------------------------
    def is_effaceable(self, F: FpModule) -> Verdict:
        """Per the kill condition: every element dies under some deflation.

        Uniform witnesses (a deflation with F(f) = 0) settle a whole object;
        otherwise elements are tested one by one.  A negative verdict is
        exact when the witnessing object's deflation enumeration was
        exhaustive; a positive verdict is exact unless element sampling was
        needed.
        """
        if F.is_zero():
            return Verdict(True, True, {"reason": "zero module"})
        f = self.cat.field
        flagged = False
        witnesses = []
        for W in enumerate_formal_objects(self.cat, self.caps.mult, include_zero=False):
            dW = sum(F.dim(l) for l in W)
            if dW == 0:
                continue
            cand = []
            enum_exhaustive = True
            uniform = None
            rot = self._rotation_triangle(W)
            if rot is not None and F.act_block(rot.f).is_zero():
                uniform = rot
            if uniform is None:
                for t, exh in self.backend.deflations_onto(W, lines_only=True, essential_only=True):
                    enum_exhaustive = enum_exhaustive and exh
                    mat = F.act_block(t.f)  # F(W) -> F(Y)
                    if mat.is_zero():
                        uniform = t
                        break
                    cand.append((t, mat))
            if uniform is not None:
                witnesses.append({"object": list(W), "uniform": uniform.describe()})
                continue
            # elementwise search over F(W)
            elements, elem_exhaustive = self._elements_of(F, W)
            flagged = flagged or not elem_exhaustive
            for x in elements:
                killed = None
                xcol = Mat(f, dW, 1, list(x))
                if xcol.is_zero():
                    continue
                for t, mat in cand:
                    if (mat @ xcol).is_zero():
                        killed = t
                        break
                if killed is None:
                    wit = {"object": list(W), "element": [str(c) for c in x]}
                    return Verdict(False, enum_exhaustive, wit)
            witnesses.append({"object": list(W), "elementwise": True})
        return Verdict(True, not flagged, {"objects": witnesses})

    def _rotation_triangle(self, W: tuple):
        """The 0 -> W deflation of a triangulated backend, or None.

        The class is the identity of E(W, W[-1]) = Hom(W, W); trying it
        first short-circuits every effaceability scan over a triangulated
        backend, where it kills everything.
        """
        if not self.backend.every_morphism_conflates():
            return None
        if not hasattr(self.backend, "unshift_fo"):
            return None
        Z = self.backend.unshift_fo(W)
        f = self.cat.field
        offs = self.backend.e_offsets(W, Z)
        delta = [f.zero] * self.backend.e_dim(W, Z)
        for i, x in enumerate(W):
            ident = self.cat.identities[x]
            for s, c in enumerate(ident):
                delta[offs[(i, i)] + s] = c
        return self.backend.realize(W, Z, tuple(delta))

    def _elements_of(self, F: FpModule, W: tuple):
        f = self.cat.field
        d = sum(F.dim(l) for l in W)
        if f.kind == "prime" and f.p**d <= self.caps.enum_bound:
            return [tuple(v) for v in itertools.product(range(f.p), repeat=d)], True
        out = []
        for i in range(d):
            out.append(tuple(f.one if j == i else f.zero for j in range(d)))
        for _ in range(self.caps.samples):
            out.append(tuple(f.rand(self.rng) for _ in range(d)))
        return out, False

    # ---- the defect simples ---------------------------------------------------
    def def_simples(self) -> tuple:
        """Sigma = labels whose extension space against some object is nonzero."""
        out = []
        for x in self.cat.objects:
            if any(self.backend.e_dim_pair(x, z) for z in self.cat.objects):
                out.append(x)
        return tuple(out)

    def sigma_supported(self, F: FpModule, sigma: tuple) -> bool:
        return all(l in sigma for l in composition_factors(F))

    def simple(self, x: str) -> FpModule:
        return self._simples[x]

    # ---- Serre verification -----------------------------------------------------
    def verify_serre(self, sigma: tuple, kk_samples: int = 50) -> list:
        """Failures of the Serre-subcategory claims for the given simples."""
        problems = []
        sigma = tuple(sigma)
        # defects are sigma-supported
        defects = []
        for t in self.backend.enumerate_triangles():
            D = self.defect(t)
            defects.append((t, D))
            bad = [l for l in composition_factors(D) if l not in sigma]
            if bad:
                problems.append(
                    ("defect-membership", {"triangle": t.describe(), "factors_outside": bad})
                )
        # sigma simples are effaceable, others are not
        for x in self.cat.objects:
            v = self.is_effaceable(self.simple(x))
            if bool(v) != (x in sigma):
                problems.append(
                    ("simple-membership", {"label": x, "effaceable": v.describe(), "in_sigma": x in sigma})
                )
        # extension closure of sigma-supported indecomposables
        sig_indecs = [M for M in self.all_indecomposables() if self.sigma_supported(M, sigma) and not M.is_zero()]
        for A in sig_indecs:
            for B in sig_indecs:
                sp = ExtSpace(A, B)
                for rep in sp.reps:
                    E, _, _ = realize_extension_from(sp.pres, B, rep)
                    bad = [l for l in composition_factors(E) if l not in sigma]
                    if bad:
                        problems.append(
                            ("extension-closure", {"middle_dims": E.dims, "factors_outside": bad})
                        )
        # sub/quotient closure via radical series and socle quotients
        for M in sig_indecs:
            from .modules import radical_submodule

            R, _ = radical_submodule(M)
            if not self.sigma_supported(R, sigma):
                problems.append(("submodule-closure", {"dims": M.dims}))
        # kernel/cokernel closure of defects under random defect morphisms
        if defects:
            pool = [D for _, D in defects if not D.is_zero()]
            if pool:
                for _ in range(kk_samples):
                    A = pool[self.rng.randrange(len(pool))]
                    B = pool[self.rng.randrange(len(pool))]
                    basis = hom_module(A, B)
                    if not basis:
                        continue
                    coeffs = [self.cat.field.rand(self.rng) for _ in basis]
                    phi = combine(basis, coeffs)
                    K, _ = kernel(phi)
                    C, _ = cokernel(phi)
                    for name, M in (("kernel", K), ("cokernel", C)):
                        bad = [l for l in composition_factors(M) if l not in sigma]
                        if bad:
                            problems.append(
                                (f"{name}-closure", {"dims": M.dims, "factors_outside": bad})
                            )
        return problems

    # ---- left exactness and the perpendicular test -------------------------------
    def is_left_exact(self, F: FpModule) -> Verdict:
        exhaustive = True
        for t in self.backend.enumerate_triangles():
            Ff = F.act_block(t.f)  # F(X) -> F(Y)
            Fg = F.act_block(t.g)  # F(Y) -> F(Z)
            if not is_injective(Ff):
                return Verdict(False, True, {"triangle": t.describe(), "at": "mono"})
            if not (Fg @ Ff).is_zero() or rank(Ff) != Fg.cols - rank(Fg):
                return Verdict(False, True, {"triangle": t.describe(), "at": "middle"})
        return Verdict(True, exhaustive)

    def perp_test(self, F: FpModule, sigma: tuple | None = None) -> Verdict:
        sigma = self.def_simples() if sigma is None else sigma
        for x in sigma:
            S = self.simple(x)
            if hom_module(S, F):
                return Verdict(False, True, {"label": x, "hom": "nonzero"})
            if ext1_dim(S, F):
                return Verdict(False, True, {"label": x, "ext1": "nonzero"})
        return Verdict(True, True)

    # ---- quotient presentation -----------------------------------------------------
    def quotient_labels(self, sigma: tuple) -> tuple:
        return tuple(x for x in self.cat.objects if x not in sigma)

    def quotient_category(self, sigma: tuple):
        key = tuple(sigma)
        if key not in self._quotient_cache:
            self._quotient_cache[key] = self.cat.full_subcategory(self.quotient_labels(sigma))
        return self._quotient_cache[key]

    def restrict_module(self, F: FpModule, sigma: tuple) -> FpModule:
        sub = self.quotient_category(sigma)
        dims = {x: F.dim(x) for x in sub.objects}
        action = {k: F.action[k] for k in sub.all_basis_keys()}
        return FpModule(sub, dims, action)

    def restrict_map(self, phi: ModuleMap, sigma: tuple) -> ModuleMap:
        sub = self.quotient_category(sigma)
        return ModuleMap(
            self.restrict_module(phi.src, sigma),
            self.restrict_module(phi.tgt, sigma),
            {x: phi.mats[x] for x in sub.objects},
        )

    def e_functor(self, fo: tuple, sigma: tuple) -> FpModule:
        return self.restrict_module(self.backend.yoneda_module(fo), sigma)

    def right_adjoint(self, N: FpModule, sigma: tuple) -> FpModule:
        """R(N)(X) = Hom over the quotient of (res yoneda X, N)."""
        sub = N.cat
        f = self.cat.field
        bases = {}
        for x in self.cat.objects:
            bases[x] = hom_module(self.e_functor((x,), sigma), N)
        dims = {x: len(bases[x]) for x in self.cat.objects}
        action = {}
        for k in self.cat.all_basis_keys():
            x, y, _ = k
            u = self.cat.basis_mor(k)
            ru = self.restrict_map(yoneda_map(self.cat, BlockMorphism((x,), (y,), ((u,),))), sigma)
            cols = []
            for b in bases[y]:
                comp = b.compose(ru)
                coords = _coords_in(bases[x], comp)
                cols.append(coords)
            action[k] = (
                Mat(f, dims[x], dims[y], [cols[j][i] for i in range(dims[x]) for j in range(len(cols))])
                if cols
                else Mat(f, dims[x], 0, [])
            )
        return FpModule(self.cat, dims, action)

    def unit_map(self, F: FpModule, sigma: tuple) -> ModuleMap:
        """F -> R(Q F) by the Yoneda-element formula."""
        f = self.cat.field
        QF = self.restrict_module(F, sigma)
        RQ = self.right_adjoint(QF, sigma)
        bases = {x: hom_module(self.e_functor((x,), sigma), QF) for x in self.cat.objects}
        mats = {}
        for x in self.cat.objects:
            cols = []
            for j in range(F.dim(x)):
                v = Mat(f, F.dim(x), 1, [f.one if i == j else f.zero for i in range(F.dim(x))])
                elem = element_to_map(self.cat, (x,), F, v)
                res = self.restrict_map(elem, sigma)
                cols.append(_coords_in(bases[x], res))
            mats[x] = (
                Mat(f, RQ.dim(x), F.dim(x), [cols[j][i] for i in range(RQ.dim(x)) for j in range(len(cols))])
                if cols
                else Mat(f, RQ.dim(x), 0, [])
            )
        return ModuleMap(F, RQ, mats)

    def counit_map(self, N: FpModule, sigma: tuple) -> ModuleMap:
        """Q(R N) -> N: evaluate a natural map at the identity element."""
        sub = N.cat
        f = self.cat.field
        bases = {x: hom_module(self.e_functor((x,), sigma), N) for x in self.cat.objects}
        QR = self.restrict_module(self.right_adjoint(N, sigma), sigma)
        mats = {}
        for p in sub.objects:
            cols = []
            for b in bases[p]:
                # evaluate at id_p inside res yoneda(p)(p) = Hom(p, p)
                idvec = Mat(f, sub.hom_dim(p, p), 1, list(sub.identities[p]))
                val = b.mats[p] @ idvec
                cols.append([val[i, 0] for i in range(val.rows)])
            mats[p] = (
                Mat(f, N.dim(p), QR.dim(p), [cols[j][i] for i in range(N.dim(p)) for j in range(len(cols))])
                if cols
                else Mat(f, N.dim(p), 0, [])
            )
        return ModuleMap(QR, N, mats)

    # ---- indecomposables of mod C (closure sweep) ----------------------------------
    def all_indecomposables(self, bound: int | None = None) -> list:
        """Indecomposables found by closing simples and representables under
        kernels, cokernels, images and extensions, up to a dimension bound."""
        if bound is None:
            bound = max(
                (self.backend.yoneda_module((x,)).total_dim() for x in self.cat.objects),
                default=0,
            ) + 2
        key = bound
        if key in self._indec_cache:
            return self._indec_cache[key]
        found: list = []

        def register(M: FpModule) -> bool:
            added = False
            for piece in decompose(M, self.rng):
                if piece.is_zero() or piece.total_dim() > bound:
                    continue
                if any(is_isomorphic_indec(piece, N) for N in found):
                    continue
                found.append(piece)
                added = True
            return added

        for x in self.cat.objects:
            register(self.simple(x))
            register(self.backend.yoneda_module((x,)))
        changed = True
        sweeps = 0
        while changed and sweeps < 8:
            sweeps += 1
            changed = False
            current = list(found)
            for A in current:
                for B in current:
                    for phi in hom_module(A, B):
                        K, _ = kernel(phi)
                        C, _ = cokernel(phi)
                        I, _, _ = image(phi)
                        for M in (K, C, I):
                            if 0 < M.total_dim() <= bound and register(M):
                                changed = True
                    sp = ExtSpace(A, B)
                    for rep in sp.reps:
                        E, _, _ = realize_extension_from(sp.pres, B, rep)
                        if E.total_dim() <= bound and register(E):
                            changed = True
        self._indec_cache[key] = found
        return found

    # ---- theorem A ---------------------------------------------------------------
    def theorem_a_classifier(self) -> dict:
        sigma = self.def_simples()
        labels = self.quotient_labels(sigma)
        sub = self.quotient_category(sigma)
        out = {"sigma": list(sigma), "quotient_objects": list(labels)}
        exhaustive = True
        # (a) exactness: enumerated conflations restrict to short exact sequences
        exact_ok = True
        exact_witness = None
        for t in self.backend.enumerate_triangles():
            yg = self.restrict_map(yoneda_map(self.cat, t.g), sigma)
            yf = self.restrict_map(yoneda_map(self.cat, t.f), sigma)
            for w in labels:
                gm, fm = yg.mats[w], yf.mats[w]
                ok = (
                    is_injective(gm)
                    and (fm @ gm).is_zero()
                    and rank(gm) == fm.cols - rank(fm)
                    and rank(fm) == fm.rows
                )
                if not ok:
                    exact_ok = False
                    exact_witness = {"triangle": t.describe(), "at": w}
                    break
            if not exact_ok:
                break
        out["exact"] = exact_ok
        if exact_witness:
            out["exact_witness"] = exact_witness
        # (b) fully faithful
        ff_ok = True
        ff_witness = None
        for x in self.cat.objects:
            for y in self.cat.objects:
                dim_c = self.cat.hom_dim(x, y)
                EX = self.e_functor((x,), sigma)
                EY = self.e_functor((y,), sigma)
                hom_q = hom_module(EX, EY)
                # the induced map on a basis of Hom_C(x, y)
                mats = []
                for i in range(dim_c):
                    u = self.cat.basis_mor((x, y, i))
                    ru = self.restrict_map(
                        yoneda_map(self.cat, BlockMorphism((x,), (y,), ((u,),))), sigma
                    )
                    mats.append(_coords_in(hom_q, ru))
                inj = True
                if dim_c:
                    m = Mat.from_rows(self.cat.field, mats)
                    inj = rank(m) == dim_c
                if not inj or dim_c != len(hom_q):
                    ff_ok = False
                    ff_witness = {
                        "pair": [x, y],
                        "hom_dim": dim_c,
                        "quotient_hom_dim": len(hom_q),
                        "injective": inj,
                    }
                    break
            if not ff_ok:
                break
        out["fully_faithful"] = ff_ok
        if ff_witness:
            out["fully_faithful_witness"] = ff_witness
        # (c) density: every indecomposable quotient module is hit
        dense_ok = True
        dense_witness = None
        images = []
        for x in self.cat.objects:
            img = self.e_functor((x,), sigma)
            images.extend(decompose(img, self.rng))
        quotient_engine = _QuotientIndecs(sub, self.rng)
        quotient_indecs = quotient_engine.enumerate(
            max((m.total_dim() for m in images), default=0) + 2
        )
        hit = []
        for N in quotient_indecs:
            matched = any(is_isomorphic_indec(N, M) for M in images if not M.is_zero())
            hit.append(matched)
            if not matched:
                dense_ok = False
                dense_witness = {"dims": N.dims}
        out["dense"] = dense_ok
        out["quotient_indecomposables"] = len(quotient_indecs)
        if dense_witness:
            out["dense_witness"] = dense_witness
        flags = self.backend.classify_structure()
        out["structure_flags"] = {
            k: flags[k]
            for k in ("all_inflations_mono", "all_deflations_epi", "every_morphism_conflation")
        }
        out["is_exact_embedding"] = bool(exact_ok and ff_ok)
        out["is_abelian_equivalence"] = bool(exact_ok and ff_ok and dense_ok)
        out["cross_validated"] = (
            out["is_exact_embedding"]
            == (flags["all_inflations_mono"] and flags["all_deflations_epi"])
        )
        return out

    # ---- enough projectives and the recollement checks ------------------------------
    def projectives(self) -> tuple:
        return tuple(
            x
            for x in self.cat.objects
            if all(self.backend.e_dim_pair(x, z) == 0 for z in self.cat.objects)
        )

    def enough_projectives(self) -> dict:
        projs = self.projectives()
        out = {"projectives": list(projs), "witnesses": {}, "ok": True}
        if not projs and self.cat.objects:
            # zero covers everything in a triangulated backend, but a cover
            # family without nonzero projectives makes every downstream
            # claim vacuous; report the degenerate case as a failure
            out["ok"] = False
            out["reason"] = "no nonzero projectives"
            return out
        for c in self.cat.objects:
            witness = None
            for t, _ in self.backend.deflations_onto((c,), lines_only=True, essential_only=True):
                if all(l in projs for l in t.Y):
                    witness = t.describe()
                    break
            if witness is None:
                out["ok"] = False
                out["witnesses"][c] = None
            else:
                out["witnesses"][c] = witness
        return out

    def res_p_check(self, n_samples: int = 20) -> dict:
        sigma = self.def_simples()
        projs = self.projectives()
        out = {"projectives": list(projs), "sigma": list(sigma)}
        ep = self.enough_projectives()
        out["enough_projectives"] = ep["ok"]
        if not ep["ok"]:
            out["skipped"] = "no enough-projectives witness within caps"
            return out
        # (i) the quotient is module theory over the projectives
        out["quotient_is_mod_projectives"] = tuple(self.quotient_labels(sigma)) == tuple(
            sorted(projs)
        )
        # (ii) defect modules = modules vanishing on projectives
        agree = True
        witness = None
        for M in self.all_indecomposables():
            vanishes = all(M.dim(p) == 0 for p in projs)
            supported = self.sigma_supported(M, sigma)
            if vanishes != supported:
                agree = False
                witness = {"dims": M.dims}
                break
        out["def_equals_vanishing_on_projectives"] = agree
        if witness:
            out["vanishing_witness"] = witness
        # (iii) adjunction triangle identities and the section image
        tri_ok = True
        perp_ok = True
        for _ in range(n_samples):
            F = self._random_module()
            QF = self.restrict_module(F, sigma)
            eta = self.unit_map(F, sigma)
            eps = self.counit_map(QF, sigma)
            comp = eps.compose(self.restrict_map(eta, sigma))
            for p in QF.cat.objects:
                if comp.mats[p] != Mat.identity(self.cat.field, QF.dim(p)):
                    tri_ok = False
            RN = self.right_adjoint(QF, sigma)
            if not self.perp_test(RN, sigma):
                perp_ok = False
            # second identity: R(eps) ∘ eta_{R N} = id_{R N}
            eta_r = self.unit_map(RN, sigma)
            r_eps = self._right_adjoint_on_map(eps, sigma)
            comp2 = r_eps.compose(eta_r)
            for x in self.cat.objects:
                if comp2.mats[x] != Mat.identity(self.cat.field, RN.dim(x)):
                    tri_ok = False
        out["triangle_identities"] = tri_ok
        out["section_image_perpendicular"] = perp_ok
        out["pass"] = bool(
            out["quotient_is_mod_projectives"] and agree and tri_ok and perp_ok
        )
        return out

    def _right_adjoint_on_map(self, phi: ModuleMap, sigma: tuple) -> ModuleMap:
        """R on morphisms: postcomposition on the Kan formula."""
        f = self.cat.field
        src_b = {x: hom_module(self.e_functor((x,), sigma), phi.src) for x in self.cat.objects}
        tgt_b = {x: hom_module(self.e_functor((x,), sigma), phi.tgt) for x in self.cat.objects}
        R_src = self.right_adjoint(phi.src, sigma)
        R_tgt = self.right_adjoint(phi.tgt, sigma)
        mats = {}
        for x in self.cat.objects:
            cols = [_coords_in(tgt_b[x], phi.compose(b)) for b in src_b[x]]
            mats[x] = (
                Mat(f, R_tgt.dim(x), R_src.dim(x), [cols[j][i] for i in range(R_tgt.dim(x)) for j in range(len(cols))])
                if cols
                else Mat(f, R_tgt.dim(x), 0, [])
            )
        return ModuleMap(R_src, R_tgt, mats)

    def _random_module(self) -> FpModule:
        """Random cokernel of a map between small projectives."""
        labels = list(self.cat.objects)
        fo1 = tuple(self.rng.choice(labels) for _ in range(self.rng.randrange(1, 3)))
        fo0 = tuple(self.rng.choice(labels) for _ in range(self.rng.randrange(1, 3)))
        Y1 = self.backend.yoneda_module(fo1)
        Y0 = self.backend.yoneda_module(fo0)
        basis = hom_module(Y1, Y0)
        if not basis:
            return Y0
        phi = combine(basis, [self.cat.field.rand(self.rng) for _ in basis])
        C, _ = cokernel(phi)
        return C

    # ---- invariants used by the certificate layer ------------------------------------
    def q_right_exactness_check(self) -> list:
        """Restriction of each defect presentation is right exact with Q(defect)=0."""
        problems = []
        sigma = self.def_simples()
        for t in self.backend.enumerate_triangles():
            D, proj = self.defect_with_proj(t)
            QD = self.restrict_module(D, sigma)
            if QD.total_dim() != 0:
                problems.append(("defect-not-killed", t.describe()))
                continue
            yf = self.restrict_map(yoneda_map(self.cat, t.f), sigma)
            for w in QD.cat.objects:
                if rank(yf.mats[w]) != yf.mats[w].rows:
                    problems.append(("restriction-not-right-exact", t.describe()))
                    break
        return problems


class _QuotientIndecs:
    """Closure enumeration of indecomposables over a plain category."""

    def __init__(self, cat, rng):
        self.cat = cat
        self.rng = rng

    def enumerate(self, bound: int) -> list:
        found: list = []

        def register(M: FpModule) -> bool:
            added = False
            for piece in decompose(M, self.rng):
                if piece.is_zero() or piece.total_dim() > bound:
                    continue
                if any(is_isomorphic_indec(piece, N) for N in found):
                    continue
                found.append(piece)
                added = True
            return added

        if not self.cat.objects:
            return []
        for x in self.cat.objects:
            register(simple_module(self.cat, x))
            register(yoneda(self.cat, (x,)))
        changed = True
        sweeps = 0
        while changed and sweeps < 8:
            sweeps += 1
            changed = False
            current = list(found)
            for A in current:
                for B in current:
                    for phi in hom_module(A, B):
                        K, _ = kernel(phi)
                        C, _ = cokernel(phi)
                        I, _, _ = image(phi)
                        for M in (K, C, I):
                            if 0 < M.total_dim() <= bound and register(M):
                                changed = True
                    sp = ExtSpace(A, B)
                    for rep in sp.reps:
                        E, _, _ = realize_extension_from(sp.pres, B, rep)
                        if E.total_dim() <= bound and register(E):
                            changed = True
        return found


def _coords_in(basis: list, target: ModuleMap) -> list:
    from .modules import coords_in_basis

    if not basis:
        return []
    c = coords_in_basis(basis, target)
    if c is None:
        raise RuntimeError("map escaped the computed hom basis")
    return c


def lex_approximation_abelian(engine: DeflocEngine, F: FpModule):
    """(S, phi, G, psi) over a backend with enough projectives.

    G is the section image of the restriction with psi the unit; S is a sum
    of defects covering ker(psi), produced from effaceability witnesses.
    """
    sigma = engine.def_simples()
    psi = engine.unit_map(F, sigma)
    G = psi.tgt
    K, kinc = kernel(psi)
    if K.is_zero():
        S = FpModule.zero(engine.cat)
        return S, zero_map(S, F), G, psi
    from .modules import generator_epi

    fo, epi = generator_epi(K)
    cat = engine.cat
    f = cat.field
    pieces = []
    off = {x: 0 for x in cat.objects}
    for pos, l in enumerate(fo):
        # the generator element of this summand inside K(l)
        idvec = Mat(f, cat.hom_dim(l, l), 1, list(cat.identities[l]))
        sel_rows = K.dim(l)
        sel_cols = cat.hom_dim(l, l)
        start = sum(cat.hom_dim(l, fo[p]) for p in range(pos))
        sel = Mat(
            f, epi.src.dim(l), sel_cols,
            [f.one if i == start + j else f.zero for i in range(epi.src.dim(l)) for j in range(sel_cols)],
        )
        x_elem = epi.mats[l] @ sel @ idvec  # element of K(l)
        if x_elem.is_zero():
            continue
        # search a deflation killing the element inside F (elements of K are
        # elements of F through the inclusion)
        target = kinc.mats[l] @ x_elem
        witness = None
        for t, _ in engine.backend.deflations_onto((l,), lines_only=True, essential_only=True):
            mat = F.act_block(t.f)
            if (mat @ target).is_zero():
                witness = t
                break
        if witness is None:
            raise RuntimeError("kernel of the unit is not effaceable within caps")
        D, proj = engine.defect_with_proj(witness)
        # x factors through the defect: it kills (-, f); the induced map
        # sends the defect onto the cyclic submodule generated by x
        elem_map = element_to_map(cat, (l,), F, target)
        ym = yoneda_map(cat, witness.f)
        from .modules import factor_through_cokernel

        dmap = factor_through_cokernel(proj, elem_map)
        pieces.append(dmap)
    if not pieces:
        S = FpModule.zero(engine.cat)
        return S, zero_map(S, F), G, psi
    S = pieces[0].src
    for p in pieces[1:]:
        S = S.direct_sum(p.src)
    mats = {}
    for x in cat.objects:
        m = None
        for p in pieces:
            m = p.mats[x] if m is None else m.hstack(p.mats[x])
        mats[x] = m
    phi = ModuleMap(S, F, mats)
    return S, phi, G, psi
