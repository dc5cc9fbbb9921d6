"""Extension-closed full subcategory of a parent backend, with the
restricted extension structure."""

from __future__ import annotations

from ..category import BlockMorphism, Mor
from ..modules import FpModule
from .base import Caps, ETriangle, ExtriError, ExtriStructure


class SubcategoryBackend(ExtriStructure):
    kind = "subcategory"

    def __init__(self, parent: ExtriStructure, objects: tuple, caps: Caps):
        self.parent = parent
        self.subset = tuple(sorted(objects))
        missing = [o for o in self.subset if o not in parent.cat.objects]
        if missing:
            raise ExtriError(f"subcategory objects not in parent: {missing}")
        cat = parent.cat.full_subcategory(self.subset)
        super().__init__(cat, caps)

    def e_dim_pair(self, x: str, z: str) -> int:
        return self.parent.e_dim_pair(x, z)

    def e_module_indec(self, z: str) -> FpModule:
        full = self.parent.e_module_indec(z)
        dims = {x: full.dim(x) for x in self.cat.objects}
        action = {k: full.action[k] for k in self.cat.all_basis_keys()}
        return FpModule(self.cat, dims, action)

    def e_push_pair(self, z_mor: Mor) -> dict:
        full = self.parent.e_push_pair(z_mor)
        return {x: full[x] for x in self.cat.objects}

    def _check_inside(self, fo: tuple):
        outside = [l for l in fo if l not in self.subset]
        if outside:
            raise ExtriError(
                f"extension closure violated: realized object uses {outside}"
            )

    def _restrict_triangle(self, t: ETriangle) -> ETriangle:
        self._check_inside(t.Y)
        return t

    def realize_pair_blocks(self, X: tuple, Z: tuple, delta: tuple) -> ETriangle:
        t = self.parent.realize(X, Z, delta)
        return self._restrict_triangle(t)

    def is_deflation(self, w: BlockMorphism):
        t = self.parent.is_deflation(w)
        if t is None:
            return None
        if any(l not in self.subset for l in t.Z):
            return None
        return t

    def is_inflation(self, w: BlockMorphism):
        t = self.parent.is_inflation(w)
        if t is None:
            return None
        if any(l not in self.subset for l in t.X):
            return None
        return t

    def extension_closed_check(self) -> list:
        problems = []
        one, zero = self.cat.field.one, self.cat.field.zero
        for x in self.cat.objects:
            for z in self.cat.objects:
                d = self.e_dim_pair(x, z)
                for i in range(d):
                    delta = tuple(one if s == i else zero for s in range(d))
                    try:
                        self.realize((x,), (z,), delta)
                    except ExtriError as exc:
                        problems.append(("extension-closure", f"E({x},{z}) basis {i}: {exc}"))
        return problems
