"""Input descriptors: schema validation and construction of backends.

The canonical wire format is JSON with top-level keys field / backend /
payload / pair? / caps?; a TOML mirror of the same shape is accepted.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Literal, Optional

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from pydantic import BaseModel, Field, field_validator, model_validator

from .category import CategoryError, FiniteLinearCategory, build_path_category
from .exactlin import FieldSpec, Mat
from .extri.base import Caps, ExtriStructure
from .extri.abelian import AbelianBackend
from .extri.stable import StableBackend
from .extri.subcat import SubcategoryBackend
from .extri.table import TableBackend
from .modules import FpModule


class LoadError(ValueError):
    pass


class FieldModel(BaseModel):
    prime: Optional[int] = None
    rationals: Optional[bool] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.prime is None) == (not self.rationals):
            raise ValueError("field must be exactly one of {'prime': p} or {'rationals': true}")
        return self

    def to_spec(self) -> FieldSpec:
        if self.prime is not None:
            return FieldSpec("prime", self.prime)
        return FieldSpec("rationals")


class ArrowModel(BaseModel):
    name: str
    frm: str = Field(alias="from")
    to: str

    model_config = {"populate_by_name": True}


class QuiverModel(BaseModel):
    kind: Literal["quiver"] = "quiver"
    vertices: list[str]
    arrows: list[ArrowModel] = []
    relations: list[list] = []
    max_path_length: int = 4


class ModuleModel(BaseModel):
    dims: dict[str, int]
    maps: dict[str, list[list]] = {}


class AbelianPayload(BaseModel):
    base: QuiverModel
    objects: dict[str, ModuleModel]


class StablePayload(BaseModel):
    base: QuiverModel
    objects: dict[str, ModuleModel]


class SubcategoryPayload(BaseModel):
    parent: "DescriptorModel"
    objects: list[str]


class HomSpaceModel(BaseModel):
    dim: int
    basis: list[str] = []


class ConeModel(BaseModel):
    cone: list[str]
    q: list[list] = []  # per cone summand: coords in Hom(tgt, cone_i)
    r: list[list] = []  # per cone summand: coords in Hom(cone_i, src[1])


class TableCategoryModel(BaseModel):
    objects: list[str]
    homs: dict[str, HomSpaceModel] = {}
    identities: dict[str, list]
    composition: list[list] = []  # triples [f_name, g_name, coeffs] for g∘f


class TableShiftModel(BaseModel):
    objects: dict[str, str]
    matrices: dict[str, list[list]] = {}


class TablePayload(BaseModel):
    category: TableCategoryModel
    shift: TableShiftModel
    cones: dict[str, ConeModel]


class PairModel(BaseModel):
    U: list[str] = []
    V: list[str] = []


class CapsModel(BaseModel):
    mult: int = 2
    exhaust_dim: int = 2
    enum_bound: int = 10_000
    samples: int = 100
    dim_bound: int = 4

    def to_caps(self, seed: int) -> Caps:
        return Caps(
            mult=self.mult,
            exhaust_dim=self.exhaust_dim,
            enum_bound=self.enum_bound,
            samples=self.samples,
            dim_bound=self.dim_bound,
            seed=seed,
        )


class DescriptorModel(BaseModel):
    field: FieldModel
    backend: Literal["abelian", "stable", "subcategory", "table"]
    payload: dict
    pair: Optional[PairModel] = None
    caps: Optional[CapsModel] = None

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(exclude_none=True, by_alias=True), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


SubcategoryPayload.model_rebuild()


def parse_descriptor(data: dict) -> DescriptorModel:
    try:
        return DescriptorModel.model_validate(data)
    except Exception as exc:
        raise LoadError(f"descriptor schema violation: {exc}") from exc


def load_descriptor_file(path: str | Path) -> DescriptorModel:
    path = Path(path)
    text = path.read_bytes()
    if path.suffix == ".toml":
        data = tomllib.loads(text.decode())
    else:
        data = json.loads(text)
    return parse_descriptor(data)


def _build_modules(base: FiniteLinearCategory, objects: dict, field: FieldSpec, arrow_names: set) -> dict:
    out = {}
    name_to_key = {}
    for k in base.all_basis_keys():
        name_to_key[base.basis_name(k)] = k
    for label, model in objects.items():
        for v in model.dims:
            if v not in base.objects:
                raise LoadError(f"object {label!r}: unknown vertex {v!r}")
        for a in model.maps:
            if a not in arrow_names:
                raise LoadError(f"object {label!r}: unknown arrow {a!r}")
        dims = {v: model.dims.get(v, 0) for v in base.objects}
        arrow_mats = {}
        for aname in arrow_names:
            key = name_to_key.get(aname)
            if key is None:
                # the arrow died in the quotient; its action must be zero
                continue
            src, tgt, _ = key
            rows = dims[src]
            cols = dims[tgt]
            mat = model.maps.get(aname)
            if mat is None:
                arrow_mats[aname] = Mat.zeros(field, rows, cols)
            else:
                if len(mat) != rows or any(len(r) != cols for r in mat):
                    raise LoadError(
                        f"object {label!r}: map for {aname!r} must be {rows}x{cols}"
                    )
                arrow_mats[aname] = Mat.from_rows(field, mat) if rows else Mat(field, 0, cols, [])
        action = {}
        for k in base.all_basis_keys():
            name = base.basis_name(k)
            src, tgt, _ = k
            if name.startswith("id_"):
                action[k] = Mat.identity(field, dims[src])
                continue
            prod = None
            for aname in name.split("*"):
                m = arrow_mats[aname]
                prod = m if prod is None else prod @ m
            action[k] = prod if prod is not None else Mat.zeros(field, dims[src], dims[tgt])
        mod = FpModule(base, dims, action)
        bad = mod.validate()
        if bad:
            raise LoadError(f"object {label!r} violates the base relations: {bad[0]}")
        out[label] = mod
    return out


def _quiver_category(q: QuiverModel, field: FieldSpec) -> FiniteLinearCategory:
    try:
        return build_path_category(
            field,
            q.vertices,
            [{"name": a.name, "from": a.frm, "to": a.to} for a in q.arrows],
            q.relations,
            max_path_length=q.max_path_length,
        )
    except CategoryError as exc:
        raise LoadError(str(exc)) from exc


def _table_category(model: TableCategoryModel, field: FieldSpec) -> tuple:
    objects = list(model.objects)
    hom_dims = {}
    basis_names = {}
    name_index = {}
    for x in objects:
        for y in objects:
            spec = model.homs.get(f"{x}->{y}")
            d = spec.dim if spec else 0
            hom_dims[(x, y)] = d
            for i in range(d):
                nm = spec.basis[i] if spec and i < len(spec.basis) else f"{x}->{y}#{i}"
                basis_names[(x, y, i)] = nm
                if nm in name_index:
                    raise LoadError(f"duplicate basis morphism name {nm!r}")
                name_index[nm] = (x, y, i)
    identities = {}
    for x in objects:
        coords = model.identities.get(x)
        if coords is None or len(coords) != hom_dims[(x, x)]:
            raise LoadError(f"identity coordinates for {x!r} malformed")
        identities[x] = tuple(field.of(c) for c in coords)
    comp = {}
    for entry in model.composition:
        if len(entry) != 3:
            raise LoadError("composition entries must be [f, g, coeffs]")
        fname, gname, coeffs = entry
        if fname not in name_index or gname not in name_index:
            raise LoadError(f"composition references unknown basis morphism {fname!r} or {gname!r}")
        fk = name_index[fname]
        gk = name_index[gname]
        if fk[1] != gk[0]:
            raise LoadError(f"composition pair not composable: {fname!r} then {gname!r}")
        pair = (fk[0], gk[1])
        if len(coeffs) != hom_dims[pair]:
            raise LoadError(f"composition coefficients for {gname}∘{fname} must have length {hom_dims[pair]}")
        comp[(gk, fk)] = tuple(field.of(c) for c in coeffs)
    cat = FiniteLinearCategory(field, objects, hom_dims, comp, identities, basis_names)
    return cat, name_index


def build_backend(desc: DescriptorModel, seed: int = 0) -> ExtriStructure:
    field = desc.field.to_spec()
    caps = (desc.caps or CapsModel()).to_caps(seed)
    if desc.backend == "abelian":
        payload = AbelianPayload.model_validate(desc.payload)
        base = _quiver_category(payload.base, field)
        arrow_names = {a.name for a in payload.base.arrows}
        objects = _build_modules(base, payload.objects, field, arrow_names)
        backend = AbelianBackend(base, objects, caps)
    elif desc.backend == "stable":
        payload = StablePayload.model_validate(desc.payload)
        base = _quiver_category(payload.base, field)
        arrow_names = {a.name for a in payload.base.arrows}
        objects = _build_modules(base, payload.objects, field, arrow_names)
        try:
            backend = StableBackend(base, objects, caps)
        except CategoryError as exc:
            raise LoadError(str(exc)) from exc
    elif desc.backend == "subcategory":
        payload = SubcategoryPayload.model_validate(desc.payload)
        parent = build_backend(payload.parent, seed=seed)
        missing = [o for o in payload.objects if o not in parent.cat.objects]
        if missing:
            raise LoadError(f"subcategory references unknown objects: {missing}")
        backend = SubcategoryBackend(parent, tuple(payload.objects), caps)
    elif desc.backend == "table":
        payload = TablePayload.model_validate(desc.payload)
        cat, name_index = _table_category(payload.category, field)
        problems = cat.validate()
        if problems:
            raise LoadError(f"table category invalid: {problems[0]}")
        shift_objects = dict(payload.shift.objects)
        shift_matrices = {}
        for x in cat.objects:
            for y in cat.objects:
                d = cat.hom_dim(x, y)
                key = f"{x}->{y}"
                sx, sy = shift_objects.get(x), shift_objects.get(y)
                if sx is None or sy is None:
                    raise LoadError(f"shift image missing for {x!r} or {y!r}")
                dd = cat.hom_dim(sx, sy)
                mat = payload.shift.matrices.get(key)
                if mat is None:
                    if d != dd:
                        raise LoadError(f"shift matrix required for {key} (dims {d} -> {dd})")
                    shift_matrices[(x, y)] = Mat.identity(field, d)
                else:
                    shift_matrices[(x, y)] = Mat.from_rows(field, mat) if dd else Mat(field, 0, d, [])
        cones = {}
        for name, model in payload.cones.items():
            if name not in name_index:
                raise LoadError(f"cone oracle references unknown morphism {name!r}")
            k = name_index[name]
            src, tgt, _ = k
            cone_fo = tuple(model.cone)
            for l in cone_fo:
                if l not in cat.objects:
                    raise LoadError(f"cone of {name!r} uses unknown object {l!r}")
            qb = []
            rb = []
            from .category import Mor

            for t, lab in enumerate(cone_fo):
                qc = model.q[t] if t < len(model.q) else []
                rc = model.r[t] if t < len(model.r) else []
                if len(qc) != cat.hom_dim(tgt, lab):
                    raise LoadError(f"cone q-coordinates of {name!r} summand {t} malformed")
                stgt = shift_objects[src]
                if len(rc) != cat.hom_dim(lab, stgt):
                    raise LoadError(f"cone r-coordinates of {name!r} summand {t} malformed")
                qb.append(Mor(tgt, lab, tuple(field.of(c) for c in qc)))
                rb.append(Mor(lab, stgt, tuple(field.of(c) for c in rc)))
            cones[k] = (cone_fo, qb, rb)
        missing = [cat.basis_name(k) for k in cat.all_basis_keys() if k not in cones]
        if missing:
            raise LoadError(f"cone oracle entry missing for {missing[0]}")
        backend = TableBackend(cat, shift_objects, shift_matrices, cones, caps)
    else:  # pragma: no cover - pydantic guards the literal
        raise LoadError(f"unknown backend {desc.backend!r}")
    problems = backend.cat.validate()
    if problems:
        raise LoadError(f"presented category invalid: {problems[0]}")
    return backend


def fixtures_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> DescriptorModel:
    path = fixtures_dir() / f"{name}.json"
    if not path.exists():
        raise LoadError(f"unknown fixture {name!r}")
    return load_descriptor_file(path)
