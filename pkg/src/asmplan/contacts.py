"""Planar contact detection between a manipulated object and its base.

A contact is a maximal coplanar face-on-face overlap: the two faces are
anti-parallel within an angular tolerance, separated along the normal by
at most the contact tolerance, and overlap with meaningful area. The
contact normal is always the manipulated object's outward face normal,
so an object resting on something carries a (0, 0, -1) contact.

The table is modeled as an entity with a single infinite +Z face at z = 0
under the id "table"; it participates like any other base entity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Polygon
from shapely.ops import unary_union

from .collision import overlap_beyond
from .errors import PenetrationError
from .geometry import DELTA_C, Mesh, _plane_basis

TABLE_ID = "table"
# Contacts with less overlap than this are numerical noise, not support.
A_MIN = 1.0
# Normals within this angle are considered parallel when grouping faces.
EPS_N_DEG = 0.5
# Default half-angle for "this patch supports the object from below".
ALPHA_SUP_DEG = 30.0


@dataclass(frozen=True)
class Contact:
    """One planar contact patch, seen from the manipulated object."""

    normal: np.ndarray      # unit outward normal of the object's contact face
    patch: np.ndarray       # (k, 3) boundary vertices of the overlap region
    counterpart: str        # base part id, or "table"
    area: float             # mm^2

    def __post_init__(self):
        self.normal.flags.writeable = False
        self.patch.flags.writeable = False

    def is_table(self) -> bool:
        return self.counterpart == TABLE_ID


@dataclass(frozen=True)
class ContactSet:
    contacts: tuple
    object_id: str

    def __len__(self):
        return len(self.contacts)

    def __iter__(self):
        return iter(self.contacts)

    def normals(self) -> np.ndarray:
        if not self.contacts:
            return np.zeros((0, 3))
        return np.array([c.normal for c in self.contacts])


def _face_groups(mesh: Mesh, eps_n_deg=EPS_N_DEG, offset_tol=DELTA_C / 2):
    """Cluster triangles into maximal coplanar groups: (normal, offset, tris)."""
    normals = mesh.face_normals()
    areas = mesh.face_areas()
    offsets = np.einsum("ij,ij->i", normals, mesh.tri_array()[:, 0])
    cos_tol = math.cos(math.radians(eps_n_deg))
    groups = []
    reps = []
    for i in range(len(normals)):
        placed = False
        for k, rep in enumerate(reps):
            if np.dot(rep, normals[i]) >= cos_tol:
                for g in groups:
                    if g["dir"] == k and abs(g["offset"] - offsets[i]) <= offset_tol:
                        g["tris"].append(i)
                        placed = True
                        break
                if not placed:
                    groups.append({"dir": k, "offset": offsets[i], "tris": [i]})
                    placed = True
                break
        if not placed:
            reps.append(normals[i])
            groups.append({"dir": len(reps) - 1, "offset": offsets[i], "tris": [i]})
    out = []
    for g in groups:
        idx = np.array(g["tris"])
        w = areas[idx]
        n = (normals[idx] * w[:, None]).sum(axis=0)
        n /= np.linalg.norm(n)
        d = float((offsets[idx] * w).sum() / w.sum())
        out.append((n, d, idx))
    return out


def _group_polygon(mesh: Mesh, idx, basis):
    tris2d = mesh.tri_array()[idx] @ basis.T
    polys = []
    for t in tris2d:
        p = Polygon(t)
        if p.is_valid and p.area > 0:
            polys.append(p)
    if not polys:
        return None
    merged = unary_union(polys)
    if merged.is_empty:
        return None
    return merged


def _rings_to_3d(shape, basis, normal, offset):
    """Exterior ring vertices of a shapely shape, lifted onto the plane."""
    geoms = getattr(shape, "geoms", [shape])
    pts = []
    for g in geoms:
        if g.geom_type != "Polygon" or g.area <= 0:
            continue
        coords = np.asarray(g.exterior.coords[:-1], dtype=float)
        pts.append(coords @ basis + offset * normal)
    if not pts:
        return np.zeros((0, 3))
    return np.vstack(pts)


def detect_contacts(obj: Mesh, bases, include_table=True, object_id="object",
                    delta_c=DELTA_C, eps_n_deg=EPS_N_DEG, a_min=A_MIN) -> ContactSet:
    """Find planar contact patches between `obj` and base entities.

    `bases` is a sequence of (id, Mesh) pairs, already posed in world
    coordinates. Raises PenetrationError when the object interpenetrates
    a base entity (or the table) deeper than `delta_c`: that is a
    malformed assembly, not a contact.
    """
    for base_id, base in bases:
        if overlap_beyond(obj, base, delta_c):
            raise PenetrationError(
                f"{object_id!r} penetrates {base_id!r} deeper than {delta_c} mm")
    if include_table and obj.vertices[:, 2].min() < -delta_c:
        raise PenetrationError(f"{object_id!r} extends below the table plane")

    contacts = []
    obj_groups = _face_groups(obj, eps_n_deg, delta_c / 2)
    base_groups = [(bid, base, _face_groups(base, eps_n_deg, delta_c / 2))
                   for bid, base in bases]
    cos_anti = math.cos(math.radians(180.0 - eps_n_deg))  # ~ -1

    for n_obj, d_obj, idx in obj_groups:
        basis = _plane_basis(n_obj)
        poly_obj = None  # built lazily, reused across counterparts

        if include_table and n_obj[2] <= cos_anti and abs(d_obj) <= delta_c:
            poly_obj = _group_polygon(obj, idx, basis)
            if poly_obj is not None and poly_obj.area >= a_min:
                contacts.append(Contact(
                    normal=n_obj.copy(),
                    patch=_rings_to_3d(poly_obj, basis, n_obj, d_obj),
                    counterpart=TABLE_ID,
                    area=float(poly_obj.area)))

        for base_id, base, groups_b in base_groups:
            for n_base, d_base, idx_b in groups_b:
                if np.dot(n_obj, n_base) > cos_anti:
                    continue  # not anti-parallel
                if abs(d_obj + d_base) > delta_c:
                    continue  # parallel planes but too far apart
                if poly_obj is None:
                    poly_obj = _group_polygon(obj, idx, basis)
                if poly_obj is None:
                    break
                poly_base = _group_polygon(base, idx_b, basis)
                if poly_base is None:
                    continue
                overlap = poly_obj.intersection(poly_base)
                if overlap.is_empty or overlap.area < a_min:
                    continue
                contacts.append(Contact(
                    normal=n_obj.copy(),
                    patch=_rings_to_3d(overlap, basis, n_obj, d_obj),
                    counterpart=base_id,
                    area=float(overlap.area)))
    return ContactSet(tuple(contacts), object_id)


def support_contacts(cs: ContactSet, alpha_sup_deg=ALPHA_SUP_DEG) -> ContactSet:
    """Contacts the object presses down on: normals within alpha of -Z.

    Table contacts always qualify; wall contacts never do.
    """
    cos_lim = math.cos(math.radians(alpha_sup_deg))
    kept = tuple(
        c for c in cs.contacts
        if c.is_table() or -c.normal[2] >= cos_lim)
    return ContactSet(kept, cs.object_id)
