"""Regular Cayley maps carried by skew morphisms.

A sigma-orbit O with 1 not in O, O = O^-1 and <O> = G gives the Cayley map
CM(G, O, rho) with rho = sigma restricted to O; it is regular because rho
extends to the skew morphism sigma.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
import io
from typing import Iterable

import numpy as np

from . import errors
from .group import FiniteGroup
from .kernels import closure
from .skew import SkewMorphism

CSV_FIELDS = ("group", "valency", "orbit", "genus", "faces", "morphism")


@dataclass(frozen=True, eq=False)
class CayleyMap:
    group: FiniteGroup
    s_set: tuple[int, ...]
    regular: bool
    genus: int

    @property
    def rotation(self) -> dict[int, int]:
        s = self.s_set
        return {x: s[(i + 1) % len(s)] for i, x in enumerate(s)}


def _check_s_set(G: FiniteGroup, S: tuple[int, ...]) -> None:
    if 0 in S or len(set(S)) != len(S):
        raise errors.InvalidParameter("S must avoid the identity and have no repeats")
    if {int(G.inverse[x]) for x in S} != set(S):
        raise errors.InvalidParameter("S must be closed under inverses")
    if not closure(G.table, np.array(S, dtype=np.int64)).all():
        raise errors.InvalidParameter("S must generate G")


def trace_faces(G: FiniteGroup, s_set: tuple[int, ...]) -> list[list[tuple[int, int]]]:
    """Face boundary walks; dart (g, x) runs from g to gx, and the next dart
    along a face is (gx, rho(x^-1))."""
    rho = {x: s_set[(i + 1) % len(s_set)] for i, x in enumerate(s_set)}
    seen = set()
    faces = []
    for g in range(G.order):
        for x in s_set:
            if (g, x) in seen:
                continue
            face = []
            d = (g, x)
            while d not in seen:
                seen.add(d)
                face.append(d)
                h = int(G.table[d[0], d[1]])
                d = (h, rho[int(G.inverse[d[1]])])
            faces.append(face)
    return faces


def genus_of(m: CayleyMap) -> int:
    return _genus(m.group, m.s_set)[0]


def _genus(G: FiniteGroup, S: tuple[int, ...]) -> tuple[int, int]:
    V = G.order
    E = G.order * len(S) // 2
    F = len(trace_faces(G, S))
    twice = 2 - V + E - F
    if twice < 0 or twice % 2:
        raise errors.ConstructionInconsistent(f"non-integral genus from V={V}, E={E}, F={F}")
    return twice // 2, F


def cayley_map(G: FiniteGroup, s_set: Iterable[int], regular: bool = False) -> CayleyMap:
    S = tuple(int(x) for x in s_set)
    _check_s_set(G, S)
    return CayleyMap(G, S, regular, _genus(G, S)[0])


def regular_maps_from_skew(s: SkewMorphism) -> list[CayleyMap]:
    """One regular map per generating, inverse-closed sigma-orbit."""
    G = s.group
    out = []
    for orb in s.orbits():
        if 0 in orb or {int(G.inverse[x]) for x in orb} != set(orb):
            continue
        if not closure(G.table, np.array(orb, dtype=np.int64)).all():
            continue
        out.append(CayleyMap(G, tuple(orb), True, _genus(G, tuple(orb))[0]))
    return out


def census(morphisms: Iterable[SkewMorphism]) -> list[dict]:
    """Rows for every regular map from every morphism, in input order."""
    from .theorems import instance_id

    rows = []
    for s in morphisms:
        ref = instance_id(s)
        for m in regular_maps_from_skew(s):
            g, F = _genus(m.group, m.s_set)
            rows.append({"group": m.group.descriptor, "valency": len(m.s_set),
                         "orbit": " ".join(map(str, m.s_set)), "genus": g, "faces": F, "morphism": ref})
    return rows


def census_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
