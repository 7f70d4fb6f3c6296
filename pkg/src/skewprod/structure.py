"""Subgroups and characteristic subgroups computed straight from tables."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
import json
from typing import Iterable, Sequence

import numpy as np

from . import errors
from ._search import monomorphisms
from .group import FiniteGroup, small_generating_set
from .kernels import closure

LATTICE_LIMIT = 128
AUT_LIMIT = 64


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    members: tuple[int, ...]
    generators: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, g) -> bool:
        return bool(self.mask[int(g)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and self.parent is other.parent and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, generators={list(self.generators)})"

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.members)] = True
        return m

    def issubset(self, other: "Subgroup") -> bool:
        return set(self.members) <= set(other.members)

    def to_json(self) -> dict:
        return {"members": list(self.members), "generators": list(self.generators)}


def _from_mask(G: FiniteGroup, mask: np.ndarray, gens: Sequence[int] | None = None) -> Subgroup:
    members = tuple(int(x) for x in np.flatnonzero(mask))
    if gens is None:
        gens = _subgroup_gens(G, members)
    return Subgroup(G, members, tuple(int(g) for g in gens))


def _subgroup_gens(G: FiniteGroup, members: Sequence[int]) -> list[int]:
    orders = G.orders()
    gens: list[int] = []
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    for g in sorted(members, key=lambda x: (-orders[x], x)):
        if mask[g]:
            continue
        gens.append(int(g))
        mask = closure(G.table, np.array(gens, dtype=np.int64))
        if mask.sum() == len(members):
            break
    return gens


def subgroup_generated(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = [int(g) for g in gens]
    for g in gens:
        if not 0 <= g < G.order:
            raise errors.InvalidElement(f"element {g} out of range", element=g)
    mask = closure(G.table, np.array(gens, dtype=np.int64))
    return _from_mask(G, mask)


def as_subgroup(G: FiniteGroup, members: Iterable[int]) -> Subgroup:
    """Wrap an element set, checking closure."""
    ms = sorted({int(x) for x in members})
    mask = np.zeros(G.order, dtype=bool)
    mask[ms] = True
    if not ms or not mask[0] or not mask[G.table[np.ix_(ms, ms)]].all():
        raise errors.InvalidSubgroup("element set is not closed under multiplication")
    return _from_mask(G, mask)


def whole(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)), tuple(sorted(G.generators.values())))


def trivial(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (0,), ())


def _check_sub(G: FiniteGroup, H: Subgroup) -> None:
    if H.parent is not G and not H.parent.same_table(G):
        raise errors.InvalidSubgroup("subgroup belongs to a different group")


def intersect(H: Subgroup, K: Subgroup) -> Subgroup:
    return _from_mask(H.parent, H.mask & K.mask)


def join(H: Subgroup, K: Subgroup) -> Subgroup:
    return subgroup_generated(H.parent, list(H.generators) + list(K.generators))


def conjugate_set(G: FiniteGroup, mask: np.ndarray, x: int) -> np.ndarray:
    """Mask of x^-1 H x."""
    T, inv = G.table, G.inverse
    idx = np.flatnonzero(mask)
    out = np.zeros(G.order, dtype=bool)
    out[T[inv[x], T[idx, x]]] = True
    return out


def is_normal(G: FiniteGroup, H: Subgroup) -> bool:
    m = H.mask
    return all(np.array_equal(conjugate_set(G, m, x), m) for x in _group_gens(G))


def _group_gens(G: FiniteGroup) -> list[int]:
    gens = sorted(set(G.generators.values()))
    if closure(G.table, np.array(gens, dtype=np.int64)).all():
        return gens
    return small_generating_set(G.table)


def core_of(G: FiniteGroup, H: Subgroup) -> Subgroup:
    """Largest normal subgroup of G inside H."""
    _check_sub(G, H)
    m = H.mask
    if not m[G.table[np.ix_(H.members, H.members)]].all():
        raise errors.InvalidSubgroup("not a subgroup")
    gens = _group_gens(G)
    while True:
        new = m.copy()
        for x in gens:
            new &= conjugate_set(G, new, x)
        if np.array_equal(new, m):
            return _from_mask(G, m)
        m = new


def center(G: FiniteGroup) -> Subgroup:
    T = G.table
    mask = (T == T.T).all(axis=1)
    return _from_mask(G, mask)


def centralizer(G: FiniteGroup, H: Subgroup) -> Subgroup:
    _check_sub(G, H)
    T = G.table
    hs = list(H.generators) or [0]
    mask = (T[:, hs] == T[hs, :].T).all(axis=1)
    return _from_mask(G, mask)


def normalizer(G: FiniteGroup, H: Subgroup) -> Subgroup:
    _check_sub(G, H)
    m = H.mask
    mask = np.array([np.array_equal(conjugate_set(G, m, x), m) for x in range(G.order)])
    return _from_mask(G, mask)


def nc_quotient_order(G: FiniteGroup, H: Subgroup) -> int:
    """|N_G(H)| / |C_G(H)|."""
    return normalizer(G, H).order // centralizer(G, H).order


def commutator_subgroup(G: FiniteGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    T, inv = G.table, G.inverse
    a = np.array(A.members)
    b = np.array(B.members)
    comms = T[T[inv[a][:, None], inv[b][None, :]], T[a[:, None], b[None, :]]]
    return subgroup_generated(G, np.unique(comms))


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    W = whole(G)
    return commutator_subgroup(G, W, W)


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_p_group(G: FiniteGroup, p: int | None = None) -> bool:
    ps = _prime_factors(G.order)
    return len(ps) <= 1 and (p is None or not ps or ps[0] == p)


def _p_of(G: FiniteGroup) -> int:
    ps = _prime_factors(G.order)
    if len(ps) > 1:
        raise errors.InvalidParameter("group is not a p-group")
    return ps[0] if ps else 2


def omega1(G: FiniteGroup) -> Subgroup:
    p = _p_of(G)
    return subgroup_generated(G, np.flatnonzero(G.orders() <= p))


def mho(G: FiniteGroup, k: int = 1) -> Subgroup:
    p = _p_of(G)
    e = p ** k
    powers = [G.power(g, e) for g in range(G.order)]
    return subgroup_generated(G, sorted(set(powers)))


def frattini(G: FiniteGroup) -> Subgroup:
    """Intersection of the maximal subgroups.

    Nilpotent groups use the product of G'G^p over Sylow subgroups; other
    groups go through the subgroup lattice.
    """
    if G.order == 1:
        return trivial(G)
    if nilpotency_class(G) is not None:
        parts = []
        for p in _prime_factors(G.order):
            P = sylow_p(G, p)
            Pg = induced_group(P)
            Pd = join(derived_subgroup(Pg), mho(Pg, 1))
            parts.extend(P.members[i] for i in Pd.members)
        return subgroup_generated(G, parts)
    subs = all_subgroups(G)
    maximal = [H for H in subs if H.order < G.order
               and not any(H.order < K.order < G.order and H.issubset(K) for K in subs)]
    return reduce(intersect, maximal)


def sylow_p(G: FiniteGroup, p: int) -> Subgroup:
    """Sylow p-subgroup grown from the identity by smallest eligible IDs."""
    if p < 2 or _prime_factors(p) != [p]:
        raise errors.InvalidParameter(f"{p} is not prime")
    target = 1
    n = G.order
    while n % p == 0:
        n //= p
        target *= p
    orders = G.orders()
    ppow = np.array([_prime_factors(int(o)) in ([], [p]) for o in orders])
    P = trivial(G)
    while P.order < target:
        m = P.mask
        for x in range(G.order):
            if ppow[x] and not m[x] and np.array_equal(conjugate_set(G, m, x), m):
                P = subgroup_generated(G, list(P.generators) + [x])
                break
        else:  # pragma: no cover - Sylow theory guarantees a candidate
            raise errors.ConstructionInconsistent("no element extends the p-subgroup")
    return P


def o_p(G: FiniteGroup, p: int) -> Subgroup:
    return core_of(G, sylow_p(G, p))


def fitting(G: FiniteGroup) -> Subgroup:
    gens: list[int] = []
    for p in _prime_factors(G.order):
        gens.extend(o_p(G, p).generators)
    return subgroup_generated(G, gens)


def lower_central_series(G: FiniteGroup) -> list[Subgroup]:
    W = whole(G)
    series = [W]
    while True:
        nxt = commutator_subgroup(G, series[-1], W)
        if nxt.order == series[-1].order:
            return series
        series.append(nxt)


def nilpotency_class(G: FiniteGroup) -> int | None:
    series = lower_central_series(G)
    if series[-1].order != 1:
        return None
    return len(series) - 1


def is_maximal_class_2group(G: FiniteGroup) -> bool:
    n = G.order.bit_length() - 1
    if G.order < 8 or G.order != 1 << n:
        return False
    return nilpotency_class(G) == n - 1


def induced_group(H: Subgroup) -> FiniteGroup:
    """H as a stand-alone group, members relabeled 0..|H|-1 in sorted order."""
    from .group import _freeze

    G = H.parent
    mem = np.array(H.members)
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[mem] = np.arange(len(mem))
    table = pos[G.table[np.ix_(mem, mem)]]
    gens = {f"g{i}": int(pos[g]) for i, g in enumerate(H.generators)}
    return _freeze(table, gens, f"sub:{G.descriptor}:{len(mem)}")


def _bfs_words(G: FiniteGroup, members: Sequence[int], gens: Sequence[int]):
    pos = {g: i for i, g in enumerate(members)}
    order = [0]
    prev = [-1]
    via = [0]
    seen = {0}
    for x in order:
        for j, g in enumerate(gens):
            y = int(G.table[x, g])
            if y not in seen:
                seen.add(y)
                order.append(y)
                prev.append(order.index(x))
                via.append(j)
    assert len(order) == len(members) and set(order) == set(pos)
    return (np.array(order, dtype=np.int64), np.array(prev, dtype=np.int64),
            np.array(via, dtype=np.int64))


def monomorphisms_into(G: FiniteGroup, H: Subgroup, limit: int = 1 << 16):
    """All injective homomorphisms H -> G.

    Returns (members in BFS order, array of images with one row per map).
    """
    gens = list(H.generators) or []
    if H.order == 1:
        return np.array([0], dtype=np.int64), np.zeros((1, 1), dtype=np.int64)
    members, prev, via = _bfs_words(G, H.members, gens)
    out = np.zeros((limit, H.order), dtype=np.int64)
    cnt = monomorphisms(G.table.astype(np.int64), G.orders(), np.array(gens, dtype=np.int64),
                        via, prev, members, out)
    if cnt < 0:
        raise errors.TooLarge("too many monomorphisms")
    return members, out[:cnt]


def aut_order(G: FiniteGroup) -> int:
    """|Aut(G)| by a generator-image scan with a homomorphism check."""
    if G.order > AUT_LIMIT:
        raise errors.TooLarge(f"aut_order capped at order {AUT_LIMIT}")
    W = Subgroup(G, tuple(range(G.order)), tuple(_subgroup_gens(G, range(G.order))))
    if G.order == 1:
        return 1
    members, prev, via = _bfs_words(G, W.members, W.generators)
    return int(monomorphisms(G.table.astype(np.int64), G.orders(), np.array(W.generators, dtype=np.int64),
                             via, prev, members, np.zeros((0, G.order), dtype=np.int64)))


def all_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """Every subgroup, from cyclic subgroups closed under joins. Sorted by (order, members)."""
    if G.order > 1024:
        raise errors.TooLarge("subgroup lattice capped at order 1024")
    T = G.table
    found: dict[bytes, np.ndarray] = {}
    for g in range(G.order):
        m = closure(T, np.array([g], dtype=np.int64))
        found.setdefault(m.tobytes(), m)
    frontier = list(found.values())
    cyclic = list(found.values())
    while frontier:
        nxt = []
        for m in frontier:
            for c in cyclic:
                if (c & ~m).any():
                    gens = np.flatnonzero(m | c)
                    j = closure(T, gens.astype(np.int64))
                    key = j.tobytes()
                    if key not in found:
                        found[key] = j
                        nxt.append(j)
        frontier = nxt
    subs = [_from_mask(G, m) for m in found.values()]
    subs.sort(key=lambda H: (H.order, H.members))
    return subs


def normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """Normal subgroups as joins of normal closures of conjugacy classes."""
    if G.order > LATTICE_LIMIT:
        raise errors.TooLarge(f"normal-subgroup enumeration capped at order {LATTICE_LIMIT}")
    T, inv = G.table, G.inverse
    found: dict[bytes, np.ndarray] = {}
    for g in range(G.order):
        cls = np.unique(T[inv, T[g]])
        m = closure(T, cls.astype(np.int64))
        found.setdefault(m.tobytes(), m)
    base = list(found.values())
    frontier = list(base)
    while frontier:
        nxt = []
        for m in frontier:
            for c in base:
                if (c & ~m).any():
                    j = closure(T, np.flatnonzero(m | c).astype(np.int64))
                    if j.tobytes() not in found:
                        found[j.tobytes()] = j
                        nxt.append(j)
        frontier = nxt
    subs = [_from_mask(G, m) for m in found.values()]
    subs.sort(key=lambda H: (H.order, H.members))
    return subs


@dataclass
class StructureReport:
    center: Subgroup
    derived: Subgroup
    frattini: Subgroup
    fitting: Subgroup
    o2: Subgroup
    nilpotency_class: int | None
    is_maximal_class: bool

    def to_json(self) -> str:
        data = {
            "center": self.center.to_json(),
            "derived": self.derived.to_json(),
            "frattini": self.frattini.to_json(),
            "fitting": self.fitting.to_json(),
            "o2": self.o2.to_json(),
            "nilpotency_class": self.nilpotency_class if self.nilpotency_class is not None
            else "not nilpotent",
            "is_maximal_class": self.is_maximal_class,
        }
        return json.dumps(data, sort_keys=True)


def structure_report(G: FiniteGroup) -> StructureReport:
    return StructureReport(
        center=center(G),
        derived=derived_subgroup(G),
        frattini=frattini(G),
        fitting=fitting(G),
        o2=o_p(G, 2),
        nilpotency_class=nilpotency_class(G),
        is_maximal_class=is_maximal_class_2group(G),
    )
