"""Finite groups as multiplication tables over dense element IDs.

Element 0 is always the identity. Presented 2-groups of maximal class use
the labeling a^i b^j -> 2*i + j, cyclic groups c^i -> i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
from typing import Mapping, Sequence

import numpy as np

from . import errors
from .kernels import closure, element_orders, first_nonassociative, is_latin

EXHAUSTIVE_ASSOC_LIMIT = 512
ASSOC_SAMPLES = 1_000_000
ISO_LIMIT = 512


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: np.ndarray
    inverse: np.ndarray
    generators: Mapping[str, int]
    descriptor: str
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    @property
    def identity(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.descriptor!r}, order={self.order})"

    def gen(self, name: str) -> int:
        return int(self.generators[name])

    def orders(self) -> np.ndarray:
        if "orders" not in self._cache:
            arr = element_orders(self.table)
            arr.setflags(write=False)
            self._cache["orders"] = arr
        return self._cache["orders"]

    def power(self, g: int, e: int) -> int:
        g = _check(self, g)
        e %= int(self.orders()[g])
        x = 0
        for _ in range(e):
            x = int(self.table[x, g])
        return x

    def word(self, *parts) -> int:
        """Evaluate a word given as (generator name, exponent) pairs."""
        x = 0
        for name, e in parts:
            x = int(self.table[x, self.power(self.gen(name), e)])
        return x

    def same_table(self, other: "FiniteGroup") -> bool:
        return self.order == other.order and np.array_equal(self.table, other.table)


def _check(G: FiniteGroup, g) -> int:
    g = int(g)
    if not 0 <= g < G.order:
        raise errors.InvalidElement(f"element {g} out of range for order {G.order}", element=g)
    return g


def _freeze(table: np.ndarray, gens: Mapping[str, int], descriptor: str) -> FiniteGroup:
    table = np.ascontiguousarray(table, dtype=np.int32)
    inverse = np.argmin(table, axis=1).astype(np.int32)  # the 0 in row g sits at g^-1
    table.setflags(write=False)
    inverse.setflags(write=False)
    return FiniteGroup(table, inverse, dict(gens), descriptor)


# ---------------------------------------------------------------- builders

def build_cyclic(n: int) -> FiniteGroup:
    if int(n) < 1:
        raise errors.InvalidParameter("cyclic order must be positive", n=n)
    n = int(n)
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    return _freeze(table, {"c": 1 % n}, f"cyclic:{n}")


def _metacyclic_by_involution(m: int, e: int, z: int, descriptor: str) -> FiniteGroup:
    """Group <a, b> with a^m = 1, b a b^-1 = a^e, b^2 = a^z on IDs 2i + j."""
    n = 2 * m
    ids = np.arange(n)
    i, j = ids // 2, ids % 2
    ei = np.where(j == 1, e % m, 1)
    ai = (i[:, None] + ei[:, None] * i[None, :]) % m
    jj = j[:, None] + j[None, :]
    ai = (ai + np.where(jj == 2, z, 0)) % m
    table = 2 * ai + jj % 2
    return _freeze(table, {"a": 2 % n, "b": 1}, descriptor)


def build_dihedral(order: int) -> FiniteGroup:
    order = int(order)
    if order < 4 or order % 2:
        raise errors.InvalidParameter("dihedral order must be even and at least 4", order=order)
    return _metacyclic_by_involution(order // 2, -1, 0, f"dihedral:{order}")


def build_quaternion(order: int) -> FiniteGroup:
    order = int(order)
    if order < 8 or order % 4:
        raise errors.InvalidParameter("quaternion order must be >= 8 and divisible by 4", order=order)
    m = order // 2
    return _metacyclic_by_involution(m, -1, m // 2, f"quaternion:{order}")


def build_semidihedral(order: int) -> FiniteGroup:
    order = int(order)
    if order < 16 or order & (order - 1):
        raise errors.InvalidParameter("semidihedral order must be 2^n with n >= 4", order=order)
    m = order // 2
    return _metacyclic_by_involution(m, -1 + m // 2, 0, f"semidihedral:{order}")


def from_cayley_table(table: Sequence[Sequence[int]], generators: Mapping[str, int] | None = None,
                      descriptor: str | None = None) -> FiniteGroup:
    """Validate a Cayley table and return it as a group with identity 0.

    If the identity sits elsewhere, it is swapped with label 0.
    """
    T = np.asarray(table)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise errors.NotAGroup("table must be a non-empty square array")
    if not np.issubdtype(T.dtype, np.integer):
        raise errors.NotAGroup("table entries must be integers")
    n = T.shape[0]
    T = T.astype(np.int64)
    if not is_latin(T):
        raise errors.NotAGroup("table is not a Latin square")
    idx = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(T[e], idx) and np.array_equal(T[:, e], idx)]
    if not ids:
        raise errors.NotAGroup("table has no two-sided identity")
    e = ids[0]
    if e != 0:
        perm = idx.copy()
        perm[[0, e]] = perm[[e, 0]]  # involution: old label -> new label
        T = perm[T[np.ix_(perm, perm)]]
        if generators:
            generators = {k: int(perm[v]) for k, v in generators.items()}
    samples = 0 if n <= EXHAUSTIVE_ASSOC_LIMIT else ASSOC_SAMPLES
    bad = first_nonassociative(T, samples)
    if bad is not None:
        raise errors.NotAGroup(f"associativity fails at {bad}", triple=bad)
    if not generators:
        generators = {f"g{i}": g for i, g in enumerate(small_generating_set(T))}
    if descriptor is None:
        digest = hashlib.sha256(np.ascontiguousarray(T, dtype=np.int32).tobytes()).hexdigest()[:16]
        descriptor = f"table:{n}:{digest}"
    return _freeze(T, generators, descriptor)


def verify_group_table(G: FiniteGroup) -> None:
    """Re-run the construction-time checks on an existing group."""
    T = G.table
    if not is_latin(T):
        raise errors.NotAGroup("table is not a Latin square")
    if not np.array_equal(T[0], np.arange(G.order)) or not np.array_equal(T[:, 0], np.arange(G.order)):
        raise errors.NotAGroup("0 is not the identity")
    samples = 0 if G.order <= EXHAUSTIVE_ASSOC_LIMIT else ASSOC_SAMPLES
    bad = first_nonassociative(T, samples)
    if bad is not None:
        raise errors.NotAGroup(f"associativity fails at {bad}", triple=bad)


def small_generating_set(table: np.ndarray) -> list[int]:
    """Greedy generating set: repeatedly add the highest-order element outside."""
    T = np.asarray(table)
    n = T.shape[0]
    orders = element_orders(T)
    by_order = sorted(range(n), key=lambda g: (-orders[g], g))
    gens: list[int] = []
    mask = np.zeros(n, dtype=bool)
    mask[0] = True
    for g in by_order:
        if mask.all():
            break
        if not mask[g]:
            gens.append(g)
            mask = closure(T, np.array(gens, dtype=np.int64))
    return gens


# ---------------------------------------------------------------- arithmetic

def multiply(G: FiniteGroup, g: int, h: int) -> int:
    return int(G.table[_check(G, g), _check(G, h)])


def order_of(G: FiniteGroup, g: int) -> int:
    return int(G.orders()[_check(G, g)])


def conjugate(G: FiniteGroup, g: int, h: int) -> int:
    """g^h = h^-1 g h."""
    g, h = _check(G, g), _check(G, h)
    return int(G.table[G.inverse[h], G.table[g, h]])


def commutator(G: FiniteGroup, g: int, h: int) -> int:
    """[g, h] = g^-1 h^-1 g h."""
    g, h = _check(G, g), _check(G, h)
    T, inv = G.table, G.inverse
    return int(T[T[inv[g], inv[h]], T[g, h]])


def class_sizes(G: FiniteGroup) -> np.ndarray:
    """Conjugacy class size of each element."""
    if "class_sizes" not in G._cache:
        T, inv = G.table, G.inverse
        sizes = np.empty(G.order, dtype=np.int64)
        for g in range(G.order):
            sizes[g] = np.unique(T[inv, T[g]]).size
        sizes.setflags(write=False)
        G._cache["class_sizes"] = sizes
    return G._cache["class_sizes"]


def extend_homomorphism(G: FiniteGroup, H: FiniteGroup, images: Mapping[int, int]) -> np.ndarray | None:
    """Extend generator images to a full map G -> H, or None if not a homomorphism.

    The keys of ``images`` must generate G.
    """
    gens = list(images)
    f = np.full(G.order, -1, dtype=np.int64)
    f[0] = 0
    queue = [0]
    TG, TH = G.table, H.table
    for x in queue:
        for g in gens:
            y = TG[x, g]
            val = TH[f[x], images[g]]
            if f[y] == -1:
                f[y] = val
                queue.append(int(y))
            elif f[y] != val:
                return None
    if (f < 0).any():
        raise errors.InvalidParameter("generator images do not cover a generating set")
    return f


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> dict[int, int] | None:
    """Generator-image witness of an isomorphism G -> H, or None.

    Candidate images are restricted to elements with the same order and
    conjugacy-class size before backtracking.
    """
    if G.order != H.order:
        return None
    if G.order > ISO_LIMIT:
        raise errors.TooLarge(f"isomorphism search capped at order {ISO_LIMIT}")
    og, oh = G.orders(), H.orders()
    cg, ch = class_sizes(G), class_sizes(H)
    prof_g = sorted(zip(og.tolist(), cg.tolist()))
    prof_h = sorted(zip(oh.tolist(), ch.tolist()))
    if prof_g != prof_h:
        return None
    gens = small_generating_set(G.table)
    cands = [[h for h in range(H.order) if oh[h] == og[g] and ch[h] == cg[g]] for g in gens]
    chosen: list[int] = []

    def rec(i: int):
        if i == len(gens):
            images = dict(zip(gens, chosen))
            f = extend_homomorphism(G, H, images)
            if f is not None and np.unique(f).size == H.order:
                return images
            return None
        for h in cands[i]:
            chosen.append(h)
            # prune: the partial images must generate a subgroup of the right size
            sub_g = closure(G.table, np.array(gens[: i + 1], dtype=np.int64)).sum()
            sub_h = closure(H.table, np.array(chosen, dtype=np.int64)).sum()
            if sub_g == sub_h:
                res = rec(i + 1)
                if res is not None:
                    return res
            chosen.pop()
        return None

    return rec(0)


# ---------------------------------------------------------------- descriptors

_BUILDERS = {
    "cyclic": build_cyclic,
    "dihedral": build_dihedral,
    "quaternion": build_quaternion,
    "semidihedral": build_semidihedral,
}


def parse_descriptor(text: str) -> FiniteGroup:
    """Build a group from ``cyclic:<n>``, ``dihedral:<order>``, ``family:...`` etc."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    if kind == "family":
        from .classifier import FamilyParams, build_family_group
        return build_family_group(FamilyParams.parse(text)).x
    if kind not in _BUILDERS:
        raise errors.ParseError(f"unknown group kind {kind!r}")
    try:
        size = int(rest)
    except ValueError:
        raise errors.ParseError(f"bad size in descriptor {text!r}") from None
    return _BUILDERS[kind](size)


def element_name(G: FiniteGroup, g: int) -> str:
    """Readable normal form for presented groups, numeric ID otherwise."""
    kind = G.descriptor.split(":", 1)[0]
    if kind == "cyclic":
        return "1" if g == 0 else f"c^{g}"
    if kind in ("dihedral", "quaternion", "semidihedral"):
        i, j = divmod(int(g), 2)
        parts = ([f"a^{i}"] if i else []) + (["b"] if j else [])
        return "*".join(parts) or "1"
    return str(g)
