"""Skew morphisms: validation, power functions, skew products and enumeration."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import itertools
import json
from math import lcm
import time
from typing import Iterable, Sequence
import warnings

import numpy as np

from . import errors
from ._accel import backend
from ._search import ST_BUDGET, ST_OVERFLOW, run_search
from .group import FiniteGroup, _freeze, parse_descriptor
from .kernels import closure, is_latin
from .structure import (Subgroup, all_subgroups, core_of, induced_group, monomorphisms_into,
                        subgroup_generated)

DEFAULT_NODE_CAP = 10**9
ENUM_LIMIT = 63  # pi masks live in 64-bit words


@dataclass(frozen=True, eq=False)
class SkewMorphism:
    group: FiniteGroup
    sigma: np.ndarray
    pi: np.ndarray
    sigma_order: int

    def key(self) -> tuple:
        return (self.sigma_order, tuple(self.sigma.tolist()))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SkewMorphism) and self.group.same_table(other.group)
                and np.array_equal(self.sigma, other.sigma) and np.array_equal(self.pi, other.pi)
                and self.sigma_order == other.sigma_order)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"SkewMorphism({self.group.descriptor}, order={self.sigma_order})"

    def orbits(self) -> list[tuple[int, ...]]:
        """Cycles of sigma, each starting at its smallest element, sorted."""
        seen = np.zeros(self.group.order, dtype=bool)
        out = []
        for h in range(self.group.order):
            if seen[h]:
                continue
            cyc = [h]
            seen[h] = True
            x = int(self.sigma[h])
            while x != h:
                cyc.append(x)
                seen[x] = True
                x = int(self.sigma[x])
            out.append(tuple(cyc))
        return out

    def certificate(self) -> dict:
        return {"group": self.group.descriptor, "sigma": self.sigma.tolist(),
                "pi": self.pi.tolist(), "order": int(self.sigma_order)}

    def to_json(self) -> str:
        return json.dumps(self.certificate(), separators=(",", ":"))


def _freeze_arr(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def _perm_check(G: FiniteGroup, sigma) -> np.ndarray:
    s = np.asarray(sigma, dtype=np.int64)
    if s.shape != (G.order,) or not np.array_equal(np.sort(s), np.arange(G.order)):
        raise errors.InvalidParameter("sigma is not a permutation of the group elements")
    if s[0] != 0:
        raise errors.IdentityNotFixed("sigma moves the identity")
    return s


def powers_of(sigma: np.ndarray) -> np.ndarray:
    """Rows sigma^0, sigma^1, ..., sigma^(k-1) where k is the order."""
    n = sigma.shape[0]
    rows = [np.arange(n)]
    while True:
        nxt = sigma[rows[-1]]
        if np.array_equal(nxt, rows[0]):
            return np.array(rows)
        rows.append(nxt)


def validate_skew(G: FiniteGroup, sigma, pi) -> SkewMorphism:
    s = _perm_check(G, sigma)
    p = np.asarray(pi)
    if p.shape != (G.order,) or not np.issubdtype(p.dtype, np.integer):
        raise errors.PiInconsistent("pi must assign an integer to every element")
    P = powers_of(s)
    k = P.shape[0]
    p = p.astype(np.int64) % k
    T = G.table
    for g in range(G.order):
        # sigma(g h) versus sigma(g) sigma^pi(g)(h), for all h at once
        bad = np.flatnonzero(s[T[g]] != T[s[g], P[p[g]]])
        if bad.size:
            raise errors.AxiomViolated(f"skew identity fails at (g, h) = ({g}, {int(bad[0])})",
                                       pair=(g, int(bad[0])))
    return SkewMorphism(G, _freeze_arr(s), _freeze_arr(p), int(k))


def derive_power_function(G: FiniteGroup, sigma) -> SkewMorphism | None:
    """Find pi with tau_g = sigma^pi(g) for all g, or return None."""
    s = _perm_check(G, sigma)
    P = powers_of(s)
    index = {row.tobytes(): j for j, row in enumerate(P)}
    T, inv = G.table, G.inverse
    tau = T[inv[s][:, None], s[T]]  # row g is L_{sigma(g)}^-1 sigma L_g
    pi = np.empty(G.order, dtype=np.int64)
    for g in range(G.order):
        j = index.get(tau[g].astype(P.dtype).tobytes())
        if j is None:
            return None
        pi[g] = j
    return SkewMorphism(G, _freeze_arr(s), _freeze_arr(pi), int(P.shape[0]))


def is_automorphism(s: SkewMorphism) -> bool:
    return bool(np.all(s.pi % s.sigma_order == 1 % s.sigma_order))


def identity_morphism(G: FiniteGroup) -> SkewMorphism:
    return SkewMorphism(G, _freeze_arr(np.arange(G.order)), _freeze_arr(np.zeros(G.order)), 1)


def from_certificate(cert: dict | str, group: FiniteGroup | None = None) -> SkewMorphism:
    """Rebuild and re-validate a certificate."""
    if isinstance(cert, str):
        cert = json.loads(cert)
    G = group if group is not None else parse_descriptor(cert["group"])
    s = validate_skew(G, cert["sigma"], cert["pi"])
    if s.sigma_order != int(cert["order"]):
        raise errors.PiInconsistent("recorded order does not match sigma")
    if not np.array_equal(s.pi, np.asarray(cert["pi"]) % s.sigma_order):
        raise errors.PiInconsistent("recorded pi is not reduced")
    return s


# ---------------------------------------------------------------- products

@dataclass(frozen=True, eq=False)
class SkewProductGroup:
    x: FiniteGroup
    g_part: Subgroup
    c_part: Subgroup
    y: int
    complement_corefree: bool
    base: FiniteGroup | None = None

    def __repr__(self) -> str:
        return (f"SkewProductGroup(|X|={self.x.order}, |G|={self.g_part.order}, "
                f"|C|={self.c_part.order}, corefree={self.complement_corefree})")

    @property
    def g_group(self) -> FiniteGroup:
        """The G part as a stand-alone group (the base group if known)."""
        return self.base if self.base is not None else induced_group(self.g_part)


def first_nonassociative_light(table: np.ndarray, gens: Sequence[int]):
    """Light's test: (xg)y = x(gy) for g in a generating set proves associativity.

    ``gens`` must reach every element by right multiplication from 0.
    """
    T = np.asarray(table)
    if not closure(T, np.array(gens, dtype=np.int64)).all():
        raise errors.InvalidParameter("generators do not reach every element")
    for g in gens:
        left = T[T[:, g]]        # (x g) y over (x, y)
        right = T[:, T[g]]       # x (g y) over (x, y)
        if not np.array_equal(left, right):
            x, y = np.argwhere(left != right)[0]
            return int(x), int(g), int(y)
    return None


def skew_product(s: SkewMorphism) -> SkewProductGroup:
    """X = G<sigma> with (g, i) labeled i*|G| + g."""
    G, k, n = s.group, s.sigma_order, s.group.order
    P = powers_of(s.sigma)
    # S[i, b] = sum_{l < i} pi(sigma^l b) mod k
    S = np.zeros((k, n), dtype=np.int64)
    for i in range(1, k):
        S[i] = (S[i - 1] + s.pi[P[i - 1]]) % k
    i_ = np.arange(k)[:, None, None, None]
    a_ = np.arange(n)[None, :, None, None]
    j_ = np.arange(k)[None, None, :, None]
    b_ = np.arange(n)[None, None, None, :]
    gpart = G.table[a_, P[i_, b_]]
    cpart = (S[i_, b_] + j_) % k
    table = (cpart * n + gpart).reshape(n * k, n * k)
    if not is_latin(table):
        raise errors.ConstructionInconsistent("skew product table is not a Latin square")
    gens = sorted(set(G.generators.values()) | ({n} if k > 1 else set()))
    bad = first_nonassociative_light(table, gens)
    if bad is not None:
        raise errors.ConstructionInconsistent(f"skew product not associative at {bad}")
    names = dict(G.generators)
    if k > 1:
        names["y"] = n
    X = _freeze(table, names, f"skewproduct:{G.descriptor}:{k}")
    g_part = Subgroup(X, tuple(range(n)), tuple(sorted(set(G.generators.values()))))
    y = n if k > 1 else 0
    c_part = subgroup_generated(X, [y])
    corefree = core_of(X, c_part).order == 1
    return SkewProductGroup(X, g_part, c_part, y, corefree, G)


def extract_skew(X: FiniteGroup, G: Subgroup, y: int, group: FiniteGroup | None = None) -> SkewMorphism:
    """Read sigma and pi off y g = sigma(g) y^pi(g).

    Elements of G are relabeled 0..|G|-1 in increasing ID order; ``group``
    (if given) must have exactly that induced table.
    """
    y = int(y)
    Y = subgroup_generated(X, [y])
    if G.order * Y.order != X.order or (G.mask & Y.mask).sum() != 1:
        raise errors.NotComplementary("G and <y> are not complementary")
    base = induced_group(G)
    if group is not None:
        if not np.array_equal(group.table, base.table):
            raise errors.InvalidParameter("group does not match the induced table of G")
        base = group
    if core_of(X, Y).order != 1:
        warnings.warn("complement <y> is not core-free", stacklevel=2)
    T = X.table
    m = Y.order
    ypow = [0]
    for _ in range(m - 1):
        ypow.append(int(T[ypow[-1], y]))
    mem = np.array(G.members)
    dec_g = np.full(X.order, -1, dtype=np.int64)
    dec_i = np.full(X.order, -1, dtype=np.int64)
    for i, yp in enumerate(ypow):
        prods = T[mem, yp]
        dec_g[prods] = np.arange(len(mem))
        dec_i[prods] = i
    prods = T[y, mem]
    sigma = dec_g[prods]
    pi = dec_i[prods]
    if (sigma < 0).any():
        raise errors.NotComplementary("X is not G<y>")
    k = powers_of(sigma).shape[0]
    s = validate_skew(base, sigma, pi % k)
    return s


# ---------------------------------------------------------------- enumeration

def orbit_types(n: int, k: int) -> list[dict[int, int]]:
    """Orbit-length multisets possible for a skew morphism of order k on n points.

    The identity is excluded. Lengths divide k with lcm k, and for every
    divisor j of k the fixed set of sigma^j (a subgroup) has order dividing n.
    """
    divs = [d for d in range(1, k + 1) if k % d == 0]
    out: list[dict[int, int]] = []

    def rec(i, rem, cur):
        if rem == 0:
            used = [L for L, m in cur if m]
            if (lcm(*used) if used else 1) != k:
                return
            if all(n % (1 + sum(m * L for L, m in cur if j % L == 0)) == 0 for j in divs):
                out.append({L: m for L, m in cur if m})
            return
        if i == len(divs):
            return
        L = divs[i]
        for m in range(rem // L + 1):
            rec(i + 1, rem - m * L, cur + [(L, m)])

    rec(0, n - 1, [])
    return out


def _semiregular(tp: dict[int, int], k: int) -> bool:
    return k > 1 and set(tp) == {k}


@dataclass
class EnumerationResult:
    group: FiniteGroup
    skew_morphisms: list[SkewMorphism]
    search_stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.skew_morphisms)

    def order_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for s in self.skew_morphisms:
            hist[s.sigma_order] = hist.get(s.sigma_order, 0) + 1
        return dict(sorted(hist.items()))

    def to_json(self) -> str:
        stats = {k: v for k, v in self.search_stats.items() if k != "wall_time"}
        return json.dumps({"group": self.group.descriptor,
                           "skew_morphisms": [s.certificate() for s in self.skew_morphisms],
                           "stats": stats}, separators=(",", ":"), sort_keys=True)


def _right_cosets(G: FiniteGroup, K: Subgroup) -> np.ndarray:
    coset = np.full(G.order, -1, dtype=np.int64)
    mem = np.array(K.members)
    c = 0
    for g in range(G.order):
        if coset[g] == -1:
            coset[G.table[mem, g]] = c
            c += 1
    return coset


def _tasks(G: FiniteGroup, order_cap: int | None):
    """(k, kernel, phi, coset, types, lenmask) for every search to run."""
    n = G.order
    subs = all_subgroups(G)
    kmax = n - 1 if order_cap is None else min(n - 1, int(order_cap))
    mono_cache: dict[tuple, tuple] = {}
    for k in range(2, kmax + 1):
        tps = orbit_types(n, k)
        if not tps:
            continue
        for K in subs:
            if K.order == 1 or n // K.order > k - 1:
                continue
            # a semiregular sigma is an automorphism, so only K = G may use it
            usable = tps if K.order == n else [t for t in tps if not _semiregular(t, k)]
            if not usable:
                continue
            types = np.zeros((len(usable), k + 1), dtype=np.int64)
            lenmask = 0
            for r, t in enumerate(usable):
                for L, m in t.items():
                    types[r, L] = m
                    lenmask |= 1 << L
            if K.members not in mono_cache:
                mono_cache[K.members] = monomorphisms_into(G, K) + (_right_cosets(G, K),)
            members, maps, coset = mono_cache[K.members]
            for phi in maps:
                yield k, members, phi, coset, types, lenmask


def _run_task(args):
    T, inv, k, members, phi, coset, types, lenmask, cap = args
    out = np.zeros((256, T.shape[0]), dtype=np.int64)
    while True:
        stats = np.zeros(3, dtype=np.int64)
        status = run_search(T, inv, k, members, phi, coset, types, lenmask, cap, out, stats)
        if status != ST_OVERFLOW:
            return status, out[: stats[2]].copy(), stats
        out = np.zeros((2 * out.shape[0], T.shape[0]), dtype=np.int64)


def enumerate_skew_morphisms(G: FiniteGroup, order_cap: int | None = None,
                             node_cap: int = DEFAULT_NODE_CAP, jobs: int = 1) -> EnumerationResult:
    """All skew morphisms of G, sorted by (order, sigma).

    Raises BudgetExceeded (with partial stats) when the node cap is hit.
    """
    if G.order > ENUM_LIMIT:
        raise errors.TooLarge(f"enumeration supports orders up to {ENUM_LIMIT}")
    t0 = time.perf_counter()
    T = np.ascontiguousarray(G.table, dtype=np.int64)
    inv = np.ascontiguousarray(G.inverse, dtype=np.int64)
    found: list[np.ndarray] = [np.arange(G.order)]
    nodes = fails = tasks = 0
    status = 0
    if order_cap is None or order_cap >= 1:
        args = ((T, inv, k, m, phi, c, tp, lm) for k, m, phi, c, tp, lm in _tasks(G, order_cap))
        if jobs > 1:
            per_task = node_cap  # each worker checks its own budget, the total is checked below
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                results = ex.map(_run_task, (a + (per_task,) for a in args), chunksize=4)
                for st, sols, stats in results:
                    tasks += 1
                    nodes += int(stats[0])
                    fails += int(stats[1])
                    found.extend(sols)
                    if st == ST_BUDGET or nodes > node_cap:
                        status = ST_BUDGET
        else:
            for a in args:
                st, sols, stats = _run_task(a + (node_cap - nodes,))
                tasks += 1
                nodes += int(stats[0])
                fails += int(stats[1])
                found.extend(sols)
                if st == ST_BUDGET or nodes >= node_cap:
                    status = ST_BUDGET
                    break
    else:
        found = []
    stats = {"nodes": nodes, "prunes": fails, "tasks": tasks, "backend": backend(),
             "wall_time": round(time.perf_counter() - t0, 3)}
    if status == ST_BUDGET:
        raise errors.BudgetExceeded(f"node cap {node_cap} reached", stats=stats)
    morphs = [derive_power_function(G, sig) for sig in found]
    if any(m is None for m in morphs):  # pragma: no cover - the kernel verifies leaves
        raise errors.ConstructionInconsistent("search returned a non-skew permutation")
    morphs.sort(key=SkewMorphism.key)
    keys = [m.key() for m in morphs]
    if len(set(keys)) != len(keys):  # pragma: no cover - tasks partition the search space
        raise errors.ConstructionInconsistent("duplicate skew morphisms in enumeration")
    return EnumerationResult(G, morphs, stats)


def brute_force_skew_morphisms(G: FiniteGroup) -> list[SkewMorphism]:
    """Full factorial scan over identity-fixing permutations (the oracle)."""
    if G.order > 9:
        raise errors.TooLarge("factorial scan capped at order 9")
    out = []
    for perm in itertools.permutations(range(1, G.order)):
        s = derive_power_function(G, (0,) + perm)
        if s is not None:
            out.append(s)
    out.sort(key=SkewMorphism.key)
    return out
