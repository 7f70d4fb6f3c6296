"""Executable checks of the structural results on skew product groups.

Every checker recomputes the subgroups it needs from tables, tests the
hypotheses first and reports out-of-hypothesis instances as ``skip``.
A ``fail`` always carries a witness that the structure module can
re-check on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
from typing import Iterable, Iterator

import numpy as np

from . import errors
from .group import FiniteGroup, build_cyclic
from .skew import SkewMorphism, SkewProductGroup, enumerate_skew_morphisms, skew_product
from .structure import (Subgroup, _prime_factors, aut_order, conjugate_set, core_of,
                        derived_subgroup, fitting, intersect, is_maximal_class_2group,
                        is_normal, is_p_group, o_p, subgroup_generated, whole)

CHECKS = ("fitting", "two-group", "core-trichotomy", "order-bound")
PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class TheoremReport:
    theorem: str
    instance: str
    verdict: str
    witness: dict | None = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "instance": self.instance, "verdict": self.verdict,
                "witness": self.witness, "detail": self.detail}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def instance_id(s: SkewMorphism) -> str:
    digest = hashlib.sha256(s.to_json().encode()).hexdigest()[:12]
    return f"{s.group.descriptor}#k={s.sigma_order}#{digest}"


def _sp_id(sp: SkewProductGroup) -> str:
    return sp.x.descriptor


def _is_power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _product_mask(X: FiniteGroup, A: Subgroup, B: Subgroup) -> np.ndarray:
    m = np.zeros(X.order, dtype=bool)
    m[X.table[np.ix_(A.members, B.members)].ravel()] = True
    return m


def _escape(X: FiniteGroup, H: Subgroup) -> dict | None:
    """A conjugator x with x^-1 H x not inside H, or None if H is normal."""
    m = H.mask
    for x in range(X.order):
        c = conjugate_set(X, m, x)
        if not np.array_equal(c, m):
            h = int(np.flatnonzero(c & ~m)[0])
            return {"subgroup": list(H.members), "conjugator": x, "image": h}
    return None


def _hyp_common(sp: SkewProductGroup) -> str | None:
    if (sp.g_part.mask & sp.c_part.mask).sum() != 1:
        return "G and C intersect nontrivially"
    if sp.g_part.order * sp.c_part.order != sp.x.order:
        return "X is not GC"
    if core_of(sp.x, sp.c_part).order != 1:
        return "C is not core-free"
    return None


def verify_fitting_structure(sp: SkewProductGroup, instance: str | None = None) -> TheoremReport:
    """F(X) = O_p(X) = G1 C1 with G1 = O_p(X) & G nontrivial and G1 C1 C2 normal."""
    inst = instance or _sp_id(sp)
    X, Gp, C = sp.x, sp.g_part, sp.c_part
    why = _hyp_common(sp)
    if why is None and (Gp.order == 1 or not is_p_group(sp.g_group)):
        why = "G is not a nontrivial p-group"
    if why:
        return TheoremReport("fitting", inst, SKIP, detail={"reason": why})
    p = _prime_factors(Gp.order)[0]
    k = C.order
    kp = 1
    while k % (kp * p) == 0:
        kp *= p
    y = sp.y
    C1 = subgroup_generated(X, [X.power(y, k // kp)])
    C2 = subgroup_generated(X, [X.power(y, kp)])
    F = fitting(X)
    Op = o_p(X, p)
    G1 = intersect(Op, Gp)
    detail = {"p": p, "F": F.order, "Op": Op.order, "G1": G1.order, "C1": C1.order, "C2": C2.order}
    if F != Op:
        return TheoremReport("fitting", inst, FAIL, {"claim": "F(X) = O_p(X)", "F": list(F.members),
                                                      "Op": list(Op.members)}, detail)
    if G1.order == 1:
        return TheoremReport("fitting", inst, FAIL, {"claim": "G1 != 1", "G1": list(G1.members)}, detail)
    gc = _product_mask(X, G1, C1)
    if not np.array_equal(gc, Op.mask):
        return TheoremReport("fitting", inst, FAIL, {"claim": "O_p(X) = G1 C1", "Op": list(Op.members),
                                                      "G1C1": np.flatnonzero(gc).tolist()}, detail)
    N = subgroup_generated(X, list(Op.generators) + list(C2.generators))
    if N.order != Op.order * C2.order or not is_normal(X, Op):
        return TheoremReport("fitting", inst, FAIL, {"claim": "G1 C1 x| C2", "subgroup": list(N.members)}, detail)
    esc = _escape(X, N)
    if esc is not None:
        return TheoremReport("fitting", inst, FAIL, {"claim": "G1 C1 C2 normal", **esc}, detail)
    return TheoremReport("fitting", inst, PASS, None, detail)


def verify_two_group(sp: SkewProductGroup, instance: str | None = None) -> TheoremReport:
    """|X| is a power of 2 when G has maximal class and order at least 32."""
    inst = instance or _sp_id(sp)
    why = _hyp_common(sp)
    G = sp.g_group
    if why is None and (G.order < 32 or not is_maximal_class_2group(G)):
        why = "G is not a maximal class 2-group of order >= 32"
    if why:
        return TheoremReport("two-group", inst, SKIP, detail={"reason": why})
    X = sp.x
    detail = {"order": X.order}
    if _is_power_of(X.order, 2):
        return TheoremReport("two-group", inst, PASS, None, detail)
    odd = int(np.flatnonzero(X.orders() % 2 == 1)[1])
    return TheoremReport("two-group", inst, FAIL, {"element": odd, "element_order": int(X.orders()[odd])},
                         detail)


def _cyclic_maximal(G: FiniteGroup) -> int:
    if "a" in G.generators and G.orders()[G.gen("a")] == G.order // 2:
        return G.gen("a")
    return int(np.flatnonzero(G.orders() == G.order // 2)[0])


def core_shape(sp: SkewProductGroup) -> tuple[str | None, Subgroup]:
    """Shape of the core of G: 'G', 'index2' (<a^2, x>, x outside <a>), 'a0', or None."""
    X, Gp = sp.x, sp.g_part
    GX = core_of(X, Gp)
    G = sp.g_group
    N = Gp.order
    mem = np.array(Gp.members)
    local = set(np.searchsorted(mem, GX.members).tolist())
    a = _cyclic_maximal(G)
    A = subgroup_generated(G, [a])
    if GX.order == N:
        return "G", GX
    if GX.order == N // 2:
        a2 = subgroup_generated(G, [G.power(a, 2)])
        if set(a2.members) <= local and not local <= set(A.members):
            return "index2", GX
        return None, GX
    if GX.order == 2 and local == {0, G.power(a, N // 4)}:
        return "a0", GX
    return None, GX


def verify_core_trichotomy(sp: SkewProductGroup, instance: str | None = None) -> TheoremReport:
    """The core of G is <a0>, an index-2 <a^2, x> with x outside <a>, or G."""
    inst = instance or _sp_id(sp)
    why = _hyp_common(sp)
    G = sp.g_group
    if why is None and not is_maximal_class_2group(G):
        why = "G is not of maximal class"
    if why is None and not _is_power_of(sp.x.order, 2):
        why = "X is not a 2-group"
    if why:
        return TheoremReport("core-trichotomy", inst, SKIP, detail={"reason": why})
    shape, GX = core_shape(sp)
    detail = {"core_order": GX.order, "shape": shape}
    if GX.order == 1:
        return TheoremReport("core-trichotomy", inst, FAIL, {"claim": "G_X != 1", "core": [0]}, detail)
    if shape is None:
        return TheoremReport("core-trichotomy", inst, FAIL, {"core": list(GX.members)}, detail)
    return TheoremReport("core-trichotomy", inst, PASS, None, detail)


def verify_order_bound(sp: SkewProductGroup, instance: str | None = None) -> TheoremReport:
    """|X| <= |G|(|G| - 1) for a core-free cyclic complement."""
    inst = instance or _sp_id(sp)
    why = _hyp_common(sp)
    n = sp.g_part.order
    if why is None and n < 2:
        why = "G is trivial"
    if why:
        return TheoremReport("order-bound", inst, SKIP, detail={"reason": why})
    detail = {"order": sp.x.order, "bound": n * (n - 1)}
    if sp.x.order <= n * (n - 1):
        return TheoremReport("order-bound", inst, PASS, None, detail)
    return TheoremReport("order-bound", inst, FAIL, {"order": sp.x.order}, detail)


def verify_cyclic_skew_orders(n: int, morphisms: Iterable[SkewMorphism] | None = None) -> TheoremReport:
    """Skew morphisms of Z_(2^n) have orders 2^m with m < n."""
    N = 1 << n
    G = build_cyclic(N)
    ms = list(morphisms) if morphisms is not None else enumerate_skew_morphisms(G).skew_morphisms
    orders = sorted({s.sigma_order for s in ms})
    detail = {"orders": orders}
    for s in ms:
        k = s.sigma_order
        if not _is_power_of(k, 2) or k >= N:
            return TheoremReport("cyclic-orders", G.descriptor, FAIL, {"certificate": s.certificate()}, detail)
    return TheoremReport("cyclic-orders", G.descriptor, PASS, None, detail)


def verify_aut_2group(G: FiniteGroup) -> TheoremReport:
    """|Aut(G)| is a power of 2 for maximal class G of order at least 32."""
    if G.order < 32 or not is_maximal_class_2group(G):
        return TheoremReport("aut-2group", G.descriptor, SKIP,
                             detail={"reason": "G is not a maximal class 2-group of order >= 32"})
    k = aut_order(G)
    detail = {"aut_order": k}
    if _is_power_of(k, 2):
        return TheoremReport("aut-2group", G.descriptor, PASS, None, detail)
    return TheoremReport("aut-2group", G.descriptor, FAIL, {"aut_order": k}, detail)


def _abelian(G: FiniteGroup, H: Subgroup) -> tuple[int, int] | None:
    m = np.array(H.members)
    T = G.table[np.ix_(m, m)]
    bad = np.argwhere(T != T.T)
    if bad.size:
        return int(m[bad[0][0]]), int(m[bad[0][1]])
    return None


def verify_metabelian(A: Subgroup, B: Subgroup) -> TheoremReport:
    """G = AB with A, B abelian has abelian derived subgroup."""
    G = A.parent
    if B.parent is not G:
        raise errors.InvalidSubgroup("A and B must live in the same group")
    if _abelian(G, A) or _abelian(G, B) or not _product_mask(G, A, B).all():
        return TheoremReport("metabelian", G.descriptor, SKIP,
                             detail={"reason": "need abelian A, B with AB = G"})
    D = derived_subgroup(G)
    bad = _abelian(G, D)
    detail = {"derived_order": D.order}
    if bad is None:
        return TheoremReport("metabelian", G.descriptor, PASS, None, detail)
    return TheoremReport("metabelian", G.descriptor, FAIL, {"noncommuting": list(bad)}, detail)


_DISPATCH = {
    "fitting": verify_fitting_structure,
    "two-group": verify_two_group,
    "core-trichotomy": verify_core_trichotomy,
    "order-bound": verify_order_bound,
}


def sweep(morphisms: Iterable[SkewMorphism], checks: Iterable[str] = CHECKS) -> Iterator[TheoremReport]:
    """Run per-instance checks over the skew product of each morphism, in input order."""
    checks = list(checks)
    for c in checks:
        if c not in _DISPATCH:
            raise errors.InvalidParameter(f"unknown check {c!r}; choose from {sorted(_DISPATCH)}")
    for s in morphisms:
        sp = skew_product(s)
        inst = instance_id(s)
        for c in checks:
            yield _DISPATCH[c](sp, inst)
