"""The three parameter families of skew products of maximal-class 2-groups.

Family groups are built as iterated cyclic extensions. Each step B.<t>
with t^l = g is checked through the induced automorphism tau(x) = x^t,
which must satisfy tau^l = Inn(g) and tau(g) = g. The congruence
predicates are kept separate from the construction so each can be tested
against the other.

Elements of a family group are labeled a^i b^j c^k -> (2i + j) + 2^n k,
so the G part carries the same labels as the presented group.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import itertools
import json
from typing import Iterable, Mapping

import numpy as np

from . import errors
from .group import (FiniteGroup, _freeze, _metacyclic_by_involution, build_dihedral,
                    build_quaternion, build_semidihedral, extend_homomorphism)
from .skew import (SkewMorphism, SkewProductGroup, _freeze_arr, extract_skew,
                   first_nonassociative_light, identity_morphism)
from .structure import Subgroup, _subgroup_gens, core_of, monomorphisms_into, subgroup_generated

FAMILIES = ("F1", "F2_1", "F2_2", "F3")
GTYPES = ("D", "Q", "SD")
_FIELDS = {"F1": ("r", "s"), "F2_1": ("r", "s", "t", "v"), "F2_2": ("r", "s", "t", "v"),
           "F3": ("s", "u", "y")}


# ---------------------------------------------------------------- modular helpers

def geom(r: int, start: int, stop: int, mod: int, step: int = 1) -> int:
    """sum of r^(step*l) for start <= l < stop, reduced mod ``mod``, by accumulation."""
    total = 0
    term = pow(r, step * start, mod) if start >= 0 else 0
    rs = pow(r, step, mod)
    for _ in range(start, stop):
        total = (total + term) % mod
        term = term * rs % mod
    return total % mod


def inverse_mod(r: int, mod: int) -> int:
    return pow(r, -1, mod)


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class FamilyParams:
    family: str
    gtype: str
    n: int
    m: int
    r: int = 0
    s: int = 0
    t: int = 0
    u: int = 0
    v: int = 0
    y: int = 0
    i: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise errors.InvalidParameter(f"unknown family {self.family!r}")
        if self.gtype not in GTYPES:
            raise errors.InvalidParameter(f"unknown group type {self.gtype!r}")
        if self.n < 5 or self.m < 1:
            raise errors.InvalidParameter("need n >= 5 and m >= 1")

    @property
    def group_order(self) -> int:
        return 1 << self.n

    def descriptor(self) -> str:
        vals = ",".join(f"{f}={getattr(self, f)}" for f in _FIELDS[self.family])
        return f"family:{self.family}:{self.gtype}:{self.n}:{self.m}:{vals}"

    def __str__(self) -> str:
        return self.descriptor()

    @classmethod
    def parse(cls, text: str) -> "FamilyParams":
        parts = text.strip().split(":")
        if len(parts) != 6 or parts[0] != "family":
            raise errors.ParseError(f"bad family descriptor {text!r}")
        _, fam, gtype, n, m, kv = parts
        try:
            vals = {k: int(v) for k, v in (item.split("=") for item in kv.split(",") if item)}
            n, m = int(n), int(m)
        except ValueError:
            raise errors.ParseError(f"bad family descriptor {text!r}") from None
        if fam not in _FIELDS or set(vals) != set(_FIELDS[fam]):
            raise errors.ParseError(f"family {fam!r} expects fields {_FIELDS.get(fam)}")
        return canonical(cls(fam, gtype, n, m, **vals))

    def to_json(self) -> dict:
        return {"family": self.family, "gtype": self.gtype, "n": self.n, "m": self.m,
                **{f: getattr(self, f) for f in _FIELDS[self.family]}}


def quaternion_flag(p: FamilyParams) -> int:
    """The i term: F3 uses the group type, F2_2 the parity rule on v."""
    if p.gtype != "Q":
        return 0
    if p.family == "F3":
        return 1
    if p.family == "F2_2":
        # i = (v+1)/2 read mod 2; for even v this is floor((v+1)/2) mod 2
        return ((p.v + 1) // 2) % 2
    return 0


def canonical(p: FamilyParams) -> FamilyParams:
    """Reduce to least non-negative residues and fill in derived fields."""
    n, m = p.n, p.m
    big, small = 1 << (n - 1), 1 << (n - 2)
    if p.family == "F1":
        q = replace(p, r=p.r % big, s=p.s % big, t=0, u=0, v=0, y=0)
    elif p.family in ("F2_1", "F2_2"):
        q = replace(p, r=p.r % small, s=p.s % small, t=p.t % small, v=p.v % (1 << m),
                    u=0 if p.family == "F2_1" else 1, y=0)
    else:
        q = replace(p, r=1, t=-1 % small, s=p.s % small, u=p.u % small, y=p.y % small, v=0)
    return replace(q, i=quaternion_flag(q))


@dataclass
class CheckReport:
    ok: bool
    failed: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _report(conds: Iterable[tuple[str, bool]]) -> CheckReport:
    failed = [name for name, good in conds if not good]
    return CheckReport(not failed, failed)


def check_family1(p: FamilyParams, corrected: bool = True) -> CheckReport:
    """Presentation conditions; ``corrected`` adds c^(2^m) = 1, otherwise unchecked."""
    if p.family != "F1":
        raise errors.InvalidParameter("check_family1 needs family F1")
    M = 1 << (p.n - 1)
    h = 1 << (p.m - 1)
    r, s = p.r, p.s
    corefree = pow(r, h, M) != 1 or s * geom(r, 0, h, M) % M != 0
    return _report([
        ("r^(2^m) = 1 mod 2^(n-1)", pow(r, 2 * h, M) == 1),
        ("core-free", corefree),
        ("s even for SD", p.gtype != "SD" or s % 2 == 0),
    ] + ([("c^(2^m) = 1", s * geom(r, 0, 2 * h, M) % M == 0)] if corrected else []))


def _sum(r: int, lo: int, hi: int, mod: int) -> int:
    """sum_{l=lo}^{hi} r^l mod ``mod`` with the usual convention for hi < lo - 1."""
    if hi >= lo - 1:
        return geom(r, lo, hi + 1, mod)
    rinv = inverse_mod(r, mod)
    return -geom(rinv, -(lo - 1), -hi, mod) % mod


def check_family2(p: FamilyParams, corrected: bool = True) -> CheckReport:
    """Presentation conditions; ``corrected`` adds v odd for u = 1, needed for c^a to
    generate <c> modulo <a^2, b>."""
    if p.family not in ("F2_1", "F2_2"):
        raise errors.InvalidParameter("check_family2 needs family F2_1 or F2_2")
    n, m = p.n, p.m
    M = 1 << (n - 2)
    M1 = 1 << (n - 1)
    r, s, t, v = p.r, p.s, p.t, p.v
    km = 1 << m
    h = 1 << (m - 1)
    if r % 2 == 0:
        return CheckReport(False, ["r odd"])
    conds = [
        ("(a^2)^c has order of a^2", pow(r, km, M) == 1),
        ("(c^b)^(2^m) = 1", s * _sum(r, 1, km, M) % M == 0),
    ]
    zb = s * _sum(r, 1, h, M) % M  # exponent of a^2 in z^b z^-1
    if p.family == "F2_1":
        sv = _sum(r, 1, v, M)
        conds += [
            ("c^a keeps (a^2)^c", pow(r, v - 1, M) == 1),
            ("c^a keeps c^b", (s + 2 * t) * r % M == ((1 - r) + s * sv) % M),
            ("(c^a)^(2^m) = 1", t * _sum(r, 1, km, M) % M == 0),
            ("(c^a)^a = c^(a^2)", (v * v) % km == 1 % km and (1 - r) % M == (t * r + t * sv) % M),
        ]
        corefree = t * _sum(r, 1, h, M) % M != 0 or zb != 0
    else:
        i = quaternion_flag(p)
        rinv = inverse_mod(r, M1)
        sv0 = _sum(r, 0, v - 1, M1)
        w = t * (1 - rinv) + s * sv0
        conds += [
            ("c^a keeps (a^2)^c", (pow(r, v - 1, M) + 1) % M == 0),
            ("c^a keeps c^b", (s * r + 1 - r) * sv0 % M1 == (s + 2 * t + 1) * r % M1),
            ("(c^a)^(2^m) = 1", w * geom(r, 0, h, M, step=2) % M == 0),
            ("(c^a)^a = c^(a^2)", (r * r * w * _half_geom(r, v - 1, M) + (1 << (n - 3)) * i) % M == 0),
        ]
        if corrected:
            conds.append(("v odd", v % 2 == 1))
        corefree = w * _half_geom(r, h, M) % M != 0 or zb != 0
    conds.append(("core-free", corefree))
    return _report(conds)


def _half_geom(r: int, e: int, mod: int) -> int:
    """(r^e - 1)/(r^2 - 1) as sum of r^(2l) for l < e/2; odd e is floored."""
    return geom(r, 0, max(e, 0) // 2, mod, step=2)


def check_family3(p: FamilyParams, full: bool = True) -> CheckReport:
    """Headline congruences, then the derived chain with r = 1 and t = -1."""
    if p.family != "F3":
        raise errors.InvalidParameter("check_family3 needs family F3")
    n = p.n
    M = 1 << (n - 2)
    M3 = 1 << (n - 3)
    s, u, y = p.s, p.u, p.y
    i = 1 if p.gtype == "Q" else 0
    conds = [
        ("m = n-1", p.m == n - 1),
        ("s, u, y odd", s % 2 == 1 and u % 2 == 1 and y % 2 == 1),
        ("sy = 1 + i 2^(n-3)", (s * y) % M == (1 + i * M3) % M),
        ("yu = -1 mod 2^(n-3)", (y * u) % M3 == (-1) % M3),
    ]
    if full and all(ok for _, ok in conds):
        r, t = 1, -1
        sy = _sum(r, 1, y, M)
        conds += [
            ("c1^a keeps c1^b", (t * t) % M == 1 and (u + s) * (r + 1) * ((t - 1) // 2) % M == 0),
            ("(c1^a) has order of c1", s * _sum(r, 1, M, M) % M == 0),
            ("(c1^a)^a = c1^(a^2)", (1 - r) % M == (s * r + s * _sum(r, 1, t, M)) % M),
            ("a^c has order of a", (u * sy) % 2 == 1),
            ("a^c keeps (a^2)^c1", (2 * y * (r - 1)) % M == 0),
            ("c keeps c1^a", (u * r) % M == s * (u * r * sy + i * M3) % M and (1 - t - 2 * y * s) % M == 0),
            ("c keeps c1^b", (t - 1 - 2 * y * u) % M == 0 and (s * r) % M == (u * u * sy + i * M3) % M),
            ("c^2 acts as c1", (2 * y + 2 * y * u * r * sy) % M == 0 and (r - (u * sy) ** 2) % M == 0),
        ]
    return _report(conds)


def check_family(p: FamilyParams, corrected: bool = True) -> CheckReport:
    if p.family == "F1":
        return check_family1(p, corrected)
    if p.family == "F3":
        return check_family3(p)
    return check_family2(p, corrected)


# ---------------------------------------------------------------- extensions

@dataclass(frozen=True, eq=False)
class ExtensionStep:
    base: FiniteGroup
    tau: np.ndarray
    length: int
    target: int
    name: str = "t"


def automorphism_from_images(B: FiniteGroup, images: Mapping[int, int]) -> np.ndarray:
    f = extend_homomorphism(B, B, images)
    if f is None or np.unique(f).size != B.order:
        raise errors.TauNotAutomorphism("generator images do not define an automorphism")
    return f


def extension_validity(step: ExtensionStep) -> bool:
    """tau^l = Inn(g) and tau(g) = g, by explicit composition."""
    B, tau, l, g = step.base, np.asarray(step.tau), int(step.length), int(step.target)
    T = B.table
    if tau.shape != (B.order,) or np.unique(tau).size != B.order or \
            not np.array_equal(tau[T], T[tau[:, None], tau[None, :]]):
        raise errors.TauNotAutomorphism("tau is not an automorphism of the base")
    if l < 1:
        return False
    p = np.arange(B.order)
    for _ in range(l):
        p = tau[p]
    inn = T[B.inverse[g], T[:, g]]  # x -> g^-1 x g
    return bool(np.array_equal(p, inn) and tau[g] == g)


def cyclic_extension(step: ExtensionStep) -> FiniteGroup:
    """B.<t> on labels i*|B| + x for x t^i, with t^-1 x t = tau(x) and t^l = g."""
    if not extension_validity(step):
        raise errors.ExtensionInvalid("tau^l != Inn(g) or tau(g) != g", step=step.name)
    B, tau, l, g = step.base, np.asarray(step.tau), int(step.length), int(step.target)
    nb = B.order
    tinv = np.argsort(tau)
    Q = np.empty((l, nb), dtype=np.int64)  # Q[i] = tau^-i
    Q[0] = np.arange(nb)
    for i in range(1, l):
        Q[i] = tinv[Q[i - 1]]
    T = B.table.astype(np.int64)
    i_ = np.arange(l)[:, None, None, None]
    x_ = np.arange(nb)[None, :, None, None]
    j_ = np.arange(l)[None, None, :, None]
    y_ = np.arange(nb)[None, None, None, :]
    prod = T[x_, Q[i_, y_]]
    wrap = (i_ + j_) >= l
    prod = np.where(wrap, T[prod, g], prod)
    table = (((i_ + j_) % l) * nb + prod).reshape(nb * l, nb * l)
    gens = dict(B.generators)
    gens[step.name] = nb if l > 1 else g
    return _freeze(table, gens, f"ext:{B.descriptor}:{step.name}")


# ---------------------------------------------------------------- family groups

def base_group(gtype: str, n: int) -> FiniteGroup:
    order = 1 << n
    return {"D": build_dihedral, "Q": build_quaternion, "SD": build_semidihedral}[gtype](order)


def _e(gtype: str, n: int) -> int:
    """a^b = a^e in the presented group of order 2^n."""
    return -1 + (1 << (n - 2)) if gtype == "SD" else -1


def _relabel(X: FiniteGroup, a: int, b: int, c: int, n: int, m: int, descriptor: str) -> FiniteGroup:
    T = X.table
    N = 1 << n
    label = np.full(X.order, -1, dtype=np.int64)
    ap = [0]
    for _ in range((N // 2) - 1):
        ap.append(int(T[ap[-1], a]))
    cp = [0]
    for _ in range((1 << m) - 1):
        cp.append(int(T[cp[-1], c]))
    for i, x in enumerate(ap):
        for j in range(2):
            ab = int(T[x, b]) if j else x
            for k, z in enumerate(cp):
                e = int(T[ab, z])
                if label[e] != -1:
                    raise errors.ConstructionInconsistent("normal form a^i b^j c^k is not unique")
                label[e] = (2 * i + j) + N * k
    if (label < 0).any():
        raise errors.ConstructionInconsistent("normal form does not cover the group")
    inv_label = np.argsort(label)
    table = label[T[np.ix_(inv_label, inv_label)]]
    return _freeze(table, {"a": 2, "b": 1, "c": N if m else 0}, descriptor)


def _pow(B: FiniteGroup, x: int, e: int) -> int:
    return B.power(x, e)


def _mul(B: FiniteGroup, *xs: int) -> int:
    acc = 0
    for x in xs:
        acc = int(B.table[acc, x])
    return acc


def family_extension_steps(p: FamilyParams):
    """Yield (step, group) pairs; the last group is X before relabeling.

    Generators carried by name: 'a', 'b', 'c' plus 'd' = a^2 and 'e' = c^2.
    """
    p = canonical(p)
    n, m = p.n, p.m
    if p.family == "F1":
        G = base_group(p.gtype, n)
        a, b = G.gen("a"), G.gen("b")
        tau = automorphism_from_images(G, {a: _pow(G, a, p.r), b: _mul(G, _pow(G, a, p.s), b)})
        step = ExtensionStep(G, tau, 1 << m, 0, "c")
        X = cyclic_extension(step)
        yield step, X
        return
    half = 1 << (n - 2)
    ev = _e(p.gtype, n)
    if p.family in ("F2_1", "F2_2"):
        # <a^2> x| <c>
        D = _freeze(((np.arange(half)[:, None] + np.arange(half)[None, :]) % half), {"d": 1}, "cyclic:d")
        d = D.gen("d")
        tau1 = automorphism_from_images(D, {d: _pow(D, d, p.r)})
        s1 = ExtensionStep(D, tau1, 1 << m, 0, "c")
        B1 = cyclic_extension(s1)
        yield s1, B1
        d, c = B1.gen("d"), B1.gen("c")
        # .<b>: d^b = d^-1, c^b = d^s c, b^2 = a0^i (quaternion only)
        tau2 = automorphism_from_images(B1, {d: _pow(B1, d, -1), c: _mul(B1, _pow(B1, d, p.s), c)})
        bsq = _pow(B1, d, half // 2) if p.gtype == "Q" else 0
        s2 = ExtensionStep(B1, tau2, 2, bsq, "b")
        B2 = cyclic_extension(s2)
        yield s2, B2
        d, c, b = B2.gen("d"), B2.gen("c"), B2.gen("b")
        # .<a>: a^2 = d, d^a = d, b^a = a^(e-1) b, c^a = d^t b^u c^v
        tau3 = automorphism_from_images(B2, {
            d: d,
            b: _mul(B2, _pow(B2, d, (ev - 1) // 2), b),
            c: _mul(B2, _pow(B2, d, p.t), b if p.u else 0, _pow(B2, c, p.v)),
        })
        s3 = ExtensionStep(B2, tau3, 2, d, "a")
        X = cyclic_extension(s3)
        yield s3, X
        return
    # F3: ((<a^2, b> x| <c^2>).<a>).<c>
    z = half // 2 if p.gtype == "Q" else 0
    B0 = _metacyclic_by_involution(half, -1, z, "sub:d,b")
    B0 = _freeze(B0.table, {"d": B0.gen("a"), "b": B0.gen("b")}, "sub:d,b")
    d, b = B0.gen("d"), B0.gen("b")
    # c1 = c^2 centralizes d; b^c1 = b d^-u follows from c1^b = d^u c1
    tau1 = automorphism_from_images(B0, {d: d, b: _mul(B0, b, _pow(B0, d, -p.u))})
    s1 = ExtensionStep(B0, tau1, 1 << (m - 1), 0, "e")
    B1 = cyclic_extension(s1)
    yield s1, B1
    d, b, e = B1.gen("d"), B1.gen("b"), B1.gen("e")
    # .<a>: a^2 = d, b^a = a^(e-1) b, c1^a = d^s c1^t with t = -1
    tau2 = automorphism_from_images(B1, {
        d: d,
        b: _mul(B1, _pow(B1, d, (ev - 1) // 2), b),
        e: _mul(B1, _pow(B1, d, p.s), _pow(B1, e, -1)),
    })
    s2 = ExtensionStep(B1, tau2, 2, d, "a")
    B2 = cyclic_extension(s2)
    yield s2, B2
    d, b, e, a = B2.gen("d"), B2.gen("b"), B2.gen("e"), B2.gen("a")
    # .<c>: c^2 = c1, a^c = b c1^y, c1^c = c1; b^c is forced by tau^2 = Inn(c1)
    ainn = _mul(B2, _pow(B2, e, -1), a, e)
    tau3_imgs = {a: _mul(B2, b, _pow(B2, e, p.y)), e: e, b: _mul(B2, ainn, _pow(B2, e, -p.y))}
    tau3 = automorphism_from_images(B2, tau3_imgs)
    s3 = ExtensionStep(B2, tau3, 2, e, "c")
    X = cyclic_extension(s3)
    yield s3, X


def build_family_group(p: FamilyParams, check: bool = True) -> SkewProductGroup:
    """Realize the family presentation as a table; G = <a, b>, y = c.

    Raises ExtensionInvalid when a step fails its validity test and
    CoreNotTrivial when <c> contains a nontrivial normal subgroup.
    """
    p = canonical(p)
    if p.m >= p.n:
        raise errors.InvalidParameter("need m < n")
    X = None
    for _, X in family_extension_steps(p):
        pass
    a, b, c = X.gen("a"), X.gen("b"), X.gen("c")
    Xr = _relabel(X, a, b, c, p.n, p.m, p.descriptor())
    G = base_group(p.gtype, p.n)
    N = G.order
    if not np.array_equal(Xr.table[:N, :N], G.table):
        raise errors.ConstructionInconsistent("<a, b> does not satisfy the group relations")
    if check:
        bad = first_nonassociative_light(Xr.table, [1, 2, N])
        if bad is not None:
            raise errors.ConstructionInconsistent(f"family group not associative at {bad}")
    g_part = Subgroup(Xr, tuple(range(N)), (1, 2))
    c_part = subgroup_generated(Xr, [N])
    corefree = core_of(Xr, c_part).order == 1
    if not corefree:
        raise errors.CoreNotTrivial("<c> has a nontrivial core", params=p.descriptor())
    return SkewProductGroup(Xr, g_part, c_part, N, True, G)


def family_ranges(family: str, n: int, m: int):
    big, small = 1 << (n - 1), 1 << (n - 2)
    if family == "F1":
        return {"r": range(big), "s": range(big)}
    if family in ("F2_1", "F2_2"):
        return {"r": range(small), "s": range(small), "t": range(small), "v": range(1 << m)}
    if m != n - 1:
        return {"s": range(0), "u": range(0), "y": range(0)}
    return {"s": range(small), "u": range(small), "y": range(small)}


def enumerate_family_params(n: int, m: int, gtype: str, families: Iterable[str] = FAMILIES,
                            predicate=None, corrected: bool = True) -> list[FamilyParams]:
    """All residue tuples accepted by the family checks, in lexicographic order."""
    if n < 5 or m < 1:
        raise errors.InvalidParameter("need n >= 5 and m >= 1")
    if m >= n:
        return []
    if predicate is None:
        def predicate(p):
            return check_family(p, corrected)
    out = []
    for fam in families:
        rng = family_ranges(fam, n, m)
        names = list(rng)
        for vals in itertools.product(*(rng[k] for k in names)):
            p = canonical(FamilyParams(fam, gtype, n, m, **dict(zip(names, vals))))
            if predicate(p):
                out.append(p)
    return out


def extension_predicate(p: FamilyParams) -> bool:
    """Ground truth: the construction succeeds with a core-free <c>."""
    try:
        build_family_group(p, check=False)
    except (errors.ExtensionInvalid, errors.CoreNotTrivial, errors.TauNotAutomorphism):
        return False
    return True


# ---------------------------------------------------------------- complements and classification

def corefree_complements(sp: SkewProductGroup) -> list[int]:
    """Every y generating a core-free cyclic complement to the G part."""
    X = sp.x
    k = X.order // sp.g_part.order
    orders = X.orders()
    gmask = sp.g_part.mask
    seen_cores: dict[tuple, bool] = {}
    out = []
    for y in np.flatnonzero(orders == k):
        Y = subgroup_generated(X, [int(y)])
        if (Y.mask & gmask).sum() != 1:
            continue
        key = Y.members
        if key not in seen_cores:
            seen_cores[key] = core_of(X, Y).order == 1
        if seen_cores[key]:
            out.append(int(y))
    return out


def skews_from_group(sp: SkewProductGroup) -> list[SkewMorphism]:
    G = sp.g_group
    return [extract_skew(sp.x, sp.g_part, y, group=G) for y in corefree_complements(sp)]


def conjugate_skew(s: SkewMorphism, alpha: np.ndarray) -> SkewMorphism:
    """alpha sigma alpha^-1 with power function pi o alpha^-1."""
    ainv = np.argsort(alpha)
    sig = alpha[s.sigma[ainv]]
    pi = s.pi[ainv]
    return SkewMorphism(s.group, _freeze_arr(sig), _freeze_arr(pi), s.sigma_order)


def automorphisms(G: FiniteGroup) -> np.ndarray:
    """All automorphisms of G as rows of a permutation array."""
    W = Subgroup(G, tuple(range(G.order)), tuple(_subgroup_gens(G, range(G.order))))
    members, maps = monomorphisms_into(G, W)
    out = np.empty_like(maps)
    out[:, members] = maps
    return out[np.lexsort(out.T[::-1])]


@dataclass(frozen=True)
class FamilySource:
    """Where a skew morphism of G comes from: a family tuple, a complement
    generator of the family group and an automorphism of G (identity when
    the canonical generators a, b already realize it)."""
    params: FamilyParams | None
    y: int
    alpha: tuple[int, ...] | None


def _family_sources(gtype: str, n: int, corrected: bool = True):
    G = base_group(gtype, n)
    direct: dict[tuple, tuple[SkewMorphism, FamilySource]] = {}
    idm = identity_morphism(G)
    direct[idm.key()] = (idm, FamilySource(None, 0, None))
    stats = {"tuples": 0, "build_failures": 0, "direct": 0}
    for m in range(1, n):
        for p in enumerate_family_params(n, m, gtype, corrected=corrected):
            stats["tuples"] += 1
            try:
                sp = build_family_group(p)
            except errors.SkewError:
                stats["build_failures"] += 1
                continue
            for y in corefree_complements(sp):
                sk = extract_skew(sp.x, sp.g_part, y, group=G)
                direct.setdefault(sk.key(), (sk, FamilySource(p, y, None)))
    stats["direct"] = len(direct)
    return G, direct, stats


def family_skew_morphisms(gtype: str, n: int, corrected: bool = True,
                          close_under_aut: bool = True) -> tuple[list[SkewMorphism], dict]:
    """Skew morphisms of G read off every family group over every core-free complement.

    The identity (trivial complement, X = G) is added since the families
    all have m >= 1. With ``close_under_aut`` the canonical generators a, b
    range over all generating pairs satisfying the relations of G, which
    amounts to conjugating by Aut(G). Returns the sorted morphisms and counts.
    """
    index, stats = family_index(gtype, n, corrected, close_under_aut)
    out = [index[k][0] for k in sorted(index)]
    return out, stats


_INDEX_CACHE: dict[tuple, tuple[dict, dict]] = {}


def family_index(gtype: str, n: int, corrected: bool = True, close_under_aut: bool = True):
    """Map from skew-morphism key to (morphism, FamilySource); memoized per process."""
    ck = (gtype, n, corrected, close_under_aut)
    if ck in _INDEX_CACHE:
        return _INDEX_CACHE[ck]
    G, found, stats = _family_sources(gtype, n, corrected)
    if close_under_aut:
        auts = automorphisms(G)
        for key in sorted(found):
            s, src = found[key]
            if src.alpha is not None:
                continue
            for alpha in auts:
                c = conjugate_skew(s, alpha)
                if c.key() not in found:
                    found[c.key()] = (c, FamilySource(src.params, src.y, tuple(alpha.tolist())))
    stats = dict(stats, morphisms=len(found))
    _INDEX_CACHE[ck] = (found, stats)
    return found, stats


@dataclass
class Classification:
    core_size: int
    family: str
    witness: FamilyParams | None
    witness_generators: dict[str, int]

    def to_dict(self) -> dict:
        return {"core_size": self.core_size, "family": self.family,
                "witness": self.witness.descriptor() if self.witness else None,
                "witness_generators": self.witness_generators}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


_SHAPE_FAMILY = {"G": "F1", "index2": "F2", "a0": "F3"}


def witness_generators(sp: SkewProductGroup, src: FamilySource) -> dict[str, int]:
    """Elements a, b, c of sp.x satisfying the family presentation of ``src``.

    The family group X0 with complement <y0> maps onto X by
    g y0^i -> alpha(g) y^i; a, b, c are the images of the canonical
    generators of X0.
    """
    X = sp.x
    fsp = build_family_group(src.params)
    X0, N = fsp.x, fsp.g_part.order
    y0 = src.y
    alpha = np.arange(N) if src.alpha is None else np.array(src.alpha)
    gpos = np.array(sp.g_part.members)
    # decompose each element of X0 as g y0^i
    T0 = X0.table
    ypow = [0]
    for _ in range(X0.order // N - 1):
        ypow.append(int(T0[ypow[-1], y0]))
    ypowX = [0]
    for _ in range(X.order // N - 1):
        ypowX.append(int(X.table[ypowX[-1], sp.y]))

    def image(x0: int) -> int:
        for i, yp in enumerate(ypow):
            g = int(T0[x0, X0.inverse[yp]])
            if g < N:
                return int(X.table[gpos[alpha[g]], ypowX[i]])
        raise errors.ConstructionInconsistent("element is not in G<y0>")

    return {"a": image(2), "b": image(1), "c": image(N)}


def classify_skew_product(sp: SkewProductGroup, search: bool = True) -> Classification:
    """Family tag from the core of G, plus a parameter witness when found.

    The witness comes from the family index of G: the first family tuple
    (in enumeration order) whose group, through some complement and some
    choice of generators of G, yields the skew morphism of ``sp``.
    """
    from .theorems import core_shape

    if not sp.complement_corefree:
        raise errors.HypothesesNotMet("complement is not core-free")
    N = sp.g_part.order
    n = N.bit_length() - 1
    if sp.x.order & (sp.x.order - 1) or N < 32 or N != 1 << n:
        raise errors.HypothesesNotMet("X must be a 2-group and |G| >= 32")
    shape, GX = core_shape(sp)
    if shape is None:
        raise errors.CoreShapeUnexpected(f"core of G has order {GX.order}", core=list(GX.members))
    fam = _SHAPE_FAMILY[shape]
    gtype = _gtype_of(sp.g_group)
    witness, gens = None, {}
    if search and gtype != "?" and sp.c_part.order > 1:
        index, _ = family_index(gtype, n)
        target = extract_skew(sp.x, sp.g_part, sp.y, group=sp.g_group)
        hit = index.get(target.key())
        if hit is not None and hit[1].params is not None:
            witness = hit[1].params
            gens = witness_generators(sp, hit[1])
    return Classification(GX.order, fam, witness, gens)


def _gtype_of(G: FiniteGroup) -> str:
    kind = G.descriptor.split(":", 1)[0]
    return {"dihedral": "D", "quaternion": "Q", "semidihedral": "SD"}.get(kind, "?")


def presentation_holds(X: FiniteGroup, p: FamilyParams, gens: Mapping[str, int]) -> bool:
    """Check that a, b, c in X generate a copy of the family group of ``p``."""
    X0 = build_family_group(p).x
    f = extend_homomorphism(X0, X, {X0.gen("a"): gens["a"], X0.gen("b"): gens["b"],
                                     X0.gen("c"): gens["c"]})
    return f is not None and np.unique(f).size == X0.order == X.order
