"""Propagation search for skew morphisms with a fixed kernel.

The driver in ``skew.py`` fixes three things before calling ``run_search``:
the order k of sigma, the kernel subgroup K = {g : pi(g) = 1} and the
restriction phi = sigma|K (a monomorphism K -> G). Everything here is
written in the numba subset and runs unchanged as plain Python when numba
is disabled.

State
  sig, sinv   partial permutation and its inverse (-1 = unknown)
  pm          bitmask over Z_k of still-possible values of pi
  pi          pinned value of pi or -1
Every write is logged on a trail so a backtrack is a truncation.

Sound rules used by ``propagate`` (g, h range over G):
  * sigma(gh) = sigma(g) sigma^pi(g)(h), in both directions along chains
  * tau_g = sigma(g)^-1 sigma(g .) commutes with sigma
  * pi is constant on right cosets Kg and distinct across cosets
  * tau_g(h) = tau_g'(h) forces |orbit(h)| to divide pi(g) - pi(g')
  * pi(gh) = sum_{l < pi(g)} pi(sigma^l h)
  * Fix(sigma) is closed under products
  * closed orbits: length divides k, |orbit(h)| = |orbit(h^-1)|, and the
    multiset of lengths must fit one admissible orbit type
"""
from __future__ import annotations

import numpy as np

from ._accel import njit

FAIL = -1
SAME = 0
CHANGED = 1

ST_DONE = 0
ST_BUDGET = 3
ST_OVERFLOW = 4


@njit
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit
def _lowbit_index(x):
    i = 0
    while not (x >> i) & 1:
        i += 1
    return i


@njit
def _setsig(x, y, sig, sinv, trail, tr):
    if sig[x] == y:
        return SAME
    if sig[x] != -1 or sinv[y] != -1:
        return FAIL
    sig[x] = y
    sinv[y] = x
    t = tr[0]
    trail[t, 0] = 0
    trail[t, 1] = x
    tr[0] = t + 1
    return CHANGED


@njit
def _setpm(g, m, pm, pi, trail, tr):
    nm = pm[g] & m
    if nm == pm[g]:
        return SAME
    if nm == 0:
        return FAIL
    t = tr[0]
    trail[t, 0] = 1
    trail[t, 1] = g
    trail[t, 2] = pm[g]
    trail[t, 3] = pi[g]
    tr[0] = t + 1
    pm[g] = nm
    if nm & (nm - 1) == 0:
        pi[g] = _lowbit_index(nm)
    return CHANGED


@njit
def _undo(mark, sig, sinv, pm, pi, trail, tr):
    t = tr[0]
    while t > mark:
        t -= 1
        if trail[t, 0] == 0:
            x = trail[t, 1]
            sinv[sig[x]] = -1
            sig[x] = -1
        else:
            g = trail[t, 1]
            pm[g] = trail[t, 2]
            pi[g] = trail[t, 3]
    tr[0] = mark


@njit
def _chains(sig, sinv, k, chain, clen, closed, span):
    """Forward chain from every point; span = known length of its whole orbit."""
    n = sig.shape[0]
    for h in range(n):
        chain[h, 0] = h
        ln = 1
        x = h
        cl = False
        while True:
            y = sig[x]
            if y == -1:
                break
            if y == h:
                cl = True
                break
            if ln >= k:
                return False
            chain[h, ln] = y
            ln += 1
            x = y
        clen[h] = ln
        closed[h] = cl
        if cl:
            span[h] = ln
        else:
            back = 0
            x = h
            while sinv[x] != -1:
                x = sinv[x]
                back += 1
            span[h] = ln + back
            if span[h] > k:
                return False
    return True


@njit
def _types_ok(closed, clen, chain, sinv, k, types, counts):
    """Closed-orbit multiset and longest open chain must fit some type."""
    n = closed.shape[0]
    for L in range(k + 1):
        counts[L] = 0
    maxopen = 0
    for h in range(1, n):
        if closed[h]:
            L = clen[h]
            lo = h
            for j in range(L):
                if chain[h, j] < lo:
                    lo = chain[h, j]
            if lo == h:
                counts[L] += 1
        elif sinv[h] == -1 and clen[h] > maxopen:
            maxopen = clen[h]
    for t in range(types.shape[0]):
        ok = True
        for L in range(1, k + 1):
            if counts[L] > types[t, L]:
                ok = False
                break
        if not ok:
            continue
        if maxopen == 0:
            return True
        for L in range(maxopen, k + 1):
            if types[t, L] > counts[L]:
                return True
    return False


@njit
def propagate(T, inv, k, coset, sig, sinv, pm, pi, trail, tr, types, lenmask,
              chain, clen, closed, span, counts):
    n = T.shape[0]
    full = (1 << k) - 1
    changed = True
    while changed:
        changed = False
        if not _chains(sig, sinv, k, chain, clen, closed, span):
            return False
        for h in range(1, n):
            if closed[h]:
                L = clen[h]
                if k % L != 0:
                    return False
                hi = inv[h]
                if closed[hi]:
                    if clen[hi] != L:
                        return False
                elif span[hi] > L:
                    return False
        if not _types_ok(closed, clen, chain, sinv, k, types, counts):
            return False

        # fixed points form a subgroup
        for x in range(n):
            if sig[x] != x:
                continue
            for y in range(n):
                if sig[y] != y:
                    continue
                z = T[x, y]
                r = _setsig(z, z, sig, sinv, trail, tr)
                if r == FAIL:
                    return False
                if r == CHANGED:
                    changed = True

        for g in range(n):
            x = sig[g]
            if x == -1:
                continue
            xi = inv[x]
            if pi[g] == -1:
                # narrow pi(g) from every known value of tau_g
                allowed = pm[g]
                for h in range(n):
                    z = sig[T[g, h]]
                    if z == -1:
                        continue
                    t = T[xi, z]
                    L = clen[h]
                    J = 0
                    if closed[h]:
                        for j in range(k):
                            if chain[h, j % L] == t:
                                J |= 1 << j
                    else:
                        for j in range(min(L, k)):
                            if chain[h, j] == t:
                                J |= 1 << j
                        J |= full & ~((1 << L) - 1)
                    allowed &= J
                    if allowed == 0:
                        return False
                r = _setpm(g, allowed, pm, pi, trail, tr)
                if r == FAIL:
                    return False
                if r == CHANGED:
                    changed = True
            i = pi[g]
            if i == -1:
                continue
            for h in range(n):
                L = clen[h]
                gh = T[g, h]
                if closed[h] or L > i:
                    w = chain[h, i % L]
                    r = _setsig(gh, T[x, w], sig, sinv, trail, tr)
                    if r == FAIL:
                        return False
                    if r == CHANGED:
                        changed = True
                elif L == i and sig[gh] != -1:
                    r = _setsig(chain[h, L - 1], T[xi, sig[gh]], sig, sinv, trail, tr)
                    if r == FAIL:
                        return False
                    if r == CHANGED:
                        changed = True

        # tau_g commutes with sigma: sigma(tau_g(h)) = tau_g(sigma(h))
        for g in range(n):
            x = sig[g]
            if x == -1:
                continue
            xi = inv[x]
            for h in range(n):
                y = sig[T[g, h]]
                if y == -1:
                    continue
                z = sig[h]
                if z == -1:
                    continue
                t = T[xi, y]
                s1 = sig[t]
                gz = T[g, z]
                w = sig[gz]
                if s1 != -1:
                    r = _setsig(gz, T[x, s1], sig, sinv, trail, tr)
                elif w != -1:
                    r = _setsig(t, T[xi, w], sig, sinv, trail, tr)
                else:
                    r = SAME
                if r == FAIL:
                    return False
                if r == CHANGED:
                    changed = True

        # pi is a coset invariant that separates cosets
        for g in range(n):
            if pi[g] == -1:
                continue
            b = 1 << pi[g]
            for h in range(n):
                if coset[h] == coset[g]:
                    r = _setpm(h, b, pm, pi, trail, tr)
                elif pm[h] & b:
                    r = _setpm(h, full & ~b, pm, pi, trail, tr)
                else:
                    r = SAME
                if r == FAIL:
                    return False
                if r == CHANGED:
                    changed = True

        # equal tau values across cosets: |orbit(h)| divides the pi difference
        for h in range(1, n):
            if closed[h]:
                lens = 1 << clen[h]
            else:
                lens = 0
                for L in range(span[h], k + 1):
                    if (lenmask >> L) & 1:
                        lens |= 1 << L
            if lens == 0:
                return False
            D = 0
            for d in range(1, k):
                for L in range(1, k + 1):
                    if (lens >> L) & 1 and d % L == 0:
                        D |= 1 << d
                        break
            first = np.full(n, -1, np.int64)
            for g in range(n):
                x = sig[g]
                if x == -1:
                    continue
                z = sig[T[g, h]]
                if z == -1:
                    continue
                t = T[inv[x], z]
                g2 = first[t]
                if g2 == -1:
                    first[t] = g
                    continue
                if coset[g2] == coset[g]:
                    continue
                if D == 0:
                    return False
                for side in range(2):
                    a = g if side == 0 else g2
                    b2 = g2 if side == 0 else g
                    ma = pm[a]
                    m = 0
                    for i in range(k):
                        if (ma >> i) & 1:
                            for d in range(k):
                                if (D >> d) & 1:
                                    m |= 1 << ((i + d) % k)
                    r = _setpm(b2, m, pm, pi, trail, tr)
                    if r == FAIL:
                        return False
                    if r == CHANGED:
                        changed = True

        # pi(gh) = sum of pi along the first pi(g) steps of the orbit of h
        for g in range(n):
            i = pi[g]
            if i == -1:
                continue
            for h in range(n):
                L = clen[h]
                if not (closed[h] or L >= i):
                    continue
                s = 0
                ok = True
                for l in range(i):
                    v = pi[chain[h, l % L]]
                    if v == -1:
                        ok = False
                        break
                    s += v
                if ok:
                    r = _setpm(T[g, h], 1 << (s % k), pm, pi, trail, tr)
                    if r == FAIL:
                        return False
                    if r == CHANGED:
                        changed = True
    return True


@njit
def is_skew_of_order(T, inv, sig, k, powers):
    """True iff sig is a skew morphism whose order is exactly k."""
    n = T.shape[0]
    for h in range(n):
        powers[0, h] = h
    for j in range(1, k + 1):
        for h in range(n):
            powers[j, h] = sig[powers[j - 1, h]]
    for j in range(1, k):
        same = True
        for h in range(n):
            if powers[j, h] != h:
                same = False
                break
        if same:
            return False
    for h in range(n):
        if powers[k, h] != h:
            return False
    for g in range(n):
        xi = inv[sig[g]]
        found = False
        for j in range(k):
            ok = True
            for h in range(n):
                if T[xi, sig[T[g, h]]] != powers[j, h]:
                    ok = False
                    break
            if ok:
                found = True
                break
        if not found:
            return False
    return True


@njit
def run_search(T, inv, k, kernel, phi, coset, types, lenmask, node_cap, out, stats):
    """Enumerate skew morphisms of order k with kernel K and sigma|K = phi.

    ``kernel`` lists the elements of K, ``phi`` their images. Solutions are
    written to the rows of ``out``. ``stats`` receives nodes, fails and the
    number of solutions. Returns a status code.
    """
    n = T.shape[0]
    full = (1 << k) - 1
    sig = np.full(n, -1, np.int64)
    sinv = np.full(n, -1, np.int64)
    pm = np.full(n, full, np.int64)
    pi = np.full(n, -1, np.int64)
    cap = n * (k + 3) + 8
    trail = np.zeros((cap, 4), np.int64)
    tr = np.zeros(1, np.int64)
    chain = np.zeros((n, k + 1), np.int64)
    clen = np.zeros(n, np.int64)
    closed = np.zeros(n, np.bool_)
    span = np.zeros(n, np.int64)
    counts = np.zeros(k + 1, np.int64)
    powers = np.zeros((k + 1, n), np.int64)
    in_k = np.zeros(n, np.bool_)
    for j in range(kernel.shape[0]):
        in_k[kernel[j]] = True
    one = 1 % k
    nsol = 0
    nodes = 0
    fails = 0

    ok = True
    for j in range(kernel.shape[0]):
        if _setsig(kernel[j], phi[j], sig, sinv, trail, tr) == FAIL:
            ok = False
        if _setpm(kernel[j], 1 << one, pm, pi, trail, tr) == FAIL:
            ok = False
    for g in range(n):
        if not in_k[g]:
            if _setpm(g, full & ~(1 | (1 << one)), pm, pi, trail, tr) == FAIL:
                ok = False
    nodes += 1
    if ok:
        ok = propagate(T, inv, k, coset, sig, sinv, pm, pi, trail, tr, types, lenmask,
                       chain, clen, closed, span, counts)
    if not ok:
        stats[0] = nodes
        stats[1] = fails + 1
        stats[2] = 0
        return ST_DONE

    # explicit DFS stack: kind (0 sigma, 1 pi), variable, next candidate, trail mark, pi mask
    fr_kind = np.zeros(n + 1, np.int64)
    fr_var = np.zeros(n + 1, np.int64)
    fr_next = np.zeros(n + 1, np.int64)
    fr_mark = np.zeros(n + 1, np.int64)
    fr_mask = np.zeros(n + 1, np.int64)
    depth = 0
    select = True
    status = ST_DONE
    while True:
        if select:
            # pick a branching variable at a consistent state
            bp = -1
            bpc = k + 1
            for g in range(n):
                if sig[g] != -1 and pi[g] == -1:
                    c = _popcount(pm[g])
                    if c < bpc:
                        bpc = c
                        bp = g
            sv = -1
            best = n + 1
            for r in range(n):
                if sig[r] != -1:
                    continue
                cnt = 0
                for y in range(1, n):
                    if sinv[y] != -1:
                        continue
                    free = True
                    for j in range(kernel.shape[0]):
                        if sinv[T[phi[j], y]] != -1:
                            free = False
                            break
                    if free:
                        cnt += 1
                if cnt < best:
                    best = cnt
                    sv = r
                    if cnt <= 1:
                        break
            if sv == -1:
                if is_skew_of_order(T, inv, sig, k, powers):
                    if nsol >= out.shape[0]:
                        status = ST_OVERFLOW
                        break
                    for h in range(n):
                        out[nsol, h] = sig[h]
                    nsol += 1
            else:
                if bp != -1 and bpc <= 4:
                    fr_kind[depth] = 1
                    fr_var[depth] = bp
                    fr_mask[depth] = pm[bp]
                else:
                    fr_kind[depth] = 0
                    fr_var[depth] = sv
                fr_next[depth] = 0
                fr_mark[depth] = tr[0]
                depth += 1
            select = False
        if depth == 0:
            break
        if nodes >= node_cap:
            status = ST_BUDGET
            break
        # advance the top frame to its next candidate
        d = depth - 1
        _undo(fr_mark[d], sig, sinv, pm, pi, trail, tr)
        var = fr_var[d]
        c = fr_next[d]
        if fr_kind[d] == 0:
            if c == 0:
                c = 1
            while c < n and sinv[c] != -1:
                c += 1
            if c >= n:
                depth -= 1
                continue
            fr_next[d] = c + 1
            r = _setsig(var, c, sig, sinv, trail, tr)
        else:
            while c < k and not (fr_mask[d] >> c) & 1:
                c += 1
            if c >= k:
                depth -= 1
                continue
            fr_next[d] = c + 1
            r = _setpm(var, 1 << c, pm, pi, trail, tr)
        nodes += 1
        if r != FAIL and propagate(T, inv, k, coset, sig, sinv, pm, pi, trail, tr, types,
                                   lenmask, chain, clen, closed, span, counts):
            select = True
        else:
            fails += 1
    stats[0] = nodes
    stats[1] = fails
    stats[2] = nsol
    return status


@njit
def monomorphisms(T, orders, gens, words_gen, words_prev, members, out):
    """All injective homomorphisms K -> G given a BFS spanning tree of K.

    ``members[i]`` is reached as members[words_prev[i]] * gens[words_gen[i]]
    (words_prev[0] = -1 for the identity). Generator images range over
    elements of equal order. Returns the number of maps; they are written to
    ``out`` unless it has zero rows, and -1 signals that ``out`` overflowed.
    """
    n = T.shape[0]
    m = members.shape[0]
    ng = gens.shape[0]
    pos = np.full(n, -1, np.int64)
    for i in range(m):
        pos[members[i]] = i
    img = np.zeros(ng, np.int64)
    idx = np.zeros(ng, np.int64)
    f = np.zeros(m, np.int64)
    used = np.zeros(n, np.bool_)
    cnt = 0
    total = 1
    for j in range(ng):
        total *= n
    for code in range(total):
        c = code
        good = True
        for j in range(ng):
            idx[j] = c % n
            c //= n
            if orders[idx[j]] != orders[gens[j]]:
                good = False
                break
        if not good:
            continue
        f[0] = 0
        for i in range(1, m):
            f[i] = T[f[words_prev[i]], idx[words_gen[i]]]
        # homomorphism check on all (member, generator) edges
        for i in range(m):
            for j in range(ng):
                if f[pos[T[members[i], gens[j]]]] != T[f[i], idx[j]]:
                    good = False
                    break
            if not good:
                break
        if not good:
            continue
        for i in range(m):
            used[f[i]] = False
        inj = True
        for i in range(m):
            if used[f[i]]:
                inj = False
                break
            used[f[i]] = True
        for i in range(m):
            used[f[i]] = False
        if not inj:
            continue
        if out.shape[0] > 0:
            if cnt >= out.shape[0]:
                return -1
            for i in range(m):
                out[cnt, i] = f[i]
        cnt += 1
    return cnt
