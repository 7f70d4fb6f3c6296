"""Small table-driven kernels shared by the group and structure layers."""
from __future__ import annotations

import numpy as np

from ._accel import njit


@njit
def closure(table, gens):
    """Subgroup generated by ``gens`` as a boolean membership mask.

    In a finite group closure under products alone already gives a
    subgroup, so inverses are never looked up.
    """
    n = table.shape[0]
    mask = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    mask[0] = True
    queue[0] = 0
    head, tail = 0, 1
    while head < tail:
        x = queue[head]
        head += 1
        for j in range(gens.shape[0]):
            y = table[x, gens[j]]
            if not mask[y]:
                mask[y] = True
                queue[tail] = y
                tail += 1
    return mask


@njit
def is_latin(table):
    n = table.shape[0]
    seen = np.zeros(n, dtype=np.int64)
    stamp = 0
    for i in range(n):
        stamp += 1
        for j in range(n):
            v = table[i, j]
            if v < 0 or v >= n or seen[v] == stamp:
                return False
            seen[v] = stamp
        stamp += 1
        for j in range(n):
            v = table[j, i]
            if seen[v] == stamp:
                return False
            seen[v] = stamp
    return True


def first_nonassociative(table: np.ndarray, samples: int = 0, seed: int = 0):
    """Return a triple (x, y, z) with (xy)z != x(yz), or None.

    Exhaustive when ``samples`` is 0, otherwise checks that many random
    triples drawn from a seeded generator.
    """
    n = table.shape[0]
    if samples:
        rng = np.random.default_rng(seed)
        x, y, z = rng.integers(0, n, size=(3, samples))
        bad = np.nonzero(table[table[x, y], z] != table[x, table[y, z]])[0]
        return None if bad.size == 0 else (int(x[bad[0]]), int(y[bad[0]]), int(z[bad[0]]))
    for x in range(n):
        # row x of both bracketings as an n-by-n block over (y, z)
        left = table[table[x]]
        right = table[x][table]
        if not np.array_equal(left, right):
            y, z = np.argwhere(left != right)[0]
            return int(x), int(y), int(z)
    return None


def element_orders(table: np.ndarray) -> np.ndarray:
    n = table.shape[0]
    orders = np.zeros(n, dtype=np.int64)
    cur = np.arange(n)
    for step in range(1, n + 1):
        hit = (cur == 0) & (orders == 0)
        orders[hit] = step
        if orders.all():
            break
        cur = table[cur, np.arange(n)]
    return orders
