"""Independent reference computations used by the tests.

Nothing here calls into the FFT path or the library's fast routines; each
oracle is the textbook definition evaluated by brute force.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def coords(N: int, d: int) -> list[tuple[int, ...]]:
    """Group elements in row-major (flat index) order."""
    return list(itertools.product(range(N), repeat=d))


def direct_dft(x: np.ndarray, N: int, d: int) -> np.ndarray:
    """Quadratic-time sum  |G|^{-1/2} sum_g x(g) exp(-2 pi i <g, xi>/N)."""
    pts = np.array(coords(N, d), dtype=np.int64)
    n = len(pts)
    out = np.zeros(n, dtype=np.complex128)
    for k, xi in enumerate(pts):
        phase = (pts @ xi) % N
        out[k] = np.sum(x * np.exp(-2j * np.pi * phase / N))
    return out / math.sqrt(n)


def fourier_matrix(N: int, d: int) -> np.ndarray:
    n = N**d
    return np.stack([direct_dft(e, N, d) for e in np.eye(n)], axis=1)


def dense_sigma(N: int, d: int, S, Sigma) -> float:
    """Top singular value of the DFT block with rows Sigma and columns S."""
    if len(S) == 0 or len(Sigma) == 0:
        return 0.0
    M = fourier_matrix(N, d)[np.ix_(list(Sigma), list(S))]
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _add(a: tuple, b: tuple, N: int) -> tuple:
    return tuple((x + y) % N for x, y in zip(a, b))


def brute_energy(F, N: int, d: int) -> int:
    """Count quadruples (x, y, x', y') in F^4 with x + y = x' + y' directly."""
    pts = coords(N, d)
    elems = [pts[i] for i in F]
    count = 0
    for x, y, u, v in itertools.product(elems, repeat=4):
        if _add(x, y, N) == _add(u, v, N):
            count += 1
    return count


def brute_max_ratio(Sigma, N: int, d: int) -> float:
    """max over nonempty F inside Sigma of energy(F)/|F|^2 by subset enumeration."""
    best = 0.0
    members = list(Sigma)
    for k in range(1, len(members) + 1):
        for F in itertools.combinations(members, k):
            best = max(best, brute_energy(F, N, d) / k**2)
    return best


def add_table(N: int, d: int) -> np.ndarray:
    pts = coords(N, d)
    index = {p: i for i, p in enumerate(pts)}
    n = len(pts)
    return np.array([[index[_add(pts[i], pts[j], N)] for j in range(n)] for i in range(n)])


def all_mask_energies(N: int, d: int) -> np.ndarray:
    """energy(F) for every subset F of G, indexed by bitmask (|G| <= 16)."""
    n = N**d
    table = add_table(N, d)
    masks = np.arange(1 << n, dtype=np.int64)
    B = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    E = np.zeros(len(masks), dtype=np.int64)
    for z in range(n):
        # r(z) = #{(i, j) in F^2 : i + j = z}
        partner = np.array([int(np.flatnonzero(table[i] == z)[0]) for i in range(n)])
        r = (B * B[:, partner]).sum(axis=1)
        E += r * r
    return E


def all_mask_max_ratio(N: int, d: int) -> np.ndarray:
    """max energy(F)/|F|^2 over nonempty F contained in each mask."""
    n = N**d
    E = all_mask_energies(N, d)
    masks = np.arange(1 << n, dtype=np.int64)
    size = np.zeros(len(masks), dtype=np.int64)
    for i in range(n):
        size += (masks >> i) & 1
    best = np.where(size > 0, E / np.maximum(size, 1) ** 2, 0.0)
    for i in range(n):
        has = (masks >> i) & 1 == 1
        best[has] = np.maximum(best[has], best[masks[has] ^ (1 << i)])
    return best


def affine_permutations(N: int, d: int) -> list[np.ndarray]:
    """x -> A x + b for invertible A over Z/N and all b, as permutations of flat indices."""
    pts = coords(N, d)
    index = {p: i for i, p in enumerate(pts)}
    mats = []
    for entries in itertools.product(range(N), repeat=d * d):
        A = np.array(entries).reshape(d, d)
        det = int(round(np.linalg.det(A))) % N
        if math.gcd(det, N) == 1:
            mats.append(A)
    perms = []
    P = np.array(pts)
    for A in mats:
        lin = (P @ A.T) % N
        for b in pts:
            img = (lin + np.array(b)) % N
            perms.append(np.array([index[tuple(r)] for r in img]))
    return perms


def orbit_representatives(N: int, d: int, max_size: int) -> list[tuple[int, ...]]:
    """One subset per affine orbit, for all nonempty subsets of size <= max_size."""
    n = N**d
    masks = np.arange(1 << n, dtype=np.int64)
    canon = masks.copy()
    for perm in affine_permutations(N, d):
        img = np.zeros_like(masks)
        for i in range(n):
            img |= ((masks >> i) & 1) << int(perm[i])
        np.minimum(canon, img, out=canon)
    size = np.zeros_like(masks)
    for i in range(n):
        size += (masks >> i) & 1
    reps = np.unique(canon[(size >= 1) & (size <= max_size)])
    return [tuple(i for i in range(n) if (m >> i) & 1) for m in reps.tolist()]


def lp_norm(x: np.ndarray, p: float, axis: int = -1) -> np.ndarray:
    a = np.abs(x)
    if p == math.inf:
        return a.max(axis=axis)
    return (a**p).sum(axis=axis) ** (1.0 / p)
