"""Seeded instance generators for the property and acceptance suites."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import ceil, comb

from .core import LinearMatroid, mask_tuple, to_mask
from .geometry import pg, projective_points
from .gf import FieldSpec, field_of_order, make_field, subfield_embedding
from .linalg import normalize, rank_of
from .search import RestrictionWitness
from .structure import StackCertificate


def random_linear(rng: random.Random, q: int, rank: int, n: int) -> LinearMatroid:
    """n uniformly random columns of GF(q)^rank (zero and repeated columns allowed)."""
    F = field_of_order(q)
    cols = [tuple(rng.randrange(q) for _ in range(rank)) for _ in range(n)]
    return LinearMatroid(F, rank, cols)


def rational_points(M: LinearMatroid, q: int) -> list[int]:
    """Indices of M whose normalized column has all entries in GF(q)."""
    sub = set(subfield_embedding(field_of_order(q), M.spec))
    out = []
    for e, c in enumerate(M.columns):
        v = normalize(M.spec, c)
        if v is not None and all(x in sub for x in v):
            out.append(e)
    return out


def subgeometry_witness(M: LinearMatroid, q: int) -> RestrictionWitness:
    """The map from pg(r(M), q) onto the rational points of M (first copy of each)."""
    r = M.rows
    small = field_of_order(q)
    emb = subfield_embedding(small, M.spec)
    where: dict[tuple[int, ...], int] = {}
    for e, c in enumerate(M.columns):
        v = normalize(M.spec, c)
        if v is not None and v not in where:
            where[v] = e
    mapping = tuple(where[tuple(emb[x] for x in v)] for v in projective_points(small, r))
    return RestrictionWitness(mapping, f"pg:{r}:{q}")


def _is_rational(spec: FieldSpec, sub: set[int], v: tuple[int, ...]) -> bool:
    w = normalize(spec, v)
    return w is not None and all(x in sub for x in w)


def _random_point(rng: random.Random, spec: FieldSpec, r: int) -> tuple[int, ...]:
    while True:
        v = normalize(spec, [rng.randrange(spec.q) for _ in range(r)])
        if v is not None:
            return v


@dataclass
class ProjectionInstance:
    M: LinearMatroid
    R: RestrictionWitness
    F: tuple[int, ...]
    q: int


def fano_projection_instance() -> ProjectionInstance:
    """pg(3, 2) written over GF(4) plus the point (1, w, 0); F is that point."""
    F4 = make_field(2, 2)
    P = pg(3, 2, F4)
    M = LinearMatroid(F4, 3, list(P.columns) + [(1, 2, 0)])
    return ProjectionInstance(M, RestrictionWitness(tuple(range(7)), "pg:3:2"), (7,), 2)


def projection_instances(seed: int, count: int) -> list[ProjectionInstance]:
    """pg(r, q) over GF(q^2) plus random non-rational points.

    F is the closure of k random non-rational points whose span holds no
    rational point, so F is a rank-k flat missing the subgeometry.
    """
    rng = random.Random(seed)
    out: list[ProjectionInstance] = []
    while len(out) < count:
        q = rng.choice((2, 3))
        r = rng.choice((2, 3, 4)) if q == 2 else rng.choice((2, 3))
        big = field_of_order(q * q)
        sub = set(subfield_embedding(field_of_order(q), big))
        P = pg(r, q, big)
        k = rng.randrange(0, r // 2 + 1)
        available = (q ** (2 * r) - 1) // (q * q - 1) - (q**r - 1) // (q - 1)
        extra_n = min(rng.randrange(0, 4), available - k)
        cols = list(P.columns)
        nonrat = []
        while len(nonrat) < k + extra_n:
            v = _random_point(rng, big, r)
            if not _is_rational(big, sub, v) and v not in nonrat:
                nonrat.append(v)
        M = LinearMatroid(big, r, cols + nonrat)
        base = len(cols)
        X = to_mask(range(base, base + k))
        if M.rank_mask(X) != k:
            continue
        Fm = M.closure_mask(X)
        if Fm & to_mask(range(base)):
            continue
        out.append(ProjectionInstance(M, RestrictionWitness(tuple(range(base)), f"pg:{r}:{q}"),
                                      mask_tuple(Fm), q))
    return out


@dataclass
class ProjectedGeometry:
    """pg(r, 2) over GF(4) together with extra points X of rank at most 2."""

    M: LinearMatroid
    X: tuple[int, ...]
    r: int


def _gl2_generators(r: int) -> list[list[list[int]]]:
    gens = []
    for i in range(r):
        for j in range(r):
            if i != j:
                A = [[int(a == b) for b in range(r)] for a in range(r)]
                A[i][j] = 1
                gens.append(A)
    return gens


def projected_geometries(max_rank: int = 4, max_extra: int = 3) -> list[ProjectedGeometry]:
    """One (M, X) per GL(r, 2)-orbit of extra point sets X in PG(r-1, 4).

    X has at most ``max_extra`` distinct points and rank at most 2; points of
    X lying in the binary subgeometry become parallel copies, so M \\ X still
    simplifies to pg(r, 2).  Elementary transvections generate GL(r, 2).
    """
    F4 = make_field(2, 2)
    add, mul = F4.add_table, F4.mul_table
    out: list[ProjectedGeometry] = []
    for r in range(1, max_rank + 1):
        P = pg(r, 2, F4)
        pts = projective_points(F4, r)
        index = {v: i for i, v in enumerate(pts)}
        cands: list[tuple[int, ...]] = [()]
        for size in range(1, max_extra + 1):
            for S in combinations(range(len(pts)), size):
                if rank_of(F4, [pts[i] for i in S], r) <= 2:
                    cands.append(S)
        cset = {S: i for i, S in enumerate(cands)}
        parent = list(range(len(cands)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        perms = []
        for A in _gl2_generators(r):
            img = []
            for v in pts:
                w = [0] * r
                for a in range(r):
                    acc = 0
                    for b in range(r):
                        if A[a][b]:
                            acc = add[acc][mul[A[a][b]][v[b]]]
                    w[a] = acc
                img.append(index[normalize(F4, w)])
            perms.append(img)
        for S, i in cset.items():
            for img in perms:
                T = tuple(sorted(img[x] for x in S))
                a, b = find(i), find(cset[T])
                if a != b:
                    parent[max(a, b)] = min(a, b)
        reps = sorted({find(i) for i in range(len(cands))})
        for i in reps:
            S = cands[i]
            cols = list(P.columns) + [pts[x] for x in S]
            n0 = len(P.columns)
            out.append(ProjectedGeometry(LinearMatroid(F4, r, cols),
                                         tuple(range(n0, n0 + len(S))), r))
    return out


@dataclass
class StackOverGeometry:
    M: LinearMatroid
    R: RestrictionWitness
    cert: StackCertificate
    h: int
    q: int


def stack_over_geometry(rng: random.Random, q: int, h: int, r: int) -> StackOverGeometry:
    """pg(r, q) over GF(q^2) plus C(h+1, 2) layers of q + 2 non-rational points.

    Each layer lies on a line skew to the span of the earlier layers, so after
    contracting them it is a U_{2,q+2}, which is not GF(q)-representable.
    """
    nlayers = comb(h + 1, 2)
    if 2 * nlayers > r:
        raise ValueError(f"rank {r} too small for {nlayers} skew lines")
    big = field_of_order(q * q)
    sub = set(subfield_embedding(field_of_order(q), big))
    P = pg(r, q, big)
    cols = list(P.columns)
    spans: list[tuple[int, ...]] = []
    layers = []
    while len(layers) < nlayers:
        a, b = _random_point(rng, big, r), _random_point(rng, big, r)
        if rank_of(big, spans + [a, b], r) != len(spans) + 2:
            continue
        line = []
        for s, t in product(range(big.q), repeat=2):
            v = normalize(big, [big.add(big.mul(s, x), big.mul(t, y)) for x, y in zip(a, b)])
            if v is not None and v not in line and not _is_rational(big, sub, v):
                line.append(v)
        if len(line) < q + 2:
            continue
        pick = sorted(rng.sample(sorted(line), q + 2))
        start = len(cols)
        cols.extend(pick)
        layers.append(tuple(range(start, start + q + 2)))
        spans.extend([a, b])
    M = LinearMatroid(big, r, cols)
    R = RestrictionWitness(tuple(range(len(P.columns))), f"pg:{r}:{q}")
    return StackOverGeometry(M, R, StackCertificate(q, 2, tuple(layers)), h, q)


def stack_flat_instances(seed: int, per_case: int = 3) -> list[StackOverGeometry]:
    rng = random.Random(seed)
    out = []
    for q in (2, 3):
        for h, ranks in ((1, (3, 4)), (2, (6,))):
            for r in ranks:
                for _ in range(per_case):
                    out.append(stack_over_geometry(rng, q, h, r))
    return out


def dense_binary_subsets(seed: int, r: int, count: int,
                         density: Fraction = Fraction(1, 4)) -> list[tuple[int, ...]]:
    """Uniform random point sets of pg(r, 2) with ceil(density * 2^r) points."""
    rng = random.Random(seed)
    n = 2**r - 1
    size = ceil(Fraction(density) * 2**r)
    return [tuple(sorted(rng.sample(range(n), size))) for _ in range(count)]
