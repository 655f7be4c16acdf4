"""Restriction and minor search.

``find_restriction`` is a backtracking embedding of a simple target matroid
into the points of a host.  Target elements are placed in a fixed order
(most small dependencies first); every placement is checked against the
rank of the placed prefix and of all small subsets through the new element,
and complete maps are verified against every basis of the target.

Searches take a node budget.  Hitting it raises ``SearchBudgetExceeded``
rather than returning a negative answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Sequence

from .core import (LinearMatroid, Matroid, MatroidError, as_linear,
                   iter_bits, mask_tuple, popcount, same_rank_function, to_mask)
from .geometry import pg, pg_point_index
from .gf import field_of_order, subfield_embedding
from .linalg import coordinates, normalize, rank_of

DEFAULT_BUDGET = 10_000_000
REPRESENTABILITY_MAX_ELEMENTS = 12
REPRESENTABILITY_MAX_RANK = 4


class SearchBudgetExceeded(RuntimeError):
    """The node budget ran out before the search was decided."""

    def __init__(self, nodes: int):
        super().__init__(f"search budget of {nodes} nodes exhausted")
        self.nodes = nodes


class DeskScaleExceeded(ValueError):
    """Instance is larger than an exhaustive procedure is allowed to handle."""


@dataclass(frozen=True)
class RestrictionWitness:
    """``mapping[t]`` is the host element playing target element ``t``."""

    mapping: tuple[int, ...]
    target: str = ""

    @property
    def image(self) -> tuple[int, ...]:
        return tuple(sorted(self.mapping))

    def pairs(self) -> list[list[int]]:
        return [[t, h] for t, h in enumerate(self.mapping)]


@dataclass(frozen=True)
class MinorWitness:
    """Target found as a restriction of ``M / contract \\ delete``.

    ``inner.mapping`` uses the host's own element indices.
    """

    contract: tuple[int, ...]
    delete: tuple[int, ...]
    inner: RestrictionWitness

    def to_json(self) -> dict:
        return {"contract": list(self.contract), "delete": list(self.delete),
                "map": self.inner.pairs()}


class _Budget:
    def __init__(self, limit: int | None):
        self.limit = limit
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise SearchBudgetExceeded(self.limit)


# ---------------------------------------------------------------------------
# witness verification
# ---------------------------------------------------------------------------

def _image_mask(mapping: Sequence[int], tmask: int) -> int:
    m = 0
    for t in iter_bits(tmask):
        m |= 1 << mapping[t]
    return m


def _valid_map(M: Matroid, T: Matroid, mapping: Sequence[int]) -> bool:
    return (len(mapping) == T.n and len(set(mapping)) == T.n
            and all(0 <= h < M.n for h in mapping))


def _bases_agree(M: Matroid, T: Matroid, mapping: Sequence[int]) -> bool:
    r = T.r
    if M.rank_mask(_image_mask(mapping, T.ground_mask)) != r:
        return False
    for S in combinations(range(T.n), r):
        tm = to_mask(S)
        if (T.rank_mask(tm) == r) != (M.rank_mask(_image_mask(mapping, tm)) == r):
            return False
    return True


def _linear_equivalent(M: LinearMatroid, T: LinearMatroid, mapping: Sequence[int]) -> bool:
    """Is there an injective linear map sending each target column to a
    nonzero multiple of its image column?  If so the rank functions agree
    on every subset.  Target coordinates are lifted through the subfield
    embedding when M lives over an extension of T's field.
    """
    big = M.spec
    try:
        emb = subfield_embedding(T.spec, big)
    except ValueError:
        return False
    tcols = [tuple(emb[x] for x in c) for c in T.columns]
    mcols = [M.columns[h] for h in mapping]
    # basis of the target, greedily
    basis: list[int] = []
    for j in range(T.n):
        if rank_of(big, [tcols[b] for b in basis + [j]], T.rows) > len(basis):
            basis.append(j)
    if len(basis) != T.r:
        return False
    if rank_of(big, [mcols[b] for b in basis], M.rows) != len(basis):
        return False
    if rank_of(big, mcols, M.rows) != len(basis):
        return False
    tb = [tcols[b] for b in basis]
    mb = [mcols[b] for b in basis]
    # lam[i] scales the i-th basis image; each other column constrains ratios
    lam: list[int | None] = [None] * len(basis)
    constraints = []
    for j in range(T.n):
        a = coordinates(big, tb, tcols[j])
        mu = coordinates(big, mb, mcols[j])
        if a is None or mu is None:
            return False
        if [x != 0 for x in a] != [x != 0 for x in mu]:
            return False
        supp = [i for i, x in enumerate(a) if x]
        if not supp:
            return False
        # lam_i * a_i = kappa * mu_i  =>  lam_i = kappa * mu_i / a_i
        constraints.append([(i, big.div(mu[i], a[i])) for i in supp])
    # propagate: within a constraint all lam_i / (mu_i/a_i) are equal
    changed = True
    lam[0] = 1
    while changed:
        changed = False
        for cons in constraints:
            known = [(i, w) for i, w in cons if lam[i] is not None]
            if not known:
                continue
            i0, w0 = known[0]
            kappa = big.div(lam[i0], w0)
            for i, w in cons:
                want = big.mul(kappa, w)
                if lam[i] is None:
                    lam[i] = want
                    changed = True
                elif lam[i] != want:
                    return False
        if not changed and any(x is None for x in lam):
            i = lam.index(None)
            lam[i] = 1
            changed = True
    return True


def verify_restriction(M: Matroid, T: Matroid, mapping: Sequence[int],
                       method: str = "auto") -> bool:
    """Check that ``mapping`` is an isomorphism from T onto M|image.

    ``method`` is ``exhaustive`` (every subset of T), ``bases`` (every
    r(T)-subset plus the total rank, which determines the matroid),
    ``linear`` (projective-equivalence certificate) or ``auto``.
    """
    if not _valid_map(M, T, mapping):
        return False
    if method == "auto":
        if T.n <= 16:
            method = "exhaustive"
        elif isinstance(T, LinearMatroid) and isinstance(M, LinearMatroid):
            method = "linear"
        elif comb(T.n, T.r) <= 200_000:
            method = "bases"
        else:
            raise DeskScaleExceeded(f"cannot verify a {T.n}-element target")
    if method == "exhaustive":
        return all(T.rank_mask(tm) == M.rank_mask(_image_mask(mapping, tm))
                   for tm in range(1 << T.n))
    if method == "bases":
        return _bases_agree(M, T, mapping)
    if method == "linear":
        if _linear_equivalent(M, T, mapping):
            return True
        if comb(T.n, T.r) <= 200_000:
            return _bases_agree(M, T, mapping)
        return False
    raise ValueError(f"unknown verification method {method!r}")


def _local_positions(M: Matroid, contract: int, delete: int) -> dict[int, int]:
    rest = M.ground_mask & ~(contract | delete)
    return {e: i for i, e in enumerate(iter_bits(rest))}


def verify_minor_witness(M: Matroid, T: Matroid, w: MinorWitness, method: str = "auto") -> bool:
    C, D = M.mask_of(w.contract), M.mask_of(w.delete)
    if C & D:
        return False
    view = M.minor_mask(C, D)
    pos = _local_positions(M, C, D)
    if any(h not in pos for h in w.inner.mapping):
        return False
    return verify_restriction(view, T, [pos[h] for h in w.inner.mapping], method)


# ---------------------------------------------------------------------------
# restriction search
# ---------------------------------------------------------------------------

class _Embedder:
    def __init__(self, M: Matroid, T: Matroid, budget: _Budget, depth: int,
                 order: list[int] | None = None):
        self.M, self.T, self.budget = M, T, budget
        k = T.n
        self.k = k
        if order is None:
            deg = [0] * k
            for S in combinations(range(k), 3):
                if T.rank_mask(to_mask(S)) < 3:
                    for t in S:
                        deg[t] += 1
            order = sorted(range(k), key=lambda t: (-deg[t], t))
        self._plan(order, depth)

    def _plan(self, order: list[int], depth: int) -> None:
        # pairs need no check: targets are simple and candidates are distinct points
        T = self.T
        self.order = order
        self.prefix_rank = []
        self.checks: list[list[tuple[tuple[int, ...], int]]] = []
        placed: list[int] = []
        for i, t in enumerate(order):
            self.prefix_rank.append(T.rank_mask(to_mask(placed + [t])))
            lvl = []
            for size in range(2, depth):
                for S in combinations(range(i), size):
                    tm = to_mask([order[p] for p in S]) | (1 << t)
                    rk = T.rank_mask(tm)
                    lvl.append((S, rk))
            self.checks.append(lvl)
            placed.append(t)

    def search(self, cands: list[int], required: int = 0) -> tuple[int, ...] | None:
        """First map (in candidate order) whose image covers ``required``."""
        self._cands = cands
        self._required = required
        image = [0] * self.k
        found = self._dfs(0, 0, image, popcount(required))
        if found is None:
            return None
        mapping = [0] * self.k
        for i, t in enumerate(self.order):
            mapping[t] = found[i]
        return tuple(mapping)

    def _dfs(self, i: int, used: int, image: list[int], need: int):
        if i == self.k:
            mapping = [0] * self.k
            for j, t in enumerate(self.order):
                mapping[t] = image[j]
            return list(image) if _bases_agree(self.M, self.T, mapping) else None
        M = self.M
        slots_after = self.k - i - 1
        prank = self.prefix_rank[i]
        checks = self.checks[i]
        for h in self._cands:
            hb = 1 << h
            if used & hb:
                continue
            self.budget.tick()
            nreq = need - (1 if self._required & hb else 0)
            if nreq > slots_after:
                continue
            if M.rank_mask(used | hb) != prank:
                continue
            ok = True
            for S, rk in checks:
                m = hb
                for p in S:
                    m |= 1 << image[p]
                if M.rank_mask(m) != rk:
                    ok = False
                    break
            if not ok:
                continue
            image[i] = h
            got = self._dfs(i + 1, used | hb, image, nreq)
            if got is not None:
                return got
        return None


def _check_target(T: Matroid) -> None:
    if not T.is_simple():
        raise MatroidError("restriction targets must be simple")


def find_restriction(M: Matroid, T: Matroid, *, budget: int | None = DEFAULT_BUDGET,
                     prune_depth: int = 3, canonical: bool = True,
                     target_name: str = "", _counter: _Budget | None = None
                     ) -> RestrictionWitness | None:
    """Find a restriction of M isomorphic to the simple matroid T.

    Returns the witness whose sorted image is lexicographically least (ties
    broken by the image tuple in target order), or None when no restriction
    exists.  Raises SearchBudgetExceeded if ``budget`` nodes are not enough.
    """
    _check_target(T)
    counter = _counter or _Budget(budget)
    if T.n == 0:
        return RestrictionWitness((), target_name)
    if T.r > M.r or T.n > M.epsilon():
        return None
    reps = list(iter_bits(M.representatives_mask()))
    emb = _Embedder(M, T, counter, prune_depth)
    first = emb.search(reps)
    if first is None:
        return None
    if not canonical:
        return _verified(M, T, first, target_name)
    # fix the sorted image one position at a time
    best = sorted(first)
    chosen: list[int] = []
    for pos in range(T.n):
        lo = chosen[-1] + 1 if chosen else 0
        for c in reps:
            if c < lo:
                continue
            if c == best[pos]:
                chosen.append(c)
                break
            req = to_mask(chosen) | (1 << c)
            cands = chosen + [x for x in reps if x >= c]
            got = emb.search(cands, req)
            if got is not None:
                best = sorted(got)
                chosen.append(c)
                break
    # least map onto the chosen image, target elements taken in index order
    exact = _Embedder(M, T, counter, prune_depth, order=list(range(T.n)))
    mapping = exact.search(chosen, to_mask(chosen))
    assert mapping is not None
    return _verified(M, T, mapping, target_name)


def _verified(M: Matroid, T: Matroid, mapping: Sequence[int], name: str) -> RestrictionWitness:
    if not verify_restriction(M, T, mapping, method="bases"):  # pragma: no cover
        raise AssertionError("search produced an invalid witness")
    return RestrictionWitness(tuple(mapping), name)


def brute_force_restriction(M: Matroid, T: Matroid) -> bool:
    """Independent oracle: try every injection into the host's elements."""
    from itertools import permutations
    for image in permutations(range(M.n), T.n):
        if all(T.rank_mask(tm) == M.rank_mask(_image_mask(image, tm))
               for tm in range(1 << T.n)):
            return True
    return False


# ---------------------------------------------------------------------------
# U_{2,m} minors
# ---------------------------------------------------------------------------

def _line_witness(M: Matroid, C: int, m: int) -> MinorWitness | None:
    """Least rank-2 flat of M/C with at least m points, as a minor witness."""
    N = M.minor_mask(C, 0)
    pos_to_M = list(iter_bits(M.ground_mask & ~C))
    if N.r < 2:
        return None
    lines = [N.ground_mask] if N.r == 2 else N.flats_masks(2)
    classes = N.parallel_class_masks()
    for L in lines:
        pts = [c for c in classes if c & L]
        if len(pts) >= m:
            chosen = [(c & -c).bit_length() - 1 for c in pts[:m]]
            image = [pos_to_M[x] for x in chosen]
            keep = C | to_mask(image)
            delete = M.ground_mask & ~keep
            return MinorWitness(mask_tuple(C), mask_tuple(delete),
                                RestrictionWitness(tuple(image), f"U2,{m}"))
    return None


def has_u2_minor(M: Matroid, m: int) -> MinorWitness | None:
    """Least U_{2,m}-minor witness of M, or None.

    Existence is settled on the rank-(r-2) flats alone (any U_{2,m}-minor
    survives further contraction of elements outside its line); the
    canonical witness then comes from scanning flats by rank, then order.
    """
    if m < 3:
        raise ValueError("line length must be >= 3")
    r = M.r
    if r < 2:
        return None
    if not any(M.minor_mask(C, 0).epsilon() >= m for C in M.flats_masks(r - 2)):
        return None
    for k in range(r - 1):
        for C in M.flats_masks(k):
            w = _line_witness(M, C, m)
            if w is not None:
                return w
    raise AssertionError("inconsistent U2 scan")  # pragma: no cover


# ---------------------------------------------------------------------------
# representability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Representability:
    """Outcome of ``is_representable``.

    ``embedding[e]`` is the column of ``pg(rank, q)`` receiving element e
    (None for loops) when representable.
    """

    representable: bool
    q: int
    rank: int
    embedding: tuple[int | None, ...] | None = None
    method: str = "search"

    def __bool__(self) -> bool:
        return self.representable

    def to_json(self) -> dict:
        return {"representable": self.representable, "q": self.q, "rank": self.rank,
                "embedding": list(self.embedding) if self.embedding is not None else None,
                "method": self.method}


@lru_cache(maxsize=None)
def _pg_index(r: int, q: int) -> dict[tuple[int, ...], int]:
    return pg_point_index(r, q)


def _greedy_basis(M: Matroid) -> list[int]:
    B: list[int] = []
    m = 0
    for e in range(M.n):
        if M.rank_mask(m | (1 << e)) > len(B):
            B.append(e)
            m |= 1 << e
    return B


def _coordinates_over_basis(L: LinearMatroid) -> list[tuple[int, ...]]:
    B = _greedy_basis(L)
    basis = [L.columns[b] for b in B]
    return [tuple(coordinates(L.spec, basis, c)) for c in L.columns]


def _binary_normal_form(L: LinearMatroid) -> list[tuple[int, ...]] | None:
    """GF(2) vectors for a simple matroid given over a field of characteristic 2.

    Binary matroids are uniquely representable, so after writing L as
    [I | A] and scaling a spanning forest of the support of A to 1, L is
    binary exactly when every entry of A lies in {0, 1}.
    """
    F = L.spec
    vecs = _coordinates_over_basis(L)
    row_s: dict[int, int] = {}
    col_s: dict[int, int] = {}
    adj: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for j, v in enumerate(vecs):
        for i, x in enumerate(v):
            if x:
                adj.setdefault(("r", i), []).append(("c", j))
                adj.setdefault(("c", j), []).append(("r", i))
    for start in sorted(adj):
        node_scale = row_s if start[0] == "r" else col_s
        if start[1] in node_scale:
            continue
        node_scale[start[1]] = 1
        stack = [start]
        while stack:
            kind, a = stack.pop()
            for kind2, b in adj[(kind, a)]:
                scales = row_s if kind2 == "r" else col_s
                if b in scales:
                    continue
                i, j = (a, b) if kind == "r" else (b, a)
                known = row_s[i] if kind == "r" else col_s[j]
                # choose the new scalar so that row_s[i] * A[i][j] * col_s[j] == 1
                scales[b] = F.inv(F.mul(known, vecs[j][i]))
                stack.append((kind2, b))
    out = []
    for j, v in enumerate(vecs):
        w = tuple(F.mul(F.mul(row_s.get(i, 1), x), col_s.get(j, 1)) for i, x in enumerate(v))
        if any(x not in (0, 1) for x in w):
            return None
        out.append(w)
    return out


def linear_over(M: Matroid, q: int) -> LinearMatroid | None:
    L = as_linear(M)
    return L if L is not None and L.q == q else None


def _search_representation(N: Matroid, q: int, budget: _Budget) -> list[tuple[int, ...]] | None:
    """Vectors (over GF(q), length r) representing the simple matroid N.

    The lex-least basis goes to the unit vectors; every other element is
    supported exactly on its fundamental circuit, and entries on a spanning
    forest of the support graph are fixed to 1.  Both normalizations lose
    no generality, so exhausting the search proves non-representability.
    """
    F = field_of_order(q)
    r = N.r
    B = _greedy_basis(N)
    bmask = to_mask(B)
    rest = [e for e in range(N.n) if e not in B]
    support = {}
    for e in rest:
        support[e] = [i for i, b in enumerate(B)
                      if N.rank_mask((bmask & ~(1 << b)) | (1 << e)) == r]
    # spanning forest of the bipartite support graph (rows 0..r-1, columns r+j)
    parent = list(range(r + len(rest)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    fixed: dict[int, set[int]] = {e: set() for e in rest}
    for j, e in enumerate(rest):
        for i in support[e]:
            a, b = find(i), find(r + j)
            if a != b:
                parent[a] = b
                fixed[e].add(i)

    vecs: dict[int, tuple[int, ...]] = {}
    for i, b in enumerate(B):
        vecs[b] = tuple(1 if j == i else 0 for j in range(r))
    placed: list[int] = list(B)
    nonzero = list(range(1, q))

    def options(e: int):
        free = [i for i in support[e] if i not in fixed[e]]
        for vals in product(nonzero, repeat=len(free)):
            v = [0] * r
            for i in fixed[e]:
                v[i] = 1
            for i, x in zip(free, vals):
                v[i] = x
            yield tuple(v)

    def consistent(e: int, v: tuple[int, ...]) -> bool:
        for size in (1, 2):
            if size > len(placed):
                break
            for S in combinations(placed, size):
                want = N.rank_mask(to_mask(S) | (1 << e))
                got = rank_of(F, [vecs[s] for s in S] + [v], r)
                if want != got:
                    return False
        return True

    def full_check() -> bool:
        for S in combinations(range(N.n), r):
            want = N.rank_mask(to_mask(S))
            if rank_of(F, [vecs[s] for s in S], r) != want:
                return False
        return True

    def dfs(j: int) -> bool:
        if j == len(rest):
            return full_check()
        e = rest[j]
        for v in options(e):
            budget.tick()
            if not consistent(e, v):
                continue
            vecs[e] = v
            placed.append(e)
            if dfs(j + 1):
                return True
            placed.pop()
            del vecs[e]
        return False

    if not dfs(0):
        return None
    return [vecs[e] for e in range(N.n)]


def is_representable(M: Matroid, q: int, t: int | None = None, *,
                     max_elements: int = REPRESENTABILITY_MAX_ELEMENTS,
                     max_rank: int = REPRESENTABILITY_MAX_RANK,
                     budget: int | None = DEFAULT_BUDGET) -> Representability:
    """Decide GF(q)-representability by embedding si(M) into pg(r(M), q).

    Raises DeskScaleExceeded when ``|E(M)| > max_elements`` or the rank cap
    ``t`` exceeds ``max_rank``.
    """
    F = field_of_order(q)
    r = M.r
    t = r if t is None else t
    if r > t:
        raise ValueError(f"rank {r} exceeds the rank cap t={t}")
    if M.n > max_elements or t > max_rank:
        raise DeskScaleExceeded(
            f"representability is limited to |E| <= {max_elements} and t <= {max_rank}"
            f" (got |E| = {M.n}, t = {t})")
    if r == 0:
        return Representability(True, q, 0, tuple([None] * M.n), "trivial")
    N, cmap = M.simplify()
    reps = list(iter_bits(M.representatives_mask()))
    local = {rep: j for j, rep in enumerate(reps)}
    L = linear_over(N, q)
    L2 = as_linear(N)
    if L is not None:
        vecs = _coordinates_over_basis(L)
        method = "linear"
    elif q == 2 and L2 is not None and L2.spec.p == 2:
        vecs = _binary_normal_form(L2)
        method = "normal-form"
    else:
        vecs = _search_representation(N, q, _Budget(budget))
        method = "search"
    if vecs is None:
        return Representability(False, q, r, None, method)
    idx = _pg_index(r, q)
    points = [idx[normalize(F, v)] for v in vecs]
    embedding = tuple(points[local[cmap[e]]] if cmap[e] is not None else None
                      for e in range(M.n))
    if not verify_embedding(M, q, r, embedding):  # pragma: no cover
        raise AssertionError("representability search produced a bad embedding")
    return Representability(True, q, r, embedding, method)


def verify_embedding(M: Matroid, q: int, r: int, embedding: Sequence[int | None]) -> bool:
    """Rank-table check of an embedding into pg(r, q) (loops map to None)."""
    if r == 0:
        return M.r == 0 and len(embedding) == M.n and all(p is None for p in embedding)
    P = pg(r, q)
    zero = (0,) * r
    cols = [P.columns[p] if p is not None else zero for p in embedding]
    return same_rank_function(M, LinearMatroid(P.spec, r, cols))


# ---------------------------------------------------------------------------
# projective geometry minors
# ---------------------------------------------------------------------------

def find_pg_minor(M: Matroid, m: int, q: int, *,
                  budget: int | None = DEFAULT_BUDGET) -> MinorWitness | None:
    """Desk-scale exhaustive search for a PG(m-1, q)-minor.

    Contraction sets range over the flats of rank 0 .. r(M)-m in canonical
    order; each contraction is searched for a pg(m, q)-restriction.
    """
    T = pg(m, q)
    counter = _Budget(budget)
    for k in range(0, M.r - m + 1):
        for C in M.flats_masks(k):
            N = M.minor_mask(C, 0)
            w = find_restriction(N, T, _counter=counter, target_name=f"pg:{m}:{q}")
            if w is not None:
                pos = list(iter_bits(M.ground_mask & ~C))
                image = tuple(pos[h] for h in w.mapping)
                delete = M.ground_mask & ~(C | to_mask(image))
                return MinorWitness(mask_tuple(C), mask_tuple(delete),
                                    RestrictionWitness(image, f"pg:{m}:{q}"))
    return None
