"""Matroids given by a rank oracle: linear, bases, direct sums and minors.

Ground sets are ``range(n)``.  Subsets are handled internally as integer
bitmasks (bit i set <=> element i present); public methods accept any
iterable of indices and return sorted tuples or frozensets, so every
enumeration runs in ascending index order and witnesses come out canonical.
"""

from __future__ import annotations

import random
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .gf import FieldSpec
from .linalg import Eliminator, normalize, pack_bits

_CACHE_LIMIT = 1 << 18


# ---------------------------------------------------------------------------
# bitmask helpers
# ---------------------------------------------------------------------------

def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_tuple(mask: int) -> tuple[int, ...]:
    return tuple(iter_bits(mask))


def to_mask(X: Iterable[int] | None) -> int:
    if X is None:
        return 0
    m = 0
    for i in X:
        m |= 1 << i
    return m


def popcount(mask: int) -> int:
    return mask.bit_count()


class MatroidError(ValueError):
    pass


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------

class Matroid:
    """Common machinery on top of ``_rank(mask)``."""

    n: int = 0

    def __init__(self, n: int):
        if n < 0:
            raise MatroidError("ground set size must be >= 0")
        self.n = n
        self._rank_cache: dict[int, int] = {}
        self._flat_cache: dict[int, list[int]] = {}
        self._classes: list[int] | None = None

    # -- subclasses implement this ------------------------------------------------
    def _rank(self, mask: int) -> int:
        raise NotImplementedError

    # -- masks ----------------------------------------------------------------
    @property
    def ground_mask(self) -> int:
        return (1 << self.n) - 1

    def mask_of(self, X: Iterable[int] | None) -> int:
        if X is None:
            return 0
        m = 0
        for i in X:
            if not 0 <= i < self.n:
                raise IndexError(f"element {i} outside ground set of size {self.n}")
            m |= 1 << i
        return m

    @property
    def labels(self) -> tuple[int, ...]:
        """Index of each element in the root (non-minor) matroid."""
        return tuple(range(self.n))

    # -- rank -----------------------------------------------------------------
    def rank_mask(self, mask: int) -> int:
        r = self._rank_cache.get(mask)
        if r is None:
            r = self._rank(mask)
            if len(self._rank_cache) >= _CACHE_LIMIT:
                self._rank_cache.clear()
            self._rank_cache[mask] = r
        return r

    def rank(self, X: Iterable[int] | None = None) -> int:
        if X is None:
            return self.rank_mask(self.ground_mask)
        return self.rank_mask(self.mask_of(X))

    @property
    def r(self) -> int:
        return self.rank_mask(self.ground_mask)

    def __len__(self) -> int:
        return self.n

    # -- closure and flats ----------------------------------------------------
    def closure_mask(self, mask: int) -> int:
        rk = self.rank_mask(mask)
        out = mask
        rest = self.ground_mask & ~mask
        for e in iter_bits(rest):
            if self.rank_mask(mask | (1 << e)) == rk:
                out |= 1 << e
        return out

    def closure(self, X: Iterable[int]) -> frozenset[int]:
        return frozenset(iter_bits(self.closure_mask(self.mask_of(X))))

    def is_flat_mask(self, mask: int) -> bool:
        return self.closure_mask(mask) == mask

    def is_flat(self, X: Iterable[int]) -> bool:
        return self.is_flat_mask(self.mask_of(X))

    def flats_masks(self, k: int) -> list[int]:
        """Rank-k flats, ordered by their sorted index lists."""
        if not 0 <= k <= self.r:
            raise MatroidError(f"flat rank {k} outside [0, {self.r}]")
        if k in self._flat_cache:
            return self._flat_cache[k]
        level = {self.closure_mask(0)}
        for _ in range(k):
            nxt = set()
            for F in level:
                rest = self.ground_mask & ~F
                while rest:
                    e = (rest & -rest).bit_length() - 1
                    G = self.closure_mask(F | (1 << e))
                    nxt.add(G)
                    rest &= ~G
            level = nxt
        out = sorted(level, key=mask_tuple)
        self._flat_cache[k] = out
        return out

    def flats(self, k: int) -> list[tuple[int, ...]]:
        return [mask_tuple(F) for F in self.flats_masks(k)]

    def flats_above_mask(self, F0: int, k: int) -> list[int]:
        """Rank-k flats containing the flat ``F0``, canonical order."""
        r0 = self.rank_mask(F0)
        if k < r0:
            return []
        level = {F0}
        for _ in range(k - r0):
            nxt = set()
            for F in level:
                rest = self.ground_mask & ~F
                while rest:
                    e = (rest & -rest).bit_length() - 1
                    G = self.closure_mask(F | (1 << e))
                    nxt.add(G)
                    rest &= ~G
            level = nxt
        return sorted(level, key=mask_tuple)

    # -- points ---------------------------------------------------------------
    @property
    def loops_mask(self) -> int:
        return self.closure_mask(0)

    def _parallel_class_masks(self) -> list[int]:
        loops = self.loops_mask
        out = []
        seen = loops
        for e in range(self.n):
            if seen >> e & 1:
                continue
            cls = self.closure_mask(1 << e) & ~loops
            out.append(cls)
            seen |= cls
        return out

    def parallel_class_masks(self) -> list[int]:
        """Parallel classes of nonloops, ordered by least element."""
        if self._classes is None:
            self._classes = self._parallel_class_masks()
        return self._classes

    def parallel_classes(self) -> list[tuple[int, ...]]:
        return [mask_tuple(c) for c in self.parallel_class_masks()]

    def epsilon(self) -> int:
        """Number of points, i.e. |si(M)|."""
        return len(self.parallel_class_masks())

    def representatives_mask(self) -> int:
        m = 0
        for c in self.parallel_class_masks():
            m |= c & -c
        return m

    def is_simple(self) -> bool:
        return self.loops_mask == 0 and all(popcount(c) == 1 for c in self.parallel_class_masks())

    def simplify(self) -> tuple["Matroid", dict[int, int | None]]:
        """si(M) as a restriction to least representatives, plus the class map.

        The map sends each element to the representative of its parallel
        class, and loops to None.
        """
        class_map: dict[int, int | None] = {e: None for e in range(self.n)}
        for c in self.parallel_class_masks():
            rep = (c & -c).bit_length() - 1
            for e in iter_bits(c):
                class_map[e] = rep
        return self.restrict_mask(self.representatives_mask()), class_map

    # -- minors ---------------------------------------------------------------
    def minor_mask(self, contract: int, delete: int) -> "Matroid":
        if contract & delete:
            raise MatroidError("contract and delete sets overlap")
        if not contract and not delete:
            return self
        return MinorView(self, contract, delete)

    def minor(self, contract: Iterable[int] = (), delete: Iterable[int] = ()) -> "Matroid":
        return self.minor_mask(self.mask_of(contract), self.mask_of(delete))

    def contract(self, C: Iterable[int]) -> "Matroid":
        return self.minor(contract=C)

    def delete(self, D: Iterable[int]) -> "Matroid":
        return self.minor(delete=D)

    def restrict_mask(self, X: int) -> "Matroid":
        return self.minor_mask(0, self.ground_mask & ~X)

    def restrict(self, X: Iterable[int]) -> "Matroid":
        return self.restrict_mask(self.mask_of(X))

    def local_connectivity(self, F: Iterable[int], X: Iterable[int]) -> int:
        f, x = self.mask_of(F), self.mask_of(X)
        return self.rank_mask(f) + self.rank_mask(x) - self.rank_mask(f | x)

    # -- bases ----------------------------------------------------------------
    def bases_masks(self) -> list[int]:
        r = self.r
        return [to_mask(S) for S in combinations(range(self.n), r)
                if self.rank_mask(to_mask(S)) == r]

    def rank_table(self) -> list[int]:
        return [self.rank_mask(m) for m in range(1 << self.n)]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} n={self.n} r={self.r}>"


# ---------------------------------------------------------------------------
# linear matroids
# ---------------------------------------------------------------------------

class LinearMatroid(Matroid):
    """Column matroid of a ``rows x n`` matrix over GF(q)."""

    def __init__(self, spec: FieldSpec, rows: int, columns: Sequence[Sequence[int]]):
        super().__init__(len(columns))
        self.spec = spec
        self.rows = rows
        cols = []
        for j, col in enumerate(columns):
            col = tuple(int(x) for x in col)
            if len(col) != rows:
                raise MatroidError(f"column {j} has length {len(col)}, expected {rows}")
            for x in col:
                spec.check(x)
            cols.append(col)
        self.columns: tuple[tuple[int, ...], ...] = tuple(cols)
        self._binary = spec.q == 2
        if self._binary:
            self._bits = [pack_bits(c) for c in cols]

    @property
    def q(self) -> int:
        return self.spec.q

    def _rank(self, mask: int) -> int:
        if self._binary:
            basis: dict[int, int] = {}
            bits = self._bits
            for e in iter_bits(mask):
                v = bits[e]
                while v:
                    top = v.bit_length()
                    b = basis.get(top)
                    if b is None:
                        basis[top] = v
                        break
                    v ^= b
            return len(basis)
        el = Eliminator(self.spec, self.rows)
        cols = self.columns
        for e in iter_bits(mask):
            el.add(cols[e])
            if len(el) == self.rows:
                break
        return len(el)

    def closure_mask(self, mask: int) -> int:
        out = mask
        if self._binary:
            basis: dict[int, int] = {}
            bits = self._bits

            def red(v: int) -> int:
                while v:
                    b = basis.get(v.bit_length())
                    if b is None:
                        return v
                    v ^= b
                return 0

            for e in iter_bits(mask):
                v = red(bits[e])
                if v:
                    basis[v.bit_length()] = v
            for e in iter_bits(self.ground_mask & ~mask):
                if not red(bits[e]):
                    out |= 1 << e
            return out
        el = Eliminator(self.spec, self.rows)
        for e in iter_bits(mask):
            el.add(self.columns[e])
        for e in iter_bits(self.ground_mask & ~mask):
            if el.contains(self.columns[e]):
                out |= 1 << e
        return out

    def _parallel_class_masks(self) -> list[int]:
        groups: dict[tuple[int, ...], int] = {}
        for e, col in enumerate(self.columns):
            key = normalize(self.spec, col)
            if key is not None:
                groups[key] = groups.get(key, 0) | (1 << e)
        return sorted(groups.values(), key=lambda m: m & -m)

    def point_of(self, e: int) -> tuple[int, ...] | None:
        return normalize(self.spec, self.columns[e])

    def matrix(self) -> list[list[int]]:
        """Row-major matrix of element codes."""
        return [[col[i] for col in self.columns] for i in range(self.rows)]

    def __repr__(self) -> str:
        return f"<LinearMatroid GF({self.q}) {self.rows}x{self.n} r={self.r}>"


def project_columns(spec: FieldSpec, rows: int, columns: Sequence[Sequence[int]],
                    contract: Iterable[int], keep: Iterable[int]) -> tuple[int, list[tuple[int, ...]]]:
    """Linear representation of the contraction by ``contract``.

    Columns in ``keep`` are reduced modulo the span of the contracted
    columns; the pivot coordinates are then identically zero and dropped.
    """
    el = Eliminator(spec, rows)
    for e in contract:
        el.add(columns[e])
    pivots = set(el.pivots)
    free = [i for i in range(rows) if i not in pivots]
    out = []
    for e in keep:
        v = el.reduce(columns[e]) if el.rows else columns[e]
        out.append(tuple(v[i] for i in free))
    return len(free), out


# ---------------------------------------------------------------------------
# bases-oracle matroids
# ---------------------------------------------------------------------------

class BasesMatroid(Matroid):
    """Matroid given by its list of bases.

    The exchange axiom is checked exhaustively when ``n <= validate_limit``
    and on a random sample of basis pairs otherwise; ``validation`` records
    which of the two happened.
    """

    def __init__(self, n: int, rank: int, bases: Iterable[Iterable[int]],
                 *, validate_limit: int = 12, seed: int = 0):
        super().__init__(n)
        masks = sorted({self.mask_of(b) for b in bases}, key=mask_tuple)
        if not masks:
            raise MatroidError("a matroid needs at least one basis")
        for b in masks:
            if popcount(b) != rank:
                raise MatroidError(f"basis {mask_tuple(b)} does not have size {rank}")
        self.rank_value = rank
        self._bases = masks
        self._basis_set = set(masks)
        if n <= validate_limit:
            self._check_exchange(masks)
            self.validation = "exhaustive"
        else:
            rng = random.Random(seed)
            sample = [(rng.choice(masks), rng.choice(masks)) for _ in range(2000)]
            self._check_exchange(masks, pairs=sample)
            self.validation = "sampled"

    def _check_exchange(self, masks: list[int], pairs=None) -> None:
        pairs = pairs if pairs is not None else ((a, b) for a in masks for b in masks)
        bs = self._basis_set
        for b1, b2 in pairs:
            for x in iter_bits(b1 & ~b2):
                base = b1 & ~(1 << x)
                if not any((base | (1 << y)) in bs for y in iter_bits(b2 & ~b1)):
                    raise MatroidError(
                        f"exchange axiom fails for {mask_tuple(b1)}, {mask_tuple(b2)} at {x}")

    def _rank(self, mask: int) -> int:
        best = 0
        for b in self._bases:
            c = popcount(mask & b)
            if c > best:
                best = c
                if best == self.rank_value:
                    break
        return best

    def bases_masks(self) -> list[int]:
        return list(self._bases)

    @property
    def bases(self) -> list[tuple[int, ...]]:
        return [mask_tuple(b) for b in self._bases]


class UniformMatroid(Matroid):
    """U_{r,n}: rank(X) = min(|X|, r)."""

    def __init__(self, r: int, n: int):
        if not 0 <= r <= n:
            raise MatroidError(f"U_{{{r},{n}}} needs 0 <= r <= n")
        super().__init__(n)
        self.rank_value = r

    def _rank(self, mask: int) -> int:
        return min(popcount(mask), self.rank_value)

    def __repr__(self) -> str:
        return f"<U_{{{self.rank_value},{self.n}}}>"


def uniform(r: int, n: int) -> UniformMatroid:
    return UniformMatroid(r, n)


# ---------------------------------------------------------------------------
# direct sums
# ---------------------------------------------------------------------------

class DirectSum(Matroid):
    """M1 (+) M2 on the concatenated ground set."""

    def __init__(self, m1: Matroid, m2: Matroid):
        super().__init__(m1.n + m2.n)
        self.left, self.right = m1, m2
        self._split = m1.n
        self._low = (1 << m1.n) - 1

    def _rank(self, mask: int) -> int:
        return self.left.rank_mask(mask & self._low) + self.right.rank_mask(mask >> self._split)


def direct_sum(m1: Matroid, m2: Matroid) -> Matroid:
    """Direct sum; block-diagonal when both are linear over the same field."""
    if m2.n == 0:
        return m1
    if m1.n == 0:
        return m2
    if (isinstance(m1, LinearMatroid) and isinstance(m2, LinearMatroid)
            and m1.spec == m2.spec):
        cols = [tuple(c) + (0,) * m2.rows for c in m1.columns]
        cols += [(0,) * m1.rows + tuple(c) for c in m2.columns]
        return LinearMatroid(m1.spec, m1.rows + m2.rows, cols)
    return DirectSum(m1, m2)


# ---------------------------------------------------------------------------
# minors
# ---------------------------------------------------------------------------

class _GenericMinor(Matroid):
    def __init__(self, base: Matroid, contract: int, elements: tuple[int, ...]):
        super().__init__(len(elements))
        self.base = base
        self._contract = contract
        self._rc = base.rank_mask(contract)
        self._bits = [1 << e for e in elements]

    def _rank(self, mask: int) -> int:
        bm = self._contract
        bits = self._bits
        for i in iter_bits(mask):
            bm |= bits[i]
        return self.base.rank_mask(bm) - self._rc


class MinorView(Matroid):
    """M/C \\ D with its elements relabelled 0..n'-1 in ascending base order.

    ``rank(X) = r_base(X u C) - r_base(C)``.  Views of views are flattened,
    so ``base`` is always a non-minor matroid and ``contracted``/``deleted``
    are index sets of that base.  Over a linear base the contraction is
    carried out by projection, which gives the same rank function.
    """

    def __init__(self, base: Matroid, contract: int, delete: int):
        if isinstance(base, MinorView):
            root = base.base
            c = base.contracted_mask
            d = base.deleted_mask
            for i in iter_bits(contract):
                c |= 1 << base.elements[i]
            for i in iter_bits(delete):
                d |= 1 << base.elements[i]
            base, contract, delete = root, c, d
        if contract & delete:
            raise MatroidError("contract and delete sets overlap")
        self.base = base
        self.contracted_mask = contract
        self.deleted_mask = delete
        self.elements: tuple[int, ...] = mask_tuple(base.ground_mask & ~(contract | delete))
        super().__init__(len(self.elements))
        if isinstance(base, LinearMatroid):
            rows, cols = project_columns(base.spec, base.rows, base.columns,
                                         iter_bits(contract), self.elements)
            self._impl: Matroid = LinearMatroid(base.spec, rows, cols)
        else:
            self._impl = _GenericMinor(base, contract, self.elements)

    @property
    def contracted(self) -> tuple[int, ...]:
        return mask_tuple(self.contracted_mask)

    @property
    def deleted(self) -> tuple[int, ...]:
        return mask_tuple(self.deleted_mask)

    @property
    def labels(self) -> tuple[int, ...]:
        return self.elements

    @property
    def linear(self) -> LinearMatroid | None:
        """The projected representation, when the base is linear."""
        return self._impl if isinstance(self._impl, LinearMatroid) else None

    def _rank(self, mask: int) -> int:
        return self._impl.rank_mask(mask)

    def closure_mask(self, mask: int) -> int:
        return self._impl.closure_mask(mask)

    def _parallel_class_masks(self) -> list[int]:
        return self._impl.parallel_class_masks()

    def local_to_base(self, X: Iterable[int]) -> tuple[int, ...]:
        return tuple(self.elements[i] for i in X)

    def __repr__(self) -> str:
        return (f"<MinorView n={self.n} r={self.r} of {self.base!r} "
                f"/{list(self.contracted)} \\{list(self.deleted)}>")


def minor(M: Matroid, contract: Iterable[int] = (), delete: Iterable[int] = ()) -> Matroid:
    return M.minor(contract, delete)


def labels_to_root(M: Matroid, X: Iterable[int]) -> tuple[int, ...]:
    lab = M.labels
    return tuple(lab[i] for i in X)


def same_rank_function(M1: Matroid, M2: Matroid) -> bool:
    """Exhaustive rank-table comparison (same ground set size required)."""
    return M1.n == M2.n and all(M1.rank_mask(m) == M2.rank_mask(m) for m in range(1 << M1.n))


def as_linear(M: Matroid) -> LinearMatroid | None:
    if isinstance(M, LinearMatroid):
        return M
    if isinstance(M, MinorView):
        return M.linear
    return None
