"""Stacks, weak roundness, and the constructive steps built on them.

All index sets returned here are sorted tuples of element indices of the
matroid passed in.  Searches scan candidates in a fixed canonical order, so
each result is the least one of its kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .core import Matroid, MatroidError, iter_bits, mask_tuple, popcount, to_mask
from .geometry import ag, pg
from .search import (DEFAULT_BUDGET, DeskScaleExceeded, RestrictionWitness,
                     SearchBudgetExceeded, find_restriction, is_representable,
                     linear_over, verify_restriction)

STACK_CONVENTION = "union of layers spans the stack restriction S, E(S) = ground or union"

# Largest |E| - r(E) over the excluded minors for GF(q)-representability, for
# the fields whose complete excluded-minor lists are known (q = 2, 3, 4).  A
# restriction-minimal non-representable set of rank k has exactly k + c
# elements, c the corank of one of these excluded minors.
EXCLUDED_MINOR_MAX_CORANK = {2: 2, 3: 4, 4: 4}


def _rep_or_none(N: Matroid, q: int, budget: int | None = DEFAULT_BUDGET) -> bool | None:
    """GF(q)-representability, or None when the instance is over the desk cap."""
    if linear_over(N, q) is not None:
        return True
    try:
        return bool(is_representable(N, q, budget=budget))
    except DeskScaleExceeded:
        return None


def _positions(mask: int) -> list[int]:
    return list(iter_bits(mask))


# ---------------------------------------------------------------------------
# stacks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StackCertificate:
    """Ordered disjoint layers F_1..F_h of a (q, h, t)-stack restriction.

    ``ground`` is E(S); when omitted the stack restriction is taken on the
    union of the layers.  ``incomplete`` marks a greedy build whose layer
    scan hit a desk-scale cap.
    """

    q: int
    t: int
    layers: tuple[tuple[int, ...], ...]
    ground: tuple[int, ...] | None = None
    incomplete: bool = False

    @property
    def height(self) -> int:
        return len(self.layers)

    @property
    def union(self) -> tuple[int, ...]:
        return tuple(sorted(e for F in self.layers for e in F))

    @property
    def support(self) -> tuple[int, ...]:
        return self.ground if self.ground is not None else self.union

    def prefix(self, k: int) -> "StackCertificate":
        return StackCertificate(self.q, self.t, self.layers[:k])

    def to_json(self) -> dict:
        doc = {"q": self.q, "t": self.t, "layers": [list(F) for F in self.layers]}
        if self.ground is not None:
            doc["ground"] = list(self.ground)
        if self.incomplete:
            doc["incomplete"] = True
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "StackCertificate":
        ground = doc.get("ground")
        return cls(int(doc["q"]), int(doc["t"]),
                   tuple(tuple(sorted(int(x) for x in F)) for F in doc["layers"]),
                   None if ground is None else tuple(sorted(int(x) for x in ground)),
                   bool(doc.get("incomplete", False)))


@dataclass
class StackVerdict:
    """``status`` is ``valid``, ``invalid`` or ``inconclusive``."""

    status: str
    reason: str | None = None
    layer: int | None = None
    layer_ranks: list[int] = field(default_factory=list)
    convention: str = STACK_CONVENTION

    @property
    def valid(self) -> bool:
        return self.status == "valid"

    def to_json(self) -> dict:
        return {"status": self.status, "reason": self.reason, "layer": self.layer,
                "layer_ranks": self.layer_ranks, "convention": self.convention}


def layer_matroid(M: Matroid, before: int, layer: int) -> Matroid:
    """(M / before) | layer, elements in ascending order of ``layer``."""
    return M.minor_mask(before, M.ground_mask & ~(before | layer))


def verify_stack(M: Matroid, cert: StackCertificate) -> StackVerdict:
    """Check every stack condition, reporting the first one that fails.

    A layer too large for the representability oracle makes the verdict
    inconclusive, naming that layer.
    """
    masks = [M.mask_of(F) for F in cert.layers]
    union = 0
    for i, F in enumerate(masks):
        if not F:
            return StackVerdict("invalid", "empty-layer", i)
        if F & union:
            return StackVerdict("invalid", "layers-not-disjoint", i)
        union |= F
    ground = M.mask_of(cert.ground) if cert.ground is not None else union
    if union & ~ground:
        return StackVerdict("invalid", "layer-outside-ground", None)
    if M.rank_mask(union) != M.rank_mask(ground):
        return StackVerdict("invalid", "not-spanning", None)
    verdict = StackVerdict("valid")
    before = 0
    for i, F in enumerate(masks):
        N = layer_matroid(M, before, F)
        verdict.layer_ranks.append(N.r)
        if N.r > cert.t:
            return StackVerdict("invalid", "layer-rank-exceeds-t", i, verdict.layer_ranks)
        rep = _rep_or_none(N, cert.q)
        if rep is None:
            return StackVerdict("inconclusive", "layer-over-desk-scale", i, verdict.layer_ranks)
        if rep:
            return StackVerdict("invalid", "layer-representable", i, verdict.layer_ranks)
        before |= F
    if M.rank_mask(ground) > cert.height * cert.t:
        return StackVerdict("invalid", "rank-exceeds-ht", None, verdict.layer_ranks)
    return verdict


class _LayerScanner:
    """Restriction-minimal non-GF(q)-representable sets of a matroid.

    Candidates are subsets of the point representatives of each flat that
    span the flat, scanned by flat rank, then flat order, then size, then
    lexicographically.  A flat whose whole point set is representable is
    skipped outright.
    """

    def __init__(self, N: Matroid, q: int, t: int | None, budget: int | None):
        self.N = N
        self.q = q
        self.t = N.r if t is None else min(t, N.r)
        self.budget = budget
        self.capped = False
        self.corank = EXCLUDED_MINOR_MAX_CORANK.get(q)

    def scan(self):
        N = self.N
        if linear_over(N, self.q) is not None:
            return
        reps = N.representatives_mask()
        found: list[int] = []
        for k in range(2, self.t + 1):
            for F in N.flats_masks(k):
                pts = _positions(F & reps)
                whole = _rep_or_none(N.restrict_mask(F & reps), self.q, self.budget)
                if whole:
                    continue
                lo = k + 2
                hi = len(pts) if self.corank is None else min(len(pts), k + self.corank)
                for size in range(lo, hi + 1):
                    for S in combinations(pts, size):
                        X = to_mask(S)
                        if any(Y & X == Y for Y in found):
                            continue
                        if N.rank_mask(X) != k:
                            continue
                        rep = _rep_or_none(N.restrict_mask(X), self.q, self.budget)
                        if rep is None:
                            self.capped = True
                            continue
                        if not rep:
                            found.append(X)
                            yield X


def _contracted_view(M: Matroid, union: int) -> tuple[Matroid, list[int]]:
    N = M.minor_mask(union, 0)
    return N, _positions(M.ground_mask & ~union)


def build_stack_greedy(M: Matroid, q: int, t: int, *,
                       budget: int | None = DEFAULT_BUDGET) -> StackCertificate:
    """Add the first minimal non-representable layer of the current contraction
    until none remains.  The height is a lower bound for the largest stack."""
    layers: list[tuple[int, ...]] = []
    union = 0
    incomplete = False
    while True:
        N, pos = _contracted_view(M, union)
        scanner = _LayerScanner(N, q, t, budget)
        X = next(scanner.scan(), None)
        incomplete |= scanner.capped
        if X is None:
            break
        layer = tuple(pos[i] for i in iter_bits(X))
        layers.append(layer)
        union |= to_mask(layer)
    return StackCertificate(q, t, tuple(layers), incomplete=incomplete)


@dataclass
class StackSearch:
    """Result of the exhaustive stack-height search."""

    height: int
    certificate: StackCertificate
    target_reached: bool
    incomplete: bool
    nodes: int

    def to_json(self) -> dict:
        return {"height": self.height, "certificate": self.certificate.to_json(),
                "target_reached": self.target_reached, "incomplete": self.incomplete,
                "nodes": self.nodes}


def max_stack_height(M: Matroid, q: int, *, target: int | None = None,
                     t: int | None = None,
                     budget: int | None = DEFAULT_BUDGET) -> StackSearch:
    """Exhaustive search for the tallest stack restriction of M.

    Layers are restriction-minimal non-representable sets.  With no rank cap
    this loses nothing: shrinking a layer to a minimal subset and pushing the
    leftover into the next layer keeps that layer non-representable, since
    it still has the old layer as a minor.  The search stops early once
    ``target`` layers are found.  The returned certificate is the first
    tallest one in scan order.
    """
    best: list[tuple[int, ...]] = []
    state = {"incomplete": False, "nodes": 0}

    def dfs(union: int, layers: list[tuple[int, ...]]) -> bool:
        nonlocal best
        state["nodes"] += 1
        if len(layers) > len(best):
            best = list(layers)
        if target is not None and len(layers) >= target:
            return True
        N, pos = _contracted_view(M, union)
        if N.r < 2:
            return False
        scanner = _LayerScanner(N, q, t, budget)
        for X in scanner.scan():
            layer = tuple(pos[i] for i in iter_bits(X))
            layers.append(layer)
            done = dfs(union | to_mask(layer), layers)
            layers.pop()
            if done:
                state["incomplete"] |= scanner.capped
                return True
        state["incomplete"] |= scanner.capped
        return False

    reached = dfs(0, [])
    cert = StackCertificate(q, t if t is not None else M.r, tuple(best))
    return StackSearch(len(best), cert, reached, state["incomplete"], state["nodes"])


class StackFlatError(RuntimeError):
    """No extension element exists; ``branch`` says which argument failed."""

    def __init__(self, branch: str, message: str, flat: tuple[int, ...] = ()):
        super().__init__(message)
        self.branch = branch
        self.flat = flat


@dataclass
class StackFlat:
    flat: tuple[int, ...]
    rank: int
    chain: list[tuple[int, ...]]

    def to_json(self) -> dict:
        return {"flat": list(self.flat), "rank": self.rank,
                "chain": [list(H) for H in self.chain]}


def verify_stack_flat(M: Matroid, R: RestrictionWitness, cert: StackCertificate,
                      flat: Iterable[int], h: int) -> bool:
    X = M.mask_of(flat)
    return (M.is_flat_mask(X) and M.rank_mask(X) == h
            and not X & M.mask_of(R.mapping)
            and X & ~M.mask_of(cert.support) == 0)


def stack_flat_search(M: Matroid, R: RestrictionWitness, cert: StackCertificate, h: int,
                      *, check_inputs: bool = True) -> StackFlat:
    """A rank-h flat of M inside E(S) - E(R), built one rank at a time.

    R maps pg(r(M), q) onto a spanning restriction.  The first C(h, 2) layers
    give a rank-(h-1) flat H; it is extended by the least element e of
    E(S) - E(R) outside cl(H) whose closure with H misses E(R).  Failure is
    reported through StackFlatError with branch ``no-extension`` (no
    such e) or ``escapes-stack`` (every candidate closure leaves E(S)).
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    need = comb(h + 1, 2)
    if cert.height < need:
        raise ValueError(f"height {cert.height} < C({h + 1},2) = {need}")
    rm = M.mask_of(R.mapping)
    if check_inputs:
        if M.rank_mask(rm) != M.r:
            raise ValueError("R is not spanning")
        if not verify_restriction(M, pg(M.r, cert.q), R.mapping):
            raise ValueError(f"R is not a pg({M.r},{cert.q}) restriction")
        v = verify_stack(M, cert.prefix(need))
        if not v.valid:
            raise ValueError(f"stack certificate rejected: {v.reason} (layer {v.layer})")

    def build(k: int) -> tuple[int, list[tuple[int, ...]]]:
        if k == 0:
            return M.closure_mask(0), []
        sm = to_mask(e for F in cert.layers[:comb(k + 1, 2)] for e in F)
        H, chain = build(k - 1)
        escaped = False
        for e in iter_bits(sm & ~rm & ~M.closure_mask(H)):
            G = M.closure_mask(H | (1 << e))
            if G & rm:
                continue
            if G & ~sm:
                escaped = True
                continue
            return G, chain + [mask_tuple(G)]
        if escaped:
            raise StackFlatError("escapes-stack",
                                 f"every rank-{k} extension of {mask_tuple(H)} leaves E(S)",
                                 mask_tuple(H))
        raise StackFlatError("no-extension",
                             f"M/{mask_tuple(H)} has no nonloop of E(S) off E(R); "
                             "the stack cannot sit over a spanning geometry here",
                             mask_tuple(H))

    G, chain = build(h)
    out = StackFlat(mask_tuple(G), h, chain)
    if not verify_stack_flat(M, R, cert.prefix(need), out.flat, h):  # pragma: no cover
        raise AssertionError("stack flat failed verification")
    return out


# ---------------------------------------------------------------------------
# weak roundness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundnessWitness:
    """``weakly_round`` or a cover (A, B) with r(A) <= r-1 and r(B) <= r-2."""

    weakly_round: bool
    A: tuple[int, ...] | None = None
    B: tuple[int, ...] | None = None

    @property
    def verdict(self) -> str:
        return "weakly-round" if self.weakly_round else "not"

    def to_json(self) -> dict:
        return {"verdict": self.verdict,
                "A": None if self.A is None else list(self.A),
                "B": None if self.B is None else list(self.B)}

    @classmethod
    def from_json(cls, doc: dict) -> "RoundnessWitness":
        wr = doc["verdict"] == "weakly-round"
        return cls(wr, None if doc.get("A") is None else tuple(doc["A"]),
                   None if doc.get("B") is None else tuple(doc["B"]))


def is_weakly_round(M: Matroid) -> RoundnessWitness:
    """Scan rank-(r-2) flats B in canonical order for a non-spanning E - B.

    Any cover (A, B) can be enlarged to one where B is such a flat, so the
    scan is complete.  The witness reports A = cl(E - B), which still
    covers with B and has the same rank.  Rank below 2 is weakly round.
    """
    r = M.r
    if r < 2:
        return RoundnessWitness(True)
    E = M.ground_mask
    for B in M.flats_masks(r - 2):
        rest = E & ~B
        if M.rank_mask(rest) <= r - 1:
            return RoundnessWitness(False, mask_tuple(M.closure_mask(rest)), mask_tuple(B))
    return RoundnessWitness(True)


def verify_roundness_witness(M: Matroid, w: RoundnessWitness) -> bool:
    if w.weakly_round:
        return is_weakly_round(M).weakly_round
    A, B = M.mask_of(w.A), M.mask_of(w.B)
    r = M.r
    return (A | B) == M.ground_mask and M.rank_mask(A) <= r - 1 and M.rank_mask(B) <= r - 2


@dataclass(frozen=True)
class DensityThreshold:
    """g(r) = beta * q^r.  For q >= 2 this gives g(r) >= 2 g(r - 1)."""

    beta: Fraction
    q: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.q < 2:
            raise ValueError("q must be >= 2")

    def __call__(self, r: int) -> Fraction:
        return self.beta * Fraction(self.q) ** r

    def to_json(self) -> dict:
        return {"beta": str(self.beta), "q": self.q}


class DensityPreconditionError(ValueError):
    pass


@dataclass
class RoundRestriction:
    """``outcome`` is ``found`` or ``floor``; ``elements`` index M."""

    outcome: str
    elements: tuple[int, ...]
    rank: int
    epsilon: int
    threshold: Fraction
    trace: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "elements": list(self.elements), "rank": self.rank,
                "epsilon": self.epsilon, "threshold": str(self.threshold), "trace": self.trace}


def weakly_round_restriction(M: Matroid, g: DensityThreshold, d: int) -> RoundRestriction:
    """Descend into a dense part of a non-weakly-round cover until weakly round.

    Each step takes the canonical cover (A, B) and moves to M|A if
    eps(M|A) > g(r(M|A)), else to M|B; one of them qualifies because
    eps(M) <= eps(M|A) + eps(M|B) and g doubles per rank.  Reaching rank
    below d stops with outcome ``floor``.
    """
    if g(d) < 1:
        raise ValueError(f"g(d) = {g(d)} < 1")
    eps, r = M.epsilon(), M.r
    if not eps > g(r):
        raise DensityPreconditionError(f"eps(M) = {eps} is not > g({r}) = {g(r)}")
    X = M.ground_mask
    trace: list[dict] = []
    while True:
        N = M.restrict_mask(X)
        r, eps = N.r, N.epsilon()
        if r < d:
            return RoundRestriction("floor", mask_tuple(X), r, eps, g(r), trace)
        w = is_weakly_round(N)
        if w.weakly_round:
            out = RoundRestriction("found", mask_tuple(X), r, eps, g(r), trace)
            assert eps > g(r)
            return out
        pos = _positions(X)
        for side, part in (("A", w.A), ("B", w.B)):
            P = to_mask(pos[i] for i in part)
            sub = M.restrict_mask(P)
            if sub.epsilon() > g(sub.r):
                trace.append({"side": side, "elements": list(mask_tuple(P)),
                              "rank": sub.r, "epsilon": sub.epsilon()})
                X = P
                break
        else:  # pragma: no cover - excluded by the doubling property of g
            raise AssertionError("neither side of the cover is dense")


# ---------------------------------------------------------------------------
# majority arguments
# ---------------------------------------------------------------------------

@dataclass
class MajorityFlat:
    flat: tuple[int, ...]
    excess: int
    family_size: int
    average: Fraction
    holds: bool
    identity: bool | None

    def to_json(self) -> dict:
        return {"flat": list(self.flat), "excess": self.excess,
                "family_size": self.family_size, "average": str(self.average),
                "holds": self.holds, "identity": self.identity}


def majority_flat(M: Matroid, F0: Iterable[int], t: int) -> MajorityFlat:
    """The rank-t flat F over the flat F0 maximizing |F - F0|.

    Ties go to the first flat in canonical order.  Checks
    |F - F0| >= (|E| - |F0|) / |family|, and when t = r(F0) + 1 also that
    the family has eps(M/F0) members.
    """
    f0 = M.mask_of(F0)
    if not M.is_flat_mask(f0):
        raise MatroidError(f"{mask_tuple(f0)} is not a flat")
    r0 = M.rank_mask(f0)
    if not r0 < t <= M.r:
        raise ValueError(f"need r(F0) = {r0} < t = {t} <= r(M) = {M.r}")
    family = M.flats_above_mask(f0, t)
    best, excess = family[0], popcount(family[0] & ~f0)
    for F in family[1:]:
        x = popcount(F & ~f0)
        if x > excess:
            best, excess = F, x
    average = Fraction(M.n - popcount(f0), len(family))
    identity = None
    if t == r0 + 1:
        identity = len(family) == M.minor_mask(f0, 0).epsilon()
    return MajorityFlat(mask_tuple(best), excess, len(family), average, excess >= average, identity)


@dataclass
class DensePoint:
    point: tuple[int, ...]
    size: int

    def to_json(self) -> dict:
        return {"point": list(self.point), "size": self.size}


def dense_point_above(M: Matroid, X: Iterable[int], C: Iterable[int]) -> DensePoint | None:
    """The largest parallel class of M/X not spanned by C (least on ties)."""
    xm, cm = M.mask_of(X), M.mask_of(C)
    N = M.minor_mask(xm, 0)
    pos = _positions(M.ground_mask & ~xm)
    local_c = to_mask(i for i, e in enumerate(pos) if cm >> e & 1)
    span = N.closure_mask(local_c)
    best: int | None = None
    for P in N.parallel_class_masks():
        if P & ~span and (best is None or popcount(P) > popcount(best)):
            best = P
    if best is None:
        return None
    return DensePoint(tuple(pos[i] for i in iter_bits(best)), popcount(best))


# ---------------------------------------------------------------------------
# the case split of the density argument, at desk scale
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    branch: str
    density: Fraction
    threshold: Fraction
    stack: StackCertificate
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"branch": self.branch, "density": str(self.density),
                "threshold": str(self.threshold), "stack": self.stack.to_json(),
                "details": self.details}


def probe(M: Matroid, q: int, t: int, beta: Fraction, *, n: int = 3, h: int = 1,
          f0: Sequence[int] | None = None, alpha: Fraction | None = None,
          budget: int | None = DEFAULT_BUDGET) -> ProbeReport:
    """Run the stack / majority / affine-restriction case split once.

    1. Build a greedy stack with layer rank cap t; height >= h is the
       ``stack`` branch.
    2. Otherwise pass to M0 = si(M / E(S)) and a flat F0 of M0 (given, as
       M indices, or the first of rank t - 1).  With ``alpha`` set, a dense
       contraction eps(M0/F0) >= alpha q^r(M0/F0) is the ``dense-contraction``
       branch.
    3. Take the majority rank-t flat F over F0.  If M0|F is not
       GF(q)-representable the branch is ``non-representable``; else search
       M0|F for an ag(n, q)-restriction: ``ag-restriction`` or ``no-ag``.
    """
    beta = Fraction(beta)
    density = Fraction(M.epsilon(), q**M.r)
    S = build_stack_greedy(M, q, t, budget=budget)
    rep = ProbeReport("stack", density, beta, S)
    rep.details["height"] = S.height
    if S.height >= h:
        return rep
    union = to_mask(S.union)
    Mc = M.minor_mask(union, 0)
    pos = _positions(M.ground_mask & ~union)
    reps = Mc.representatives_mask()
    M0 = Mc.restrict_mask(reps)
    labels = [pos[i] for i in iter_bits(reps)]
    index = {e: i for i, e in enumerate(labels)}
    rep.details["M0"] = {"elements": labels, "rank": M0.r}
    if M0.r < t:
        rep.branch = "rank-too-small"
        return rep
    if f0 is None:
        F0 = M0.flats_masks(t - 1)[0]
    else:
        missing = [e for e in f0 if e not in index]
        if missing:
            raise ValueError(f"F0 elements {missing} are not points of si(M/E(S))")
        F0 = M0.closure_mask(to_mask(index[e] for e in f0))
    rep.details["F0"] = [labels[i] for i in iter_bits(F0)]
    N0 = M0.minor_mask(F0, 0)
    if alpha is not None:
        alpha = Fraction(alpha)
        eps0, r0 = N0.epsilon(), N0.r
        rep.details["contraction"] = {"epsilon": eps0, "rank": r0,
                                      "alpha_bound": str(alpha * q**r0)}
        if eps0 >= alpha * q**r0:
            rep.branch = "dense-contraction"
            return rep
    maj = majority_flat(M0, iter_bits(F0), t)
    F = to_mask(maj.flat)
    rep.details["majority"] = maj.to_json()
    rep.details["majority"]["flat"] = [labels[i] for i in maj.flat]
    MF = M0.restrict_mask(F)
    representable = _rep_or_none(MF, q, budget)
    rep.details["representable"] = representable
    if representable is None:
        rep.branch = "inconclusive"
        return rep
    if not representable:
        rep.branch = "non-representable"
        return rep
    fpos = [labels[i] for i in iter_bits(F)]
    try:
        w = find_restriction(MF, ag(n, q), budget=budget, target_name=f"ag:{n}:{q}")
    except SearchBudgetExceeded:
        rep.branch = "inconclusive"
        return rep
    if w is None:
        rep.branch = "no-ag"
    else:
        rep.branch = "ag-restriction"
        rep.details["ag"] = [[i, fpos[x]] for i, x in enumerate(w.mapping)]
    return rep
