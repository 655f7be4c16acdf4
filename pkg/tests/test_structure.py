from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from densematroid.core import LinearMatroid, MatroidError, direct_sum, to_mask, uniform
from densematroid.geometry import pg
from densematroid.gf import make_field
from densematroid.instances import stack_flat_instances, subgeometry_witness
from densematroid.search import RestrictionWitness, is_representable
from densematroid.structure import (DensityPreconditionError, DensityThreshold,
                                    RoundnessWitness, StackCertificate, StackFlatError,
                                    build_stack_greedy, dense_point_above, is_weakly_round,
                                    majority_flat, max_stack_height, probe, stack_flat_search,
                                    verify_roundness_witness, verify_stack, verify_stack_flat,
                                    weakly_round_restriction)

from strategies import linear_matroids, point_configurations, sums

U24 = uniform(2, 4)
U24x2 = direct_sum(U24, U24)
FANO = pg(3, 2)
FANOx2 = direct_sum(FANO, FANO)


# ---------------------------------------------------------------------------
# stacks
# ---------------------------------------------------------------------------

def test_verify_stack_examples():
    assert verify_stack(U24, StackCertificate(2, 2, ((0, 1, 2, 3),))).valid
    for layer in [(0, 1, 2), tuple(range(7)), (0, 1, 2, 3)]:
        v = verify_stack(FANO, StackCertificate(2, 3, (layer,)))
        assert v.status == "invalid" and v.reason == "layer-representable"
    v = verify_stack(U24x2, StackCertificate(2, 2, ((0, 1, 2, 3), (4, 5, 6, 7))))
    assert v.valid and v.layer_ranks == [2, 2]


@pytest.mark.parametrize("layers,t,ground,reason", [
    (((0, 1), ()), 2, None, "empty-layer"),
    (((0, 1, 2, 3), (3, 4, 5, 6)), 2, None, "layers-not-disjoint"),
    (((0, 1, 2, 3),), 2, (0, 1, 2), "layer-outside-ground"),
    (((0, 1, 2, 3),), 2, tuple(range(8)), "not-spanning"),
    (((0, 1, 2), (3, 4, 5, 6, 7)), 3, None, "layer-representable"),
    (((0, 1, 2, 3, 4, 5, 6, 7),), 2, None, "layer-rank-exceeds-t"),
])
def test_verify_stack_reasons(layers, t, ground, reason):
    v = verify_stack(U24x2, StackCertificate(2, t, layers, ground))
    assert v.status == "invalid" and v.reason == reason


def test_verify_stack_rank_cap():
    # a single U_{2,4} layer cannot carry a rank-3 stack restriction
    M = direct_sum(U24, uniform(1, 1))
    v = verify_stack(M, StackCertificate(2, 2, ((0, 1, 2, 3),), tuple(range(5))))
    assert v.reason == "not-spanning"
    M = uniform(3, 5)
    v = verify_stack(M, StackCertificate(2, 2, ((0, 1, 2, 3, 4),)))
    assert v.reason == "layer-rank-exceeds-t"


def test_verify_stack_inconclusive_over_desk_scale():
    v = verify_stack(pg(4, 3), StackCertificate(2, 4, (tuple(range(40)),)))
    assert v.status == "inconclusive" and v.layer == 0


def test_stack_certificate_json_roundtrip():
    c = StackCertificate(3, 2, ((0, 4), (1, 2, 3)), (0, 1, 2, 3, 4), True)
    assert StackCertificate.from_json(c.to_json()) == c
    assert c.height == 2 and c.union == (0, 1, 2, 3, 4)


def test_greedy_examples():
    assert build_stack_greedy(U24x2, 2, 2).height == 2
    assert build_stack_greedy(pg(4, 2), 2, 3).height == 0
    assert build_stack_greedy(U24, 3, 2).height == 0


def _brute_stack_height(M, q):
    """Largest h with disjoint layers F_1..F_h, each (M / earlier) | F_i not GF(q)-representable."""
    cache = {}

    def bad(before, layer):
        key = (before, layer)
        if key not in cache:
            N = M.minor_mask(before, M.ground_mask & ~(before | layer))
            cache[key] = N.r >= 2 and not is_representable(N, q)
        return cache[key]

    def go(used):
        rest = M.ground_mask & ~used
        best = 0
        sub = rest
        while sub:
            if bad(used, sub):
                best = max(best, 1 + go(used | sub))
            sub = (sub - 1) & rest
        return best

    return go(0)


@given(st.one_of(point_configurations(qs=(3, 4, 5)), sums(point_configurations(max_n=4))),
       st.sampled_from([2, 3]))
def test_greedy_certificates_verify(M, q):
    cert = build_stack_greedy(M, q, 3)
    assert verify_stack(M, cert).valid or cert.height == 0


@given(st.one_of(point_configurations(), sums(point_configurations(max_rank=2, max_n=4)),
                linear_matroids(qs=(3, 4), max_rank=3, max_n=6)))
def test_exhaustive_height_matches_brute_force(M):
    s = max_stack_height(M, 2)
    assert s.height == _brute_stack_height(M, 2)
    assert s.height >= build_stack_greedy(M, 2, M.r).height
    if s.height:
        assert verify_stack(M, s.certificate).valid


def test_exhaustive_height_examples():
    assert max_stack_height(U24x2, 2).height == 2
    s = max_stack_height(U24x2, 2, target=1)
    assert s.target_reached and s.height == 1
    assert max_stack_height(FANO, 2).height == 0


# ---------------------------------------------------------------------------
# flats above a stack
# ---------------------------------------------------------------------------

def _pg34_instance():
    P = pg(3, 4)
    R = subgeometry_witness(P, 2)
    rat = set(R.mapping)
    line = next(L for L in P.flats(2) if len(rat & set(L)) == 1)
    layer = tuple(e for e in line if e not in rat)
    return P, R, StackCertificate(2, 2, (layer,))


def test_stack_flat_examples():
    P, R, cert = _pg34_instance()
    assert stack_flat_search(P, R, cert, 0).flat == ()
    out = stack_flat_search(P, R, cert, 1)
    assert len(out.flat) == 1 and out.flat[0] in cert.layers[0]
    assert out.flat[0] not in R.mapping
    assert verify_stack_flat(P, R, cert, out.flat, 1)


def test_stack_flat_rejects_layers_inside_the_geometry():
    P, R, _ = _pg34_instance()
    line = next(L for L in P.flats(2) if set(L) <= set(R.mapping) | set(L)
                and len(set(R.mapping) & set(L)) == 3)
    inside = tuple(e for e in line if e in R.mapping)
    cert = StackCertificate(2, 2, (inside,))
    with pytest.raises(ValueError):
        stack_flat_search(P, R, cert, 1)
    with pytest.raises(StackFlatError) as e:
        stack_flat_search(P, R, cert, 1, check_inputs=False)
    assert e.value.branch == "no-extension"


def test_stack_flat_preconditions():
    P, R, cert = _pg34_instance()
    with pytest.raises(ValueError):
        stack_flat_search(P, R, cert, 2)
    with pytest.raises(ValueError):
        stack_flat_search(P, RestrictionWitness(R.mapping[:3], ""), cert, 1)


@pytest.mark.parametrize("inst", stack_flat_instances(5, per_case=1),
                         ids=lambda i: f"q{i.q}-h{i.h}-r{i.M.rows}")
def test_stack_flat_generated(inst):
    out = stack_flat_search(inst.M, inst.R, inst.cert, inst.h)
    assert out.rank == inst.h and not set(out.flat) & set(inst.R.mapping)
    assert inst.M.is_flat(out.flat) and inst.M.rank(out.flat) == inst.h
    assert set(out.flat) <= set(inst.cert.union)


# ---------------------------------------------------------------------------
# weak roundness
# ---------------------------------------------------------------------------

def test_weak_roundness_examples():
    assert is_weakly_round(FANO).weakly_round
    w = is_weakly_round(U24x2)
    assert not w.weakly_round and {w.A, w.B} == {(0, 1, 2, 3), (4, 5, 6, 7)}
    w = is_weakly_round(uniform(3, 3))
    assert not w.weakly_round and len(w.B) == 1 and len(w.A) == 2
    assert verify_roundness_witness(uniform(3, 3), w)
    assert is_weakly_round(uniform(1, 3)).weakly_round


def _weakly_round_brute(M):
    r, E = M.r, M.ground_mask
    if r < 2:
        return True
    sub = E
    while True:
        if M.rank_mask(sub) <= r - 2 and M.rank_mask(E & ~sub) <= r - 1:
            return False
        if sub == 0:
            return True
        sub = (sub - 1) & E


@given(st.one_of(linear_matroids(qs=(2, 3), max_rank=4, max_n=8),
                sums(point_configurations(qs=(2, 3), max_n=4))))
def test_weak_roundness_matches_brute_force(M):
    w = is_weakly_round(M)
    assert w.weakly_round == _weakly_round_brute(M)
    assert verify_roundness_witness(M, w)


def test_roundness_witness_rejects_tampering():
    assert not verify_roundness_witness(U24x2, RoundnessWitness(False, (0, 1, 2, 3), (4, 5, 6)))
    assert not verify_roundness_witness(U24x2, RoundnessWitness(True))
    w = RoundnessWitness(False, (0, 1), (2,))
    assert RoundnessWitness.from_json(w.to_json()) == w


def test_density_threshold():
    g = DensityThreshold(Fraction(1, 8), 2)
    assert g(6) == 8 and g(3) == 1
    for r in range(1, 10):
        assert g(r) >= 2 * g(r - 1)
    with pytest.raises(ValueError):
        DensityThreshold(0, 2)


def test_round_restriction_examples():
    out = weakly_round_restriction(FANO, DensityThreshold(Fraction(1, 8), 2), 3)
    assert out.outcome == "found" and out.elements == tuple(range(7)) and not out.trace
    with pytest.raises(DensityPreconditionError):
        weakly_round_restriction(U24x2, DensityThreshold(Fraction(1, 2), 2), 4)
    with pytest.raises(DensityPreconditionError):
        weakly_round_restriction(FANOx2, DensityThreshold(Fraction(1, 4), 2), 4)
    out = weakly_round_restriction(FANOx2, DensityThreshold(Fraction(1, 8), 2), 3)
    assert out.outcome == "found" and out.rank == 3 and out.epsilon == 7
    N = FANOx2.restrict(out.elements)
    assert is_weakly_round(N).weakly_round
    with pytest.raises(ValueError):
        weakly_round_restriction(FANOx2, DensityThreshold(Fraction(1, 8), 2), 2)


@given(linear_matroids(qs=(2,), max_rank=3, max_n=7), linear_matroids(qs=(2,), max_rank=3,
                                                                      max_n=7))
def test_round_restriction_postconditions(M1, M2):
    M = direct_sum(M1, M2)
    g = DensityThreshold(Fraction(1, 16), 2)
    if not M.epsilon() > g(M.r):
        with pytest.raises(DensityPreconditionError):
            weakly_round_restriction(M, g, 4)
        return
    out = weakly_round_restriction(M, g, 4)
    N = M.restrict(out.elements)
    if out.outcome == "found":
        assert N.r >= 4 and N.epsilon() > g(N.r) and is_weakly_round(N).weakly_round
    else:
        assert N.r < 4


# ---------------------------------------------------------------------------
# majority flats and dense points
# ---------------------------------------------------------------------------

def test_majority_flat_examples():
    assert majority_flat(FANO, [], 1).flat == (0,)
    F2 = make_field(2)
    M = LinearMatroid(F2, 2, [(1, 0), (0, 1), (1, 1), (1, 1), (1, 1)])
    assert majority_flat(M, [], 1).flat == (2, 3, 4)
    m = majority_flat(FANO, [0], 2)
    assert len(m.flat) == 3 and 0 in m.flat and m.excess == 2
    assert m.average == 2 and m.holds and m.identity
    with pytest.raises(MatroidError):
        majority_flat(FANO, [0, 1], 3)
    with pytest.raises(ValueError):
        majority_flat(FANO, [0], 1)


@given(linear_matroids(qs=(2, 3, 4), max_rank=4, max_n=9), st.data())
def test_majority_flat_postconditions(M, data):
    if M.r < 1:
        return
    k = data.draw(st.integers(0, M.r - 1))
    F0 = data.draw(st.sampled_from(M.flats(k)))
    t = data.draw(st.integers(k + 1, M.r))
    m = majority_flat(M, F0, t)
    family = [F for F in M.flats(t) if set(F0) <= set(F)]
    best = max(len(set(F) - set(F0)) for F in family)
    assert m.family_size == len(family) and m.excess == best and m.holds
    assert m.flat == next(F for F in family if len(set(F) - set(F0)) == best)
    if t == k + 1:
        assert m.identity


def test_dense_point_examples():
    assert dense_point_above(FANO, [], []).point == (0,)
    p = dense_point_above(FANO, [0], [])
    assert p.size == 2 and FANO.rank([0, *p.point]) == 2
    assert dense_point_above(FANO, [0], [1, 3]) is None


@given(linear_matroids(qs=(2, 3), max_rank=4, max_n=8), st.data())
def test_dense_point_matches_brute_force(M, data):
    if M.n == 0:
        return
    X = sorted(data.draw(st.sets(st.integers(0, M.n - 1), max_size=3)))
    C = sorted(data.draw(st.sets(st.integers(0, M.n - 1), max_size=3)))
    xm, cm = to_mask(X), to_mask(C)
    rx, rcx = M.rank_mask(xm), M.rank_mask(xm | cm)
    # points of M/X: classes of elements e with r(X+e) > r(X), e ~ f when r(X+e+f) = r(X)+1
    classes = []
    for e in range(M.n):
        if M.rank_mask(xm | 1 << e) == rx:
            continue
        for cl in classes:
            if M.rank_mask(xm | 1 << e | 1 << cl[0]) == rx + 1:
                cl.append(e)
                break
        else:
            classes.append([e])
    free = [cl for cl in classes if M.rank_mask(xm | cm | 1 << cl[0]) > rcx]
    got = dense_point_above(M, X, C)
    if not free:
        assert got is None
    else:
        size = max(len(cl) for cl in free)
        assert got.size == size
        assert list(got.point) == next(cl for cl in free if len(cl) == size)


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------

def test_probe_branches():
    assert probe(U24x2, 2, 2, Fraction(1, 4)).branch == "stack"
    rep = probe(FANO, 2, 2, Fraction(1, 4))
    assert rep.branch == "no-ag" and rep.details["majority"]["holds"]
    assert probe(pg(4, 2), 2, 3, Fraction(1, 4)).branch == "ag-restriction"
    assert probe(uniform(1, 3), 2, 2, Fraction(1, 4)).branch == "rank-too-small"
    rep = probe(FANO, 2, 2, Fraction(1, 4), alpha=Fraction(1, 4))
    assert rep.branch == "dense-contraction"
    M = direct_sum(pg(2, 2), uniform(2, 4))
    assert probe(M, 2, 2, Fraction(1, 4), h=2, f0=[0]).branch in ("non-representable", "no-ag")
