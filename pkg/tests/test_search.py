from __future__ import annotations

from itertools import combinations, permutations

import pytest
from hypothesis import given, strategies as st

from densematroid.core import BasesMatroid, MatroidError, direct_sum, same_rank_function, uniform
from densematroid.geometry import ag, pg
from densematroid.search import (DeskScaleExceeded, MinorWitness, RestrictionWitness,
                                 SearchBudgetExceeded, find_pg_minor, find_restriction,
                                 has_u2_minor, is_representable, verify_embedding,
                                 verify_minor_witness, verify_restriction)

from strategies import linear_matroids


def _all_restrictions(M, T):
    """Every injection whose image has T's full rank table, in sorted-image order."""
    out = []
    for image in permutations(range(M.n), T.n):
        if all(T.rank_mask(s) == M.rank(image[i] for i in range(T.n) if s >> i & 1)
               for s in range(1 << T.n)):
            out.append(image)
    return out


def test_find_restriction_examples():
    w = find_restriction(ag(3, 2), uniform(3, 4))
    assert w.mapping == (0, 1, 2, 3)
    assert find_restriction(pg(3, 2), uniform(2, 4)) is None
    P = pg(3, 2)
    w = find_restriction(P, ag(3, 2))
    assert len(w.image) == 4
    rest = [e for e in range(7) if e not in w.image]
    assert P.is_flat(rest) and P.rank(rest) == 2


def test_find_restriction_is_canonical_least():
    P = pg(3, 2)
    hits = _all_restrictions(P, ag(3, 2))
    least = min(hits, key=lambda m: (tuple(sorted(m)), m))
    w = find_restriction(P, ag(3, 2))
    assert w.image == tuple(sorted(least))
    assert w.mapping == least


def test_find_restriction_needs_simple_target():
    with pytest.raises(MatroidError):
        find_restriction(pg(3, 2), uniform(1, 2))


def test_budget_is_reported_not_swallowed():
    with pytest.raises(SearchBudgetExceeded):
        find_restriction(pg(4, 2), ag(4, 2), budget=3)


@given(linear_matroids(qs=(2, 3), max_rank=3, max_n=7),
       st.sampled_from([uniform(2, 3), uniform(2, 4), uniform(3, 4), uniform(1, 1),
                        pg(3, 2), ag(3, 2), uniform(3, 3)]))
def test_none_is_sound(M, T):
    w = find_restriction(M, T)
    hits = _all_restrictions(M, T) if T.n <= M.n else []
    assert (w is not None) == bool(hits)
    if w is not None:
        assert verify_restriction(M, T, w.mapping, "exhaustive")
        assert w.image == min(tuple(sorted(h)) for h in hits)


@pytest.mark.parametrize("T", [uniform(2, 4), uniform(3, 5), ag(3, 2)])
def test_none_is_sound_at_ten_elements(T):
    import random
    from densematroid.instances import random_linear
    rng = random.Random(7)
    for _ in range(3):
        M = random_linear(rng, 3, 3, 10)
        w = find_restriction(M, T)
        hits = _all_restrictions(M, T)
        assert (w is not None) == bool(hits)


def test_restriction_is_monotone():
    P = pg(4, 2)
    hyper = P.flats(3)[0]
    assert find_restriction(P.restrict(hyper), ag(3, 2)) is not None
    assert find_restriction(P, ag(3, 2)) is not None


def test_verify_restriction_rejects_bad_maps():
    P = pg(3, 2)
    line = P.flats(2)[0]
    assert not verify_restriction(P, ag(3, 2), list(line) + [line[0]])
    assert not verify_restriction(P, uniform(2, 3), [0, 1, 9])
    assert verify_restriction(P, uniform(2, 3), list(line))


def test_u2_minor_examples():
    w = has_u2_minor(uniform(2, 4), 4)
    assert w.contract == ()
    assert has_u2_minor(pg(4, 2), 4) is None
    w = has_u2_minor(uniform(3, 5), 4)
    assert w.contract == (0,)
    assert verify_minor_witness(uniform(3, 5), uniform(2, 4), w)
    with pytest.raises(ValueError):
        has_u2_minor(pg(3, 2), 2)


def _has_u2_minor_brute(M, m):
    # contract any independent set, then look for m pairwise non-parallel points on a line
    for k in range(M.r - 1):
        for C in combinations(range(M.n), k):
            if M.rank(C) != k:
                continue
            N = M.contract(C)
            if N.r < 2:
                continue
            for L in N.flats(2):
                if N.restrict(L).epsilon() >= m:
                    return True
    return False


@given(linear_matroids(qs=(2, 3, 4), max_rank=4, max_n=7), st.sampled_from([3, 4, 5]))
def test_u2_minor_matches_brute_force(M, m):
    w = has_u2_minor(M, m)
    assert (w is not None) == _has_u2_minor_brute(M, m)
    if w is not None:
        assert verify_minor_witness(M, uniform(2, m), w)


def test_representability_examples():
    assert not is_representable(uniform(2, 4), 2)
    r = is_representable(uniform(2, 4), 3)
    assert r and verify_embedding(uniform(2, 4), 3, 2, r.embedding)
    P = pg(3, 2)
    abstract = BasesMatroid(7, 3, [B for B in combinations(range(7), 3) if P.rank(B) == 3])
    r = is_representable(abstract, 2)
    assert r and r.method == "search"


@pytest.mark.parametrize("q", [2, 3, 4, 5])
@pytest.mark.parametrize("m", range(2, 9))
def test_line_length_law(m, q):
    assert bool(is_representable(uniform(2, m), q)) == (m <= q + 1)


def test_representability_refuses_large_instances():
    with pytest.raises(DeskScaleExceeded):
        is_representable(pg(4, 2), 2)
    with pytest.raises(DeskScaleExceeded):
        is_representable(uniform(5, 6), 2)
    with pytest.raises(ValueError):
        is_representable(uniform(3, 4), 2, t=2)


def test_representability_known_cases():
    assert not is_representable(uniform(3, 5), 2)
    assert is_representable(uniform(3, 5), 4)
    F7 = pg(3, 2)
    assert not is_representable(F7, 3)
    assert is_representable(F7, 4)
    # the non-Fano configuration is ternary but not binary
    from densematroid.core import LinearMatroid
    from densematroid.gf import make_field
    F3 = make_field(3)
    nf = LinearMatroid(F3, 3, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1),
                               (0, 1, 1), (1, 1, 1)])
    assert not is_representable(nf, 2)
    assert is_representable(nf, 3).method == "linear"


def test_binary_normal_form_path():
    from densematroid.core import LinearMatroid
    from densematroid.gf import make_field
    F4 = make_field(2, 2)
    assert is_representable(pg(3, 2, F4), 2).method == "normal-form"
    line = LinearMatroid(F4, 2, [(1, 0), (0, 1), (1, 1), (1, 2)])
    r = is_representable(line, 2)
    assert not r and r.method == "normal-form"


@given(linear_matroids(qs=(2, 3, 4), max_rank=3, max_n=7), st.sampled_from([2, 3, 4, 5]))
def test_representability_agrees_with_search(M, q):
    r = is_representable(M, q)
    if r:
        assert verify_embedding(M, q, M.r, r.embedding)
    # the backtracking search on an abstract copy must agree with any fast path
    from densematroid.search import _Budget, _search_representation
    abstract = BasesMatroid(M.n, M.r, M.bases_masks() and
                            [[e for e in range(M.n) if b >> e & 1] for b in M.bases_masks()])
    if M.r == 0:
        return
    si, _ = abstract.simplify()
    assert (_search_representation(si, q, _Budget(None)) is not None) == bool(r)


def test_find_pg_minor_examples():
    P4 = pg(4, 2)
    w = find_pg_minor(P4, 3, 2)
    assert w.contract == () and len(w.inner.mapping) == 7
    assert verify_minor_witness(P4, pg(3, 2), w)
    assert find_pg_minor(uniform(3, 6), 3, 2) is None
    M = direct_sum(uniform(0, 2), uniform(2, 3))
    w = find_pg_minor(M, 1, 5)
    assert w.inner.mapping == (2,)


def test_find_pg_minor_through_contraction():
    # pg(3,2) is a minor of pg(3,2) (+) U_{1,1} only after contracting or deleting the coloop
    M = direct_sum(pg(3, 2), uniform(1, 1))
    w = find_pg_minor(M, 3, 2)
    assert w is not None and verify_minor_witness(M, pg(3, 2), w)
    # U_{2,4} contains U_{2,3} = pg(2,2) but no Fano minor
    assert find_pg_minor(uniform(2, 4), 2, 2) is not None
    assert find_pg_minor(uniform(3, 7), 3, 2) is None


def test_minor_witness_tamper():
    P = pg(4, 2)
    w = find_pg_minor(P, 3, 2)
    bad = MinorWitness(w.contract, w.delete, RestrictionWitness(w.inner.mapping[::-1], ""))
    assert same_rank_function(pg(3, 2), pg(3, 2))
    assert verify_minor_witness(P, pg(3, 2), w)
    overlap = MinorWitness((0,), (0,), w.inner)
    assert not verify_minor_witness(P, pg(3, 2), overlap)
    # reversing a Fano labelling is not an automorphism in canonical order
    assert verify_minor_witness(P, pg(3, 2), bad) == verify_restriction(
        P, pg(3, 2), bad.inner.mapping)
