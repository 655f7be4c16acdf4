from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from densematroid.bounds import (HypothesisError, crude_bound, kung_bound, kung_check,
                                 kungrel_check, projection_bound, verify_projection_instance)
from densematroid.core import LinearMatroid, uniform
from densematroid.geometry import pg
from densematroid.gf import make_field
from densematroid.instances import fano_projection_instance, projection_instances
from densematroid.search import RestrictionWitness

from strategies import linear_matroids


def test_kung_examples():
    rep = kung_check(pg(3, 2), 2, verify_membership=True)
    assert (rep.epsilon, rep.kung_bound) == (7, 7)
    assert rep.verdicts[0].holds and rep.verdicts[0].equality
    assert rep.membership == "member"
    rep = kung_check(uniform(2, 4), 3, verify_membership=True)
    assert (rep.epsilon, rep.kung_bound) == (4, 4) and rep.verdicts[0].equality
    rep = kung_check(uniform(0, 3), 2)
    assert (rep.epsilon, rep.kung_bound) == (0, 0) and rep.holds


def test_kung_bound_formula():
    for ell in range(2, 6):
        for r in range(0, 6):
            assert kung_bound(r, ell) == sum(ell**i for i in range(r))
    with pytest.raises(ValueError):
        kung_bound(3, 1)


def test_bounds_are_exact_types():
    rep = kung_check(pg(3, 3), 3, q=3)
    assert isinstance(rep.kung_bound, int)
    assert isinstance(rep.crude_bound, Fraction) and isinstance(rep.ratio, Fraction)
    assert rep.ratio == Fraction(13, 27)
    assert crude_bound(0, 2) == Fraction(1, 3)


def test_kung_flags_non_members():
    rep = kung_check(uniform(2, 5), 2, verify_membership=True)
    assert rep.membership == "not-member" and not rep.verdicts[0].holds


@given(linear_matroids(qs=(2, 3, 4), max_rank=4, max_n=9))
def test_kung_holds_for_linear_matroids(M):
    q = M.q
    rep = kung_check(M, q, verify_membership=True)
    assert rep.membership == "member"
    assert rep.verdicts[0].holds
    # equality exactly at full projective geometries
    if rep.verdicts[0].equality:
        si, _ = M.simplify()
        assert si.n == (q**si.r - 1) // (q - 1)


@pytest.mark.parametrize("m,q", [(2, 2), (3, 2), (4, 2), (3, 3), (2, 5)])
def test_kung_equality_at_geometries(m, q):
    assert kung_check(pg(m, q), q).verdicts[0].equality


def test_kungrel_examples():
    c = kungrel_check(pg(3, 2), [0], 2)
    assert (c.eps_contracted, c.rhs) == (3, Fraction(7, 3)) and c.holds
    assert c.identity_holds and c.flat_count == 3
    c = kungrel_check(pg(3, 2), [], 2)
    assert c.eps_contracted == c.eps == 7 and c.rhs == 7 and c.holds
    c = kungrel_check(uniform(2, 4), [0], 3)
    assert (c.eps_contracted, c.rhs) == (1, 1) and c.holds


def test_kungrel_spanning_contraction_is_flagged():
    c = kungrel_check(pg(3, 2), [0, 1, 2, 3], 2)
    assert c.spanning and c.eps_contracted == 0 and not c.holds


@given(linear_matroids(qs=(2, 3), max_rank=4, max_n=9), st.data())
def test_contraction_density(M, data):
    if M.n == 0:
        return
    C = data.draw(st.sets(st.integers(0, M.n - 1), max_size=M.n))
    c = kungrel_check(M, sorted(C), M.q)
    if c.spanning:
        return
    assert c.holds and c.identity_holds and c.sum_holds


def test_projection_bound_examples():
    assert projection_bound(2, 3, 0) == 7
    assert projection_bound(2, 2, 1) == 5
    assert projection_bound(3, 1, 1) == 1
    with pytest.raises(ValueError):
        projection_bound(2, -1, 0)


def test_fano_over_gf4_instance():
    inst = fano_projection_instance()
    chk = verify_projection_instance(inst.M, inst.R, inst.F, inst.q)
    assert (chk.eps_contracted, chk.bound) == (5, 5) and chk.equality


def test_projection_with_empty_flat():
    P = pg(3, 2)
    R = RestrictionWitness(tuple(range(7)), "pg:3:2")
    chk = verify_projection_instance(P, R, [], 2)
    assert chk.k == 0 and chk.holds and chk.equality


def test_projection_hypothesis_errors():
    inst = fano_projection_instance()
    with pytest.raises(HypothesisError) as e:
        verify_projection_instance(inst.M, inst.R, [0], 2)
    assert e.value.reason == "not-disjoint"
    F4 = make_field(2, 2)
    M = LinearMatroid(F4, 3, list(inst.M.columns) + [(1, 2, 0)])
    with pytest.raises(HypothesisError) as e:
        verify_projection_instance(M, inst.R, [7], 2)
    assert e.value.reason == "not-a-flat"
    with pytest.raises(HypothesisError) as e:
        verify_projection_instance(inst.M, RestrictionWitness((0, 1, 2), ""), [7], 2)
    assert e.value.reason == "R-not-spanning"
    bad = RestrictionWitness((1, 0, 2, 3, 4, 5, 6), "")
    with pytest.raises(HypothesisError) as e:
        verify_projection_instance(inst.M, bad, [7], 2)
    assert e.value.reason == "R-not-pg"


def test_projection_random_instances():
    for inst in projection_instances(11, 40):
        chk = verify_projection_instance(inst.M, inst.R, inst.F, inst.q)
        assert chk.holds, (inst.F, chk)
