from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from densematroid.gf import (FieldElement, FieldError, arith, decode, encode, field_of_order,
                             is_irreducible, least_irreducible, make_field, subfield_embedding)

SMALL = [2, 3, 4, 5, 7, 8, 9]


def _polys(p, k):
    """Monic degree-k polynomials over GF(p), little-endian."""
    for low in product(range(p), repeat=k):
        yield list(low) + [1]


def _has_factor(poly, p):
    # independent oracle: trial division by every monic polynomial of degree 1..k/2
    k = len(poly) - 1
    for d in range(1, k // 2 + 1):
        for f in _polys(p, d):
            rem = list(poly)
            while len(rem) - 1 >= d:
                c = rem[-1]
                if c:
                    shift = len(rem) - 1 - d
                    for i, fc in enumerate(f):
                        rem[shift + i] = (rem[shift + i] - c * fc) % p
                rem.pop()
            if not any(rem):
                return True
    return False


def test_make_field_examples():
    assert make_field(2, 1).q == 2
    assert make_field(3, 1).q == 3
    F4 = make_field(2, 2)
    assert F4.q == 4 and F4.poly == (1, 1, 1)


@pytest.mark.parametrize("p,k", [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2)])
def test_modulus_is_least_irreducible(p, k):
    poly = least_irreducible(p, k)
    assert poly[-1] == 1 and len(poly) == k + 1
    assert not _has_factor(list(poly), p)
    value = encode(poly[:k], p)
    for f in _polys(p, k):
        if encode(f[:k], p) < value:
            assert _has_factor(f, p)
    assert is_irreducible(poly, p)


def test_make_field_is_deterministic():
    assert make_field(3, 2) == make_field(3, 2)
    assert make_field(2, 3).poly == make_field(2, 3).poly


@pytest.mark.parametrize("p,k", [(4, 1), (1, 1), (2, 0), (2, 6), (33, 1)])
def test_make_field_rejects(p, k):
    with pytest.raises(FieldError):
        make_field(p, k)


def test_arith_examples():
    assert arith(make_field(2), "add", 1, 1) == 0
    assert arith(make_field(2, 2), "mul", 2, 2) == 3
    assert arith(make_field(5), "inv", 3) == 2


def test_inverse_of_zero_is_an_error():
    with pytest.raises(FieldError):
        arith(make_field(3), "inv", 0)


def test_out_of_range_operand():
    with pytest.raises(FieldError):
        arith(make_field(3), "add", 3, 1)


def _poly_mul_oracle(F, a, b):
    # schoolbook product of digit vectors, then reduction by repeated subtraction
    p, k = F.p, F.k
    da, db = decode(a, p, k), decode(b, p, k)
    prod = [0] * (2 * k)
    for i, x in enumerate(da):
        for j, y in enumerate(db):
            prod[i + j] = (prod[i + j] + x * y) % p
    for deg in range(2 * k - 1, k - 1, -1):
        c = prod[deg]
        if c:
            for i, m in enumerate(F.poly):
                prod[deg - k + i] = (prod[deg - k + i] - c * m) % p
    return encode(prod[:k], p)


@pytest.mark.parametrize("q", SMALL)
def test_field_axioms_exhaustive(q):
    F = field_of_order(q)
    E = range(q)
    for a in E:
        assert F.add(a, 0) == a and F.mul(a, 1) == a and F.mul(a, 0) == 0
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
            assert F.pow(a, q - 1) == 1
        for b in E:
            assert F.add(a, b) == F.add(b, a)
            assert F.mul(a, b) == F.mul(b, a)
            assert F.sub(F.add(a, b), b) == a
            assert F.mul(a, b) == _poly_mul_oracle(F, a, b)
            for c in E:
                assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
                assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
                assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


@pytest.mark.parametrize("q", [16, 25, 27, 32])
def test_field_axioms_sampled(q):
    F = field_of_order(q)
    rng = random.Random(q)
    for _ in range(10_000):
        a, b, c = (rng.randrange(q) for _ in range(3))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(a, b) == _poly_mul_oracle(F, a, b)
    for a in range(1, q):
        assert F.pow(a, q - 1) == 1


@given(st.sampled_from([(2, 3), (3, 2), (5, 2), (2, 5)]), st.data())
def test_encode_decode_roundtrip(pk, data):
    p, k = pk
    code = data.draw(st.integers(0, p**k - 1))
    assert encode(decode(code, p, k), p) == code


def test_field_element_operators():
    F = make_field(3, 2)
    a, b = FieldElement(F, 4), FieldElement(F, 7)
    assert (a * b).code == F.mul(4, 7)
    assert (a / b * b) == a
    assert (a + -a).code == 0
    assert (a ** 8).code == 1
    with pytest.raises(FieldError):
        a + FieldElement(make_field(3), 1)


@pytest.mark.parametrize("small,big", [(2, 4), (2, 8), (3, 9), (4, 16), (2, 16)])
def test_subfield_embedding_is_a_homomorphism(small, big):
    S, B = field_of_order(small), field_of_order(big)
    emb = subfield_embedding(S, B)
    assert len(set(emb)) == small and emb[0] == 0 and emb[1] == 1
    for a in range(small):
        for b in range(small):
            assert emb[S.add(a, b)] == B.add(emb[a], emb[b])
            assert emb[S.mul(a, b)] == B.mul(emb[a], emb[b])


def test_subfield_embedding_rejects_non_subfield():
    with pytest.raises(FieldError):
        subfield_embedding(field_of_order(4), field_of_order(8))
