"""Exact arithmetic in small finite fields GF(p^k).

Elements are integer codes in ``[0, q)``.  The base-p digits of a code,
least significant first, are the coefficients of a polynomial over GF(p);
multiplication is polynomial multiplication reduced modulo a monic
irreducible of degree k.  The modulus is always the irreducible with the
smallest integer encoding, so a given (p, k) yields the same field tables
on every run.

All operations go through precomputed q x q tables, which is cheap for the
supported orders (q <= 32 by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence

DEFAULT_ORDER_LIMIT = 32


class FieldError(ValueError):
    """Invalid field parameters or an illegal field operation."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q`` as ``p**k``; raise FieldError if q is not a prime power."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = 2
    while q % p:
        p += 1
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, k


# ---------------------------------------------------------------------------
# polynomials over GF(p), little-endian coefficient lists
# ---------------------------------------------------------------------------

def encode(coeffs: Sequence[int], p: int) -> int:
    code = 0
    for c in reversed(coeffs):
        code = code * p + c
    return code


def decode(code: int, p: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        code, c = divmod(code, p)
        out.append(c)
    return tuple(out)


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m over GF(p)."""
    a = _trim(list(a))
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        c = a[-1]
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Exhaustive check: no monic factor of degree 1 .. deg/2."""
    k = len(poly) - 1
    if k < 1 or poly[-1] != 1:
        return False
    for d in range(1, k // 2 + 1):
        for low in product(range(p), repeat=d):
            divisor = list(low) + [1]
            if not poly_mod(poly, divisor, p):
                return False
    return True


def least_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Monic irreducible of degree k over GF(p) with the smallest encoding."""
    for low in range(p**k):
        poly = decode(low, p, k) + (1,)
        if is_irreducible(poly, p):
            return poly
    raise FieldError(f"no irreducible of degree {k} over GF({p})")  # pragma: no cover


# ---------------------------------------------------------------------------
# field spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """GF(p^k) with a fixed modulus ``poly`` (little-endian, monic)."""

    p: int
    k: int
    poly: tuple[int, ...]
    q: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", self.p**self.k)

    def __repr__(self) -> str:
        return f"GF({self.q})"

    @cached_property
    def _tables(self):
        p, k, q = self.p, self.k, self.q
        digits = [decode(c, p, k) for c in range(q)]
        add = [[encode([(x + y) % p for x, y in zip(digits[a], digits[b])], p)
                for b in range(q)] for a in range(q)]
        neg = [encode([(-x) % p for x in digits[a]], p) for a in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            for b in range(a, q):
                prod = poly_mod(poly_mul(_trim(list(digits[a])), _trim(list(digits[b])), p),
                                self.poly, p) if k > 1 else [(a * b) % p]
                c = encode(prod, p)
                mul[a][b] = mul[b][a] = c
        inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
        sub = [[add[a][neg[b]] for b in range(q)] for a in range(q)]
        return add, sub, mul, neg, inv

    @property
    def add_table(self) -> list[list[int]]:
        return self._tables[0]

    @property
    def sub_table(self) -> list[list[int]]:
        return self._tables[1]

    @property
    def mul_table(self) -> list[list[int]]:
        return self._tables[2]

    @property
    def neg_table(self) -> list[int]:
        return self._tables[3]

    @property
    def inv_table(self) -> list[int]:
        return self._tables[4]

    def check(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.q:
            raise FieldError(f"{a!r} is not an element code of GF({self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.sub_table[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("inverse of zero")
        return self.inv_table[a]

    def div(self, a: int, b: int) -> int:
        return self.mul_table[a][self.inv(b)]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul_table[result][base]
            base = self.mul_table[base][base]
            e >>= 1
        return result

    def element(self, code: int) -> "FieldElement":
        return FieldElement(self, self.check(code))

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self, c) for c in range(self.q)]

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "poly": list(self.poly)}


@lru_cache(maxsize=None)
def _make_field(p: int, k: int) -> FieldSpec:
    poly = least_irreducible(p, k)
    return FieldSpec(p, k, poly)


def make_field(p: int, k: int = 1, *, limit: int = DEFAULT_ORDER_LIMIT) -> FieldSpec:
    """Return the canonical GF(p^k).

    Raises FieldError for a non-prime ``p``, ``k < 1`` or an order above
    ``limit``.
    """
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if k < 1:
        raise FieldError(f"extension degree must be >= 1, got {k}")
    if p**k > limit:
        raise FieldError(f"GF({p}^{k}) exceeds the order limit {limit}")
    return _make_field(p, k)


def field_of_order(q: int, *, limit: int = DEFAULT_ORDER_LIMIT) -> FieldSpec:
    p, k = prime_power(q)
    return make_field(p, k, limit=limit)


def field_from_json(doc: dict) -> FieldSpec:
    spec = make_field(int(doc["p"]), int(doc.get("k", 1)))
    poly = doc.get("poly")
    if poly is not None and spec.k > 1 and tuple(poly) != spec.poly:
        raise FieldError(f"modulus {poly} is not the canonical one {list(spec.poly)}")
    return spec


def subfield_embedding(small: FieldSpec, big: FieldSpec) -> list[int]:
    """Codes of the image of each element of ``small`` inside ``big``.

    Uses the least root of ``small.poly`` in ``big`` as the image of x.
    """
    if small.p != big.p or big.k % small.k:
        raise FieldError(f"{small} is not a subfield of {big}")
    if small.k == 1:
        return list(range(small.q))
    for beta in range(big.q):
        acc = 0
        for i, c in enumerate(small.poly):
            acc = big.add(acc, big.mul(c, big.pow(beta, i)))
        if acc == 0:
            break
    else:  # pragma: no cover
        raise FieldError("no root found")
    image = []
    for code in range(small.q):
        acc = 0
        for i, c in enumerate(decode(code, small.p, small.k)):
            acc = big.add(acc, big.mul(c, big.pow(beta, i)))
        image.append(acc)
    return image


def arith(spec: FieldSpec, op: str, a: int, b: int = 0) -> int:
    """Dispatch one of add, sub, mul, inv, pow on element codes."""
    spec.check(a)
    if op == "inv":
        return spec.inv(a)
    if op == "pow":
        return spec.pow(a, b)
    spec.check(b)
    if op == "add":
        return spec.add(a, b)
    if op == "sub":
        return spec.sub(a, b)
    if op == "mul":
        return spec.mul(a, b)
    raise FieldError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class FieldElement:
    """Immutable field element; arithmetic operators dispatch to the tables."""

    spec: FieldSpec
    code: int

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise FieldError("mixing elements of different fields")
            return other.code
        return self.spec.check(other)

    def __add__(self, other):
        return FieldElement(self.spec, self.spec.add(self.code, self._other(other)))

    def __sub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self.code, self._other(other)))

    def __mul__(self, other):
        return FieldElement(self.spec, self.spec.mul(self.code, self._other(other)))

    def __truediv__(self, other):
        return FieldElement(self.spec, self.spec.div(self.code, self._other(other)))

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg(self.code))

    def __pow__(self, e: int):
        return FieldElement(self.spec, self.spec.pow(self.code, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.code))

    def coefficients(self) -> tuple[int, ...]:
        return decode(self.code, self.spec.p, self.spec.k)

    def __int__(self) -> int:
        return self.code

    def __repr__(self) -> str:
        return f"{self.code}@GF({self.spec.q})"
