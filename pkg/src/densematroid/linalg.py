"""Row reduction over GF(q) on vectors of element codes."""

from __future__ import annotations

from typing import Iterable, Sequence

from .gf import FieldSpec


def normalize(spec: FieldSpec, v: Sequence[int]) -> tuple[int, ...] | None:
    """Scale ``v`` so its first nonzero entry is 1; None for the zero vector."""
    for c in v:
        if c:
            if c == 1:
                return tuple(v)
            row = spec.mul_table[spec.inv(c)]
            return tuple(row[x] for x in v)
    return None


class Eliminator:
    """Incrementally built echelon basis.

    Each stored row has a 1 at its pivot and zeros at the pivots of the rows
    stored before it, so reducing against the rows in insertion order clears
    every pivot.
    """

    def __init__(self, spec: FieldSpec, width: int):
        self.spec = spec
        self.width = width
        self.rows: list[tuple[int, list[int]]] = []

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return [piv for piv, _ in self.rows]

    def reduce(self, v: Sequence[int]) -> list[int]:
        sub, mul = self.spec.sub_table, self.spec.mul_table
        v = list(v)
        for piv, row in self.rows:
            c = v[piv]
            if c:
                mc = mul[c]
                v = [sub[x][mc[y]] for x, y in zip(v, row)]
        return v

    def add(self, v: Sequence[int]) -> bool:
        """Insert ``v``; return True if it was independent of the basis."""
        v = self.reduce(v)
        for i, c in enumerate(v):
            if c:
                if c != 1:
                    row = self.spec.mul_table[self.spec.inv(c)]
                    v = [row[x] for x in v]
                self.rows.append((i, v))
                return True
        return False

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))


def rank_of(spec: FieldSpec, vectors: Iterable[Sequence[int]], width: int) -> int:
    if spec.q == 2:
        return rank_bits(pack_bits(v) for v in vectors)
    el = Eliminator(spec, width)
    for v in vectors:
        el.add(v)
    return len(el)


def pack_bits(v: Sequence[int]) -> int:
    out = 0
    for i, c in enumerate(v):
        if c:
            out |= 1 << i
    return out


def rank_bits(vectors: Iterable[int]) -> int:
    """Rank of GF(2) vectors packed as integers."""
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length()
            b = basis.get(top)
            if b is None:
                basis[top] = v
                break
            v ^= b
    return len(basis)


def coordinates(spec: FieldSpec, basis: Sequence[Sequence[int]],
                v: Sequence[int]) -> list[int] | None:
    """Coefficients expressing ``v`` in the (independent) ``basis``.

    Returns None when v is outside the span.  Works on the augmented
    system by carrying an identity block alongside each basis vector.
    """
    m = len(basis)
    width = len(v)
    el = Eliminator(spec, width + m)
    for i, b in enumerate(basis):
        aug = list(b) + [0] * m
        aug[width + i] = 1
        el.add(aug)
    if any(piv >= width for piv in el.pivots):
        raise ValueError("basis vectors are dependent")
    reduced = el.reduce(list(v) + [0] * m)
    if any(reduced[:width]):
        return None
    # reduced = v - sum(c_i b_i) expressed on the tail as -c
    return [spec.neg(x) for x in reduced[width:]]
