"""Projective and affine geometries over GF(q) as linear matroids."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .core import LinearMatroid
from .gf import FieldSpec, field_of_order, subfield_embedding


@dataclass(frozen=True)
class GeometryTag:
    """PG(m-1, q) or AG(m-1, q), identified by its rank m."""

    family: str
    rank: int
    q: int

    def __post_init__(self) -> None:
        if self.family not in ("PG", "AG"):
            raise ValueError(f"unknown geometry family {self.family!r}")
        if self.rank < 1:
            raise ValueError("geometry rank must be >= 1")

    @property
    def size(self) -> int:
        if self.family == "PG":
            return (self.q**self.rank - 1) // (self.q - 1)
        return self.q ** (self.rank - 1)

    def build(self) -> LinearMatroid:
        return pg(self.rank, self.q) if self.family == "PG" else ag(self.rank, self.q)

    def __str__(self) -> str:
        return f"{self.family.lower()}:{self.rank}:{self.q}"

    @classmethod
    def parse(cls, text: str) -> "GeometryTag":
        fam, m, q = text.split(":")
        return cls(fam.upper(), int(m), int(q))


def projective_points(spec: FieldSpec, m: int) -> list[tuple[int, ...]]:
    """Normalized points (first nonzero coordinate 1) in lexicographic order."""
    pts = []
    for v in product(range(spec.q), repeat=m):
        for c in v:
            if c:
                if c == 1:
                    pts.append(v)
                break
    return pts


def pg(m: int, q: int, field: FieldSpec | None = None) -> LinearMatroid:
    """PG(m-1, q): one column per projective point of GF(q)^m.

    With ``field`` given (an extension of GF(q)) the same points are written
    over the larger field through the canonical subfield embedding.
    """
    if m < 1:
        raise ValueError("rank must be >= 1")
    small = field_of_order(q)
    pts = projective_points(small, m)
    if field is None or field == small:
        return LinearMatroid(small, m, pts)
    emb = subfield_embedding(small, field)
    return LinearMatroid(field, m, [tuple(emb[x] for x in v) for v in pts])


def ag(m: int, q: int, field: FieldSpec | None = None) -> LinearMatroid:
    """AG(m-1, q): PG(m-1, q) minus the hyperplane {x_0 = 0}."""
    P = pg(m, q, field)
    cols = [c for c in P.columns if c[0] != 0]
    return LinearMatroid(P.spec, m, cols)


def pg_point_index(m: int, q: int) -> dict[tuple[int, ...], int]:
    """Normalized point -> column index of ``pg(m, q)``."""
    return {v: i for i, v in enumerate(projective_points(field_of_order(q), m))}
