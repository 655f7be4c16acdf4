"""Exact density bounds and instance checkers.

Every value here is an int or a Fraction; nothing is compared in floating
point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .core import LinearMatroid, Matroid, mask_tuple
from .search import RestrictionWitness, has_u2_minor, verify_restriction
from .geometry import pg


def kung_bound(rank: int, ell: int) -> int:
    """(ell^r - 1) / (ell - 1), the most points a rank-r member of U(ell) has."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    return (ell**rank - 1) // (ell - 1)


def crude_bound(rank: int, ell: int) -> Fraction:
    """(ell + 1)^(r - 1); a Fraction so that rank 0 gives 1/(ell+1)."""
    return Fraction(ell + 1) ** (rank - 1)


@dataclass
class Verdict:
    name: str
    lhs: int | Fraction
    rhs: int | Fraction
    relation: str
    holds: bool
    equality: bool

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "relation": self.relation, "holds": self.holds, "equality": self.equality}


def _verdict(name: str, lhs, rhs, relation: str) -> Verdict:
    holds = lhs <= rhs if relation == "<=" else lhs >= rhs
    return Verdict(name, lhs, rhs, relation, holds, lhs == rhs)


@dataclass
class DensityReport:
    epsilon: int
    rank: int
    ell: int
    kung_bound: int
    crude_bound: Fraction
    ratio: Fraction | None = None
    q: int | None = None
    membership: str = "unchecked"
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon, "rank": self.rank, "ell": self.ell,
            "kung_bound": self.kung_bound, "crude_bound": str(self.crude_bound),
            "q": self.q, "ratio": None if self.ratio is None else str(self.ratio),
            "membership": self.membership,
            "verdicts": [v.to_json() for v in self.verdicts],
        }


class KungViolation(AssertionError):
    """Kung's bound failed on a matroid verified to have no long-line minor."""


def kung_check(M: Matroid, ell: int, *, q: int | None = None,
               verify_membership: bool = False) -> DensityReport:
    """Compare eps(M) with Kung's bound and the cruder (ell+1)^(r-1) estimate.

    With ``verify_membership`` the absence of a U_{2,ell+2}-minor is checked
    first; a Kung violation on a verified member raises KungViolation.
    """
    if ell < 2:
        raise ValueError("ell must be >= 2")
    eps, r = M.epsilon(), M.r
    report = DensityReport(eps, r, ell, kung_bound(r, ell), crude_bound(r, ell), q=q)
    if q is not None:
        report.ratio = Fraction(eps, q**r)
    if verify_membership:
        report.membership = "member" if has_u2_minor(M, ell + 2) is None else "not-member"
    report.verdicts.append(_verdict("kung", eps, report.kung_bound, "<="))
    report.verdicts.append(_verdict("crude", Fraction(eps), report.crude_bound, "<="))
    if report.membership == "member" and not report.verdicts[0].holds:
        raise KungViolation(f"eps = {eps} > {report.kung_bound} for a verified U({ell}) member")
    return report


@dataclass
class ContractionCheck:
    """Outcome of the contraction-density inequality for one (M, C)."""

    eps_contracted: int
    eps: int
    rank_c: int
    rhs: Fraction
    holds: bool
    flat_count: int
    identity_holds: bool
    flat_sum: int
    sum_holds: bool
    spanning: bool

    def to_json(self) -> dict:
        return {"eps_contracted": self.eps_contracted, "eps": self.eps, "rank_C": self.rank_c,
                "rhs": str(self.rhs), "holds": self.holds, "flat_count": self.flat_count,
                "identity_holds": self.identity_holds, "flat_sum": self.flat_sum,
                "sum_holds": self.sum_holds, "spanning": self.spanning}


def kungrel_check(M: Matroid, C: Iterable[int], ell: int) -> ContractionCheck:
    """eps(M/C) >= (ell+1)^(-r(C)) eps(M), with the counting steps behind it.

    Also reports the number of rank-(r(C)+1) flats containing C, which must
    equal eps(M/C), and whether eps(M) <= sum of eps(M|F) over those flats.
    The inequality needs C to be non-spanning: a spanning C leaves no points
    in M/C, and ``spanning`` flags that case.
    """
    cm = M.mask_of(C)
    rc = M.rank_mask(cm)
    eps = M.epsilon()
    eps_c = M.minor_mask(cm, 0).epsilon()
    rhs = Fraction(eps, (ell + 1) ** rc)
    if rc < M.r:
        flats = [F for F in M.flats_masks(rc + 1) if F & cm == cm]
    else:
        flats = []
    flat_sum = sum(M.restrict_mask(F).epsilon() for F in flats)
    return ContractionCheck(eps_c, eps, rc, rhs, eps_c >= rhs, len(flats),
                            len(flats) == eps_c, flat_sum, eps <= flat_sum, rc == M.r)


def projection_bound(q: int, r_after: int, k: int) -> Fraction:
    """(q^(r+k) - 1)/(q - 1) - q (q^(2k) - 1)/(q^2 - 1) for r = r(M/F)."""
    if r_after < 0 or k < 0:
        raise ValueError("r_after and k must be >= 0")
    return (Fraction(q ** (r_after + k) - 1, q - 1)
            - q * Fraction(q ** (2 * k) - 1, q * q - 1))


class HypothesisError(ValueError):
    """An instance does not meet the hypotheses of the projection bound."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass
class ProjectionCheck:
    eps_contracted: int
    r_after: int
    k: int
    bound: Fraction
    holds: bool
    equality: bool

    def to_json(self) -> dict:
        return {"eps_contracted": self.eps_contracted, "r_after": self.r_after, "k": self.k,
                "bound": str(self.bound), "holds": self.holds, "equality": self.equality}


def verify_projection_instance(M: Matroid, R: RestrictionWitness, F: Iterable[int], q: int,
                               *, check_geometry: bool = True) -> ProjectionCheck:
    """Check eps(M/F) against ``projection_bound`` on one instance.

    ``R`` maps pg(r(M), q) into M.  Raises HypothesisError with reason
    ``R-not-spanning``, ``R-not-pg``, ``not-a-flat`` or ``not-disjoint``.
    """
    fm = M.mask_of(F)
    r = M.r
    rm = M.mask_of(R.mapping)
    if M.rank_mask(rm) != r:
        raise HypothesisError("R-not-spanning", "R does not span M")
    method = "linear" if isinstance(M, LinearMatroid) else "auto"
    if check_geometry and not verify_restriction(M, pg(r, q), R.mapping, method):
        raise HypothesisError("R-not-pg", f"R is not a PG({r - 1},{q}) restriction")
    if not M.is_flat_mask(fm):
        raise HypothesisError("not-a-flat", f"{mask_tuple(fm)} is not a flat")
    if fm & rm:
        raise HypothesisError("not-disjoint", "F meets E(R)")
    k = M.rank_mask(fm)
    N = M.minor_mask(fm, 0)
    eps, ra = N.epsilon(), N.r
    b = projection_bound(q, ra, k)
    return ProjectionCheck(eps, ra, k, b, eps >= b, eps == b)
