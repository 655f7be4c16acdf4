"""JSON documents: matroid files, witnesses, certificates and run reports.

Every document carries ``format_version``.  Output is canonical JSON
(sorted keys, fixed indentation, trailing newline) so that identical
inputs give identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .core import BasesMatroid, LinearMatroid, Matroid, MatroidError, as_linear
from .gf import FieldError, field_from_json
from .search import MinorWitness, RestrictionWitness
from .structure import RoundnessWitness, StackCertificate

FORMAT_VERSION = 1


class FormatError(ValueError):
    """A document that does not parse to a valid object."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# matroid files
# ---------------------------------------------------------------------------

def matroid_to_json(M: Matroid) -> dict:
    """Linear matroids (and minors of them) keep their matrix; others list bases."""
    L = as_linear(M)
    if L is not None:
        spec = L.spec
        return {"format_version": FORMAT_VERSION, "kind": "linear",
                "p": spec.p, "k": spec.k, "poly": list(spec.poly), "rows": L.rows,
                "matrix": L.matrix()}
    return {"format_version": FORMAT_VERSION, "kind": "bases", "n": M.n, "rank": M.r,
            "bases": [sorted(_bits(b)) for b in M.bases_masks()]}


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _int_list(x: Any, what: str) -> list[int]:
    if not isinstance(x, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                          for v in x):
        raise FormatError("bad-field", f"{what} must be a list of integers")
    return x


def matroid_from_json(doc: Any) -> Matroid:
    if not isinstance(doc, dict):
        raise FormatError("bad-document", "matroid file must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError("bad-version", f"unsupported format_version {version!r}")
    kind = doc.get("kind")
    try:
        if kind == "linear":
            spec = field_from_json(doc)
            rows = doc.get("rows")
            if not isinstance(rows, int) or rows < 0:
                raise FormatError("bad-field", "rows must be a non-negative integer")
            matrix = doc.get("matrix")
            if not isinstance(matrix, list) or len(matrix) != rows:
                raise FormatError("bad-matrix", f"matrix must have {rows} rows")
            matrix = [_int_list(row, "matrix row") for row in matrix]
            width = len(matrix[0]) if matrix else 0
            if any(len(row) != width for row in matrix):
                raise FormatError("bad-matrix", "matrix rows differ in length")
            for row in matrix:
                for x in row:
                    spec.check(x)
            cols = [tuple(matrix[i][j] for i in range(rows)) for j in range(width)]
            return LinearMatroid(spec, rows, cols)
        if kind == "bases":
            n, rank, bases = doc.get("n"), doc.get("rank"), doc.get("bases")
            if not isinstance(n, int) or not isinstance(rank, int):
                raise FormatError("bad-field", "n and rank must be integers")
            if not isinstance(bases, list):
                raise FormatError("bad-field", "bases must be a list")
            return BasesMatroid(n, rank, [_int_list(B, "basis") for B in bases])
    except FieldError as exc:
        raise FormatError("bad-field-spec", str(exc)) from exc
    except (MatroidError, IndexError) as exc:
        raise FormatError("not-a-matroid", str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError("bad-field", f"malformed matroid file: {exc}") from exc
    raise FormatError("bad-kind", f"unknown matroid kind {kind!r}")


def load_matroid(path: str) -> tuple[Matroid, str]:
    """Parse a matroid file; returns the matroid and the digest of its bytes."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise FormatError("unreadable", f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError("bad-json", f"{path}: {exc}") from exc
    return matroid_from_json(doc), digest(data)


def load_json(path: str) -> tuple[Any, bytes]:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
        return json.loads(data.decode("utf-8")), data
    except OSError as exc:
        raise FormatError("unreadable", f"{path}: {exc.strerror}") from exc
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError("bad-json", f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# witnesses and certificates
# ---------------------------------------------------------------------------

def restriction_to_json(w: RestrictionWitness) -> dict:
    return {"contract": [], "delete": [], "map": w.pairs(), "target": w.target}


def minor_to_json(w: MinorWitness) -> dict:
    doc = w.to_json()
    doc["target"] = w.inner.target
    return doc


def minor_from_json(doc: dict) -> MinorWitness:
    try:
        pairs = sorted((int(t), int(h)) for t, h in doc["map"])
        if [t for t, _ in pairs] != list(range(len(pairs))):
            raise FormatError("bad-witness", "map must cover target elements 0..n-1")
        inner = RestrictionWitness(tuple(h for _, h in pairs), doc.get("target", ""))
        return MinorWitness(tuple(doc.get("contract", [])), tuple(doc.get("delete", [])), inner)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError("bad-witness", f"malformed witness: {exc}") from exc


def certificate_from_json(doc: Any) -> StackCertificate:
    try:
        return StackCertificate.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("bad-certificate", f"malformed stack certificate: {exc}") from exc


def roundness_from_json(doc: Any) -> RoundnessWitness:
    try:
        return RoundnessWitness.from_json(doc)
    except (KeyError, TypeError) as exc:
        raise FormatError("bad-witness", f"malformed roundness witness: {exc}") from exc


# ---------------------------------------------------------------------------
# run reports
# ---------------------------------------------------------------------------

def run_report(command: dict, input_digest: str | None, results: Any, version: str,
               seed: int | None, timing: float | None = None) -> dict:
    doc = {"format_version": FORMAT_VERSION, "command": command,
           "input_digest": input_digest, "results": results, "version": version,
           "seed": seed}
    if timing is not None:
        doc["timing"] = {"seconds": round(timing, 3)}
    return doc
