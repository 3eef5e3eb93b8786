"""Reading and writing correspondence files.

The on-disk format is CSV with the header ``u1,v1,u2,v2,alpha1,alpha2,q1,q2``.
Angles are stored in radians. Blank lines and lines starting with ``#`` are
ignored wherever they appear.
"""
from __future__ import annotations

import io
import math
from pathlib import Path
from typing import Iterable, Sequence

from .affine import SiftCorrespondence
from .errors import ParseError

FIELDS = ("u1", "v1", "u2", "v2", "alpha1", "alpha2", "q1", "q2")
HEADER = ",".join(FIELDS)


def parse_correspondences(lines: Iterable[str], degrees: bool = False) -> list[SiftCorrespondence]:
    """Parse correspondence records; ``degrees`` converts the angle columns on ingest."""
    out = []
    seen_header = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line.replace(" ", "") != HEADER:
                raise ParseError(f"expected header {HEADER!r}, got {line!r}", lineno)
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != len(FIELDS):
            raise ParseError(f"expected {len(FIELDS)} fields, got {len(parts)}", lineno)
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("fields must be finite", lineno)
        u1, v1, u2, v2, a1, a2, q1, q2 = vals
        if not (q1 > 0 and q2 > 0):
            raise ParseError(f"scales must be positive, got q1={q1}, q2={q2}", lineno)
        if degrees:
            a1, a2 = math.radians(a1), math.radians(a2)
        out.append(SiftCorrespondence((u1, v1), (u2, v2), a1, a2, q1, q2))
    if not seen_header:
        raise ParseError("missing header line", None)
    return out


def read_correspondences(path, degrees: bool = False) -> list[SiftCorrespondence]:
    with open(path, newline="") as fh:
        return parse_correspondences(fh, degrees)


def format_correspondences(cs: Sequence[SiftCorrespondence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(HEADER + "\n")
    for c in cs:
        vals = (*c.p1, *c.p2, c.alpha1, c.alpha2, c.q1, c.q2)
        # repr round-trips doubles exactly
        buf.write(",".join(repr(float(v)) for v in vals) + "\n")
    return buf.getvalue()


def write_correspondences(cs: Sequence[SiftCorrespondence], path, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_correspondences(cs, comments))
