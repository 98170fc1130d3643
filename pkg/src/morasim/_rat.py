"""Exact rational arithmetic backend.

Every quantity the simulator reasons about (times, execution units, speeds,
powers, energies) is an exact rational, so that event coincidences and the
run-time correctness checks compare exactly instead of within an epsilon.

gmpy2.mpq is used when available (roughly an order of magnitude faster than
the stdlib Fraction and hash/str-compatible with it); set the environment
variable MORASIM_PURE_PYTHON=1 to force the stdlib backend.
"""

from __future__ import annotations

import os
from fractions import Fraction

__all__ = ["Q", "q", "ZERO", "ONE", "INF", "GMPY2_ACTIVE", "decimal_str", "rat_from_json"]

if os.environ.get("MORASIM_PURE_PYTHON"):
    Q = Fraction
    GMPY2_ACTIVE = False
else:
    try:
        from gmpy2 import mpq as Q  # type: ignore[no-redef]

        GMPY2_ACTIVE = True
    except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
        Q = Fraction
        GMPY2_ACTIVE = False


def q(value, den=None):
    """Build an exact rational from an int, a decimal or 'n/d' string, a
    Fraction, or a numerator/denominator pair.

    Floats are rejected: a float that reaches the engine is a bug, because
    binary rounding would silently break exact event comparisons.
    """
    if den is not None:
        return Q(value, den)
    if isinstance(value, float):
        raise TypeError(
            "refusing to build an exact rational from float %r; pass a string instead" % value
        )
    if isinstance(value, str):
        # mpq rejects decimal strings on some gmpy2 builds; Fraction accepts both.
        return Q(Fraction(value))
    return Q(value)


ZERO = q(0)
ONE = q(1)

# Sentinel for "no such instant"; only ever compared against, never added.
INF = float("inf")


def decimal_str(value, places: int = 6) -> str:
    """Fixed-point decimal rendering of an exact rational (display only)."""
    n, d = value.numerator, value.denominator
    sign = "-" if n < 0 else ""
    n = abs(n)
    scale = 10**places
    scaled = (n * scale * 2 + d) // (2 * d)  # round half up
    whole, frac = divmod(scaled, scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def rat_from_json(value):
    """Parse a JSON-carried numeric into an exact rational.

    Accepts ints and strings ('0.15', '3/5'); rejects floats so that lossy
    JSON numbers cannot leak into the exact pipeline.
    """
    if isinstance(value, bool):
        raise TypeError("expected a rational, got a bool")
    if isinstance(value, int):
        return q(value)
    if isinstance(value, str):
        return q(value)
    raise TypeError(f"expected an int or a decimal string, got {value!r}")
