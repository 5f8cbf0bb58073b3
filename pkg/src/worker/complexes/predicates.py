"""
Exact-sign geometric predicates in the plane.

Each predicate evaluates the determinant in floating point and returns its
sign when the magnitude clears Shewchuk's static error bound; otherwise the
determinant is recomputed exactly with rationals. Inputs are Python floats
(numpy scalars are converted), so the rational fallback is exact.
"""

from fractions import Fraction
from typing import Sequence

import numpy as np

Point = Sequence[float]


EPSILON = float(np.finfo(float).eps) / 2
CCW_ERRBOUND_A = (3.0 + 16.0 * EPSILON) * EPSILON
ICC_ERRBOUND_A = (10.0 + 96.0 * EPSILON) * EPSILON
DOT_ERRBOUND = (4.0 + 32.0 * EPSILON) * EPSILON


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _exact(p: Point):
    return Fraction(float(p[0])), Fraction(float(p[1]))


def orient2d(a: Point, b: Point, c: Point) -> int:
    """+1 if a, b, c turn counterclockwise, -1 clockwise, 0 collinear."""
    detleft = (float(a[0]) - float(c[0])) * (float(b[1]) - float(c[1]))
    detright = (float(a[1]) - float(c[1])) * (float(b[0]) - float(c[0]))
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > CCW_ERRBOUND_A * detsum:
        return _sign(det)

    (ax, ay), (bx, by), (cx, cy) = _exact(a), _exact(b), _exact(c)
    return _sign((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def incircle(a: Point, b: Point, c: Point, d: Point) -> int:
    """For counterclockwise a, b, c: +1 if d is strictly inside their circumcircle, -1 outside, 0 on it."""
    adx, ady = float(a[0]) - float(d[0]), float(a[1]) - float(d[1])
    bdx, bdy = float(b[0]) - float(d[0]), float(b[1]) - float(d[1])
    cdx, cdy = float(c[0]) - float(d[0]), float(c[1]) - float(d[1])

    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (
        alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
    )
    permanent = (
        (abs(bdx * cdy) + abs(cdx * bdy)) * alift
        + (abs(cdx * ady) + abs(adx * cdy)) * blift
        + (abs(adx * bdy) + abs(bdx * ady)) * clift
    )
    if abs(det) > ICC_ERRBOUND_A * permanent:
        return _sign(det)

    (ax, ay), (bx, by), (cx, cy), (dx, dy) = _exact(a), _exact(b), _exact(c), _exact(d)
    adx, ady, bdx, bdy, cdx, cdy = ax - dx, ay - dy, bx - dx, by - dy, cx - dx, cy - dy
    exact = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return _sign(exact)


def in_diametral_disc(a: Point, b: Point, p: Point) -> int:
    """+1 if p is strictly inside the disc with diameter ab, 0 on its boundary, -1 outside."""
    ux, uy = float(a[0]) - float(p[0]), float(a[1]) - float(p[1])
    vx, vy = float(b[0]) - float(p[0]), float(b[1]) - float(p[1])
    dot = ux * vx + uy * vy
    if abs(dot) > DOT_ERRBOUND * (abs(ux * vx) + abs(uy * vy)):
        return -_sign(dot)

    (ax, ay), (bx, by), (px, py) = _exact(a), _exact(b), _exact(p)
    return -_sign((ax - px) * (bx - px) + (ay - py) * (by - py))


def strictly_between(a: Point, b: Point, p: Point) -> bool:
    """For collinear a, b, p: True iff p lies in the open segment ab."""
    (ax, ay), (bx, by), (px, py) = _exact(a), _exact(b), _exact(p)
    return (px - ax) * (bx - ax) + (py - ay) * (by - ay) > 0 and (
        (px - bx) * (ax - bx) + (py - by) * (ay - by) > 0
    )
