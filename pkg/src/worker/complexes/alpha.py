import logging
from math import hypot

from ..filtration import Filtration, entry_value
from ..geometry import PointCloud
from .delaunay import Triangulation2D, delaunay_2d
from .predicates import in_diametral_disc

logger = logging.getLogger(__name__)


def circumradius(a, b, c) -> float:
    ab = hypot(b[0] - a[0], b[1] - a[1])
    bc = hypot(c[0] - b[0], c[1] - b[1])
    ca = hypot(a[0] - c[0], a[1] - c[1])
    twice_area = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    return ab * bc * ca / (2.0 * twice_area)


def alpha_filtration(tri: Triangulation2D) -> Filtration:
    """Radius filtration on the Delaunay simplices.

    Triangles enter at their circumradius. An edge whose diametral disc holds
    no opposite vertex (Gabriel) enters at half its length; any other edge
    enters with its first incident triangle. Duplicate points are joined to
    their representative by an edge at 0.
    """
    pts = [(float(x), float(y)) for x, y in tri.points]
    entries = {(i,): 0.0 for i in range(len(pts))}

    tri_values = {}
    for a, b, c in tri.triangles.tolist():
        tri_values[tuple(sorted((a, b, c)))] = circumradius(pts[a], pts[b], pts[c])

    opposites = tri.edge_opposites()
    for (u, v), others in opposites.items():
        gabriel = all(in_diametral_disc(pts[u], pts[v], pts[w]) <= 0 for w in others)
        if gabriel:
            entries[(u, v)] = hypot(pts[v][0] - pts[u][0], pts[v][1] - pts[u][1]) / 2.0
        else:
            entries[(u, v)] = min(tri_values[tuple(sorted((u, v, w)))] for w in others)

    for simplex, radius in tri_values.items():
        a, b, c = simplex
        face_max = max(entries[(a, b)], entries[(a, c)], entries[(b, c)])
        entries[simplex] = entry_value(radius, face_max)

    for dup, rep in tri.duplicates.items():
        entries[(min(dup, rep), max(dup, rep))] = 0.0

    return Filtration.from_pairs(entries.items())


def build_alpha_2d(cloud: PointCloud) -> Filtration:
    """Alpha filtration of a planar cloud; degenerate input errors propagate from delaunay_2d."""
    tri = delaunay_2d(cloud)
    filtration = alpha_filtration(tri)
    logger.debug("Alpha filtration: %d simplices from %d points", len(filtration), cloud.n)
    return filtration
