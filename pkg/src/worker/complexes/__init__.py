"""Filtered complex builders: alpha (planar), exhaustive Čech and Vietoris-Rips."""

from .alpha import build_alpha_2d
from .cech import build_cech_oracle, miniball
from .delaunay import Triangulation2D, count_delaunay_simplices, delaunay_2d
from .rips import auto_scale, build_rips

__all__ = [
    "Triangulation2D",
    "auto_scale",
    "build_alpha_2d",
    "build_cech_oracle",
    "build_rips",
    "count_delaunay_simplices",
    "delaunay_2d",
    "miniball",
]
