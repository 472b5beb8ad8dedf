"""
场景几何模块
"""

from dsat_precoding.scenario.geometry import (
    place_satellites,
    place_users,
    position_of,
    compute_angles,
    path_gain,
    build_geometry,
)

__all__ = [
    "place_satellites", "place_users", "position_of", "compute_angles", "path_gain",
    "build_geometry",
]
