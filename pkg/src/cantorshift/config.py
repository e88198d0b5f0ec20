"""Run configuration and map-file parsing.

Map configuration is a JSON document:

    {
      "coefficients": [["-6", "0"], ["0", "0"], ["1", "0"]],
      "disk_center": ["0", "0"],
      "disk_radius": "4",
      "horizon": 20
    }

Coefficients are [real, imaginary] decimal strings in ascending powers,
monic leading coefficient required.  ``disk_radius`` may be "auto", which
selects the escape radius of the polynomial.  Budget overrides can come
from the environment: CANTORSHIFT_MAX_BOXES and CANTORSHIFT_MAX_RESOLUTION.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .maps import DomainDisk, PolynomialMap, escape_radius
from .tree import ResolutionPolicy

ENV_MAX_BOXES = "CANTORSHIFT_MAX_BOXES"
ENV_MAX_RESOLUTION = "CANTORSHIFT_MAX_RESOLUTION"


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs besides the map itself."""

    map_path: str
    depth: int = 6
    horizon: int = 20
    out_dir: str = "out"
    color_by: str = "level"
    image_size: int = 800
    max_boxes: int = 1_000_000
    max_resolution: int = 16

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.max_boxes <= 0 or self.max_resolution <= 0 or self.image_size <= 0:
            raise ValueError("budgets must be positive")

    def policy(self) -> ResolutionPolicy:
        return ResolutionPolicy(max_boxes=self.max_boxes,
                                max_resolution=self.max_resolution,
                                validation_horizon=self.horizon)


def env_budget_overrides():
    """(max_boxes, max_resolution) overrides from the environment, if set."""
    boxes = os.environ.get(ENV_MAX_BOXES)
    res = os.environ.get(ENV_MAX_RESOLUTION)
    return (int(boxes) if boxes else None, int(res) if res else None)


def load_map_config(path: str):
    """Read a map configuration file.

    Returns (PolynomialMap, DomainDisk, horizon, shrink) where ``shrink``
    is the optional radius factor (exact decimal in (0, 1), or None) to
    apply once when the domain boundary touches the preimage closure.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        coeffs = data["coefficients"]
    except KeyError as exc:
        raise ValueError(f"{path}: missing 'coefficients'") from exc
    pmap = PolynomialMap(coeffs)
    center = data.get("disk_center", ["0", "0"])
    radius = data.get("disk_radius", "auto")
    if radius == "auto":
        disk = DomainDisk(center, escape_radius(pmap))
    else:
        disk = DomainDisk(center, radius)
    horizon = int(data.get("horizon", 20))
    if horizon <= 0:
        raise ValueError(f"{path}: horizon must be positive")
    shrink = data.get("shrink_on_contact")
    if shrink is not None:
        from .maps import parse_exact
        shrink = parse_exact(shrink)
        if not 0 < shrink < 1:
            raise ValueError(f"{path}: shrink_on_contact must be in (0, 1)")
    return pmap, disk, horizon, shrink
