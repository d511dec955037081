"""Hexagonal-cell geometry and homogeneous spatial Poisson UE fields.

Cells are regular flat-top hexagons (horizontal top and bottom edges) of
circumradius ``cell_circumradius_m`` on a triangular BS grid; the region of
interest is the center cell plus ``ring_count`` full rings of neighbors
(ring_count = 1 gives the 7-cell flower). UE positions form an HSPPP over
the region: a Poisson-distributed count placed uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIN60 = math.sin(math.pi / 3.0)


def hexagon_area(r_out: float) -> float:
    """Area of a regular hexagon of circumradius ``r_out``."""
    return 1.5 * math.sqrt(3.0) * r_out * r_out


@dataclass(frozen=True)
class NetworkLayout:
    """Cell geometry and UE spatial density."""

    cell_circumradius_m: float
    ue_density: float = 1.1e-3
    ring_count: int = 1

    def __post_init__(self):
        if self.cell_circumradius_m <= 0:
            raise ValueError("cell_circumradius_m must be positive")
        if self.ue_density < 0:
            raise ValueError("ue_density must be nonnegative")
        if self.ring_count < 0:
            raise ValueError("ring_count must be nonnegative")

    @classmethod
    def from_inner_radius(cls, apothem_m: float, **kwargs) -> "NetworkLayout":
        """Build from the cell inner radius (apothem, center-to-edge)."""
        return cls(cell_circumradius_m=apothem_m / SIN60, **kwargs)

    @property
    def apothem_m(self) -> float:
        return self.cell_circumradius_m * SIN60

    @property
    def cell_centers(self) -> np.ndarray:
        """BS positions, sorted lexicographically by (x, y).

        The lexicographic order is the fixed cell ordering used to break
        membership ties on shared boundaries.
        """
        r_out = self.cell_circumradius_m
        a = self.apothem_m
        centers = []
        n = self.ring_count
        for q in range(-n, n + 1):
            for s in range(-n, n + 1):
                if abs(q + s) > n:
                    continue
                centers.append((1.5 * r_out * q, a * q + 2.0 * a * s))
        centers.sort()
        return np.array(centers, dtype=float)

    @property
    def central_cell_index(self) -> int:
        """Index of the (0, 0) cell within the sorted center list."""
        centers = self.cell_centers
        return int(np.argmin(np.hypot(centers[:, 0], centers[:, 1])))

    @property
    def roi_area_m2(self) -> float:
        """Total region area: the cells tile the plane, so it is exactly
        cell count times single-hexagon area."""
        return len(self.cell_centers) * hexagon_area(self.cell_circumradius_m)

    @property
    def bounding_box(self) -> tuple:
        """(xmin, xmax, ymin, ymax) of the region of interest."""
        centers = self.cell_centers
        r_out = self.cell_circumradius_m
        a = self.apothem_m
        return (
            centers[:, 0].min() - r_out,
            centers[:, 0].max() + r_out,
            centers[:, 1].min() - a,
            centers[:, 1].max() + a,
        )


@dataclass(frozen=True)
class UEField:
    """Immutable snapshot of UE positions within the region.

    ``cell_index`` maps each UE to its serving cell (first containing cell in
    the fixed lexicographic cell order, which settles boundary ties), and
    ``bs_distance_m`` is the distance to that cell's center.
    """

    positions: np.ndarray  # (n, 2) meters
    cell_index: np.ndarray  # (n,) int
    central_cell_mask: np.ndarray  # (n,) bool
    bs_distance_m: np.ndarray  # (n,) meters

    def __len__(self) -> int:
        return len(self.positions)


def points_in_hexagon(points: np.ndarray, center, r_out: float) -> np.ndarray:
    """Vectorized membership test for the closed flat-top hexagon."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dx = np.abs(pts[:, 0] - center[0])
    dy = np.abs(pts[:, 1] - center[1])
    a = r_out * SIN60
    return (dy <= a) & (math.sqrt(3.0) * dx + dy <= math.sqrt(3.0) * r_out)


def point_in_hexagon(point, center, r_out: float) -> bool:
    """True iff ``point`` lies in the closed flat-top hexagon of circumradius
    ``r_out`` centered at ``center``."""
    return bool(points_in_hexagon(np.asarray(point, dtype=float)[None, :], center, r_out)[0])


def assign_cells(points: np.ndarray, layout: NetworkLayout) -> np.ndarray:
    """Map each point to the first containing cell in the fixed cell order,
    or -1 when outside every cell."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.full(len(pts), -1, dtype=np.int64)
    for idx, center in enumerate(layout.cell_centers):
        unassigned = out < 0
        if not unassigned.any():
            break
        hit = points_in_hexagon(pts[unassigned], center, layout.cell_circumradius_m)
        out[np.flatnonzero(unassigned)[hit]] = idx
    return out


def generate_ue_field(layout: NetworkLayout, rng: np.random.Generator) -> UEField:
    """Draw one HSPPP realization of UE positions over the region.

    The count is Poisson(ue_density * region area); positions are uniform,
    obtained by rejection sampling from the bounding box.
    """
    n = int(rng.poisson(layout.ue_density * layout.roi_area_m2))
    xmin, xmax, ymin, ymax = layout.bounding_box
    accepted = []
    remaining = n
    while remaining > 0:
        batch = max(2 * remaining, 64)
        xs = rng.uniform(xmin, xmax, batch)
        ys = rng.uniform(ymin, ymax, batch)
        pts = np.column_stack([xs, ys])
        cells = assign_cells(pts, layout)
        pts = pts[cells >= 0][:remaining]
        accepted.append(pts)
        remaining -= len(pts)
    positions = (
        np.concatenate(accepted) if accepted else np.empty((0, 2), dtype=float)
    )
    cell_index = assign_cells(positions, layout)
    centers = layout.cell_centers
    delta = positions - centers[cell_index] if n else np.empty((0, 2))
    bs_distance = np.hypot(delta[:, 0], delta[:, 1]) if n else np.empty(0)
    return UEField(
        positions=positions,
        cell_index=cell_index,
        central_cell_mask=cell_index == layout.central_cell_index,
        bs_distance_m=bs_distance,
    )


def i2d_distance_pdf(r, layout: NetworkLayout):
    """PDF of the distance between a uniform point in one hexagonal cell and
    the cell center.

    With apothem a and cell area A: 2*pi*r/A on [0, a] (full circles fit in
    the hexagon), then (12*r/A) * (arcsin(a/r) - pi/3) on (a, r_out] as the
    circle of radius r pokes out through the six edges; zero beyond r_out.
    Integrates to 1.
    """
    r_out = layout.cell_circumradius_m
    a = layout.apothem_m
    area = hexagon_area(r_out)
    r = np.asarray(r, dtype=float)
    safe = np.clip(r, a, r_out)  # keeps the arcsin argument in (0, 1]
    corner = 12.0 * r / area * (np.arcsin(a / safe) - math.pi / 3.0)
    pdf = np.where(r <= a, 2.0 * math.pi * r / area, corner)
    pdf = np.where((r < 0.0) | (r > r_out), 0.0, pdf)
    return pdf if pdf.ndim else float(pdf)


def sample_in_hexagon(n: int, r_out: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the flat-top hexagon centered at the origin
    (rejection from the bounding box)."""
    a = r_out * SIN60
    out = []
    remaining = n
    while remaining > 0:
        batch = max(2 * remaining, 64)
        pts = np.column_stack(
            [rng.uniform(-r_out, r_out, batch), rng.uniform(-a, a, batch)]
        )
        pts = pts[points_in_hexagon(pts, (0.0, 0.0), r_out)][:remaining]
        out.append(pts)
        remaining -= len(pts)
    return np.concatenate(out) if out else np.empty((0, 2))
