"""Metric/pixel geometry: boxes, camera projection, disparity, IoU kernels.

Camera frame follows the KITTI convention: x right, y down, z forward.
Box3D positions refer to the 3D geometric center of the cuboid (file I/O
converts from/to KITTI's bottom-center convention at the boundary).
"""

import math
from dataclasses import dataclass, field

import numpy as np


class BehindCamera(ValueError):
    """Raised when projecting a box with any corner at z <= 0."""


class NonPositiveDisparity(ValueError):
    pass


class NonPositiveDepth(ValueError):
    pass


def wrap_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned pixel rectangle, origin top-left, corner form."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        vals = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("Box2D coordinates must be finite: %r" % (vals,))
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError("Box2D requires x2 > x1 and y2 > y1: %r" % (vals,))

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def cx(self) -> float:
        return 0.5 * (self.x1 + self.x2)

    @property
    def cy(self) -> float:
        return 0.5 * (self.y1 + self.y2)

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2], dtype=np.float64)


@dataclass(frozen=True)
class Box3D:
    """Metric cuboid in camera coordinates.

    (x, y, z) is the geometric center in meters; (w, h, l) are the extents
    along camera z, y, x (before yaw); ry is the yaw about the camera
    y-axis; alpha is the observation angle. If alpha is omitted it is
    derived from the identity alpha = ry - atan2(x, z).
    """

    x: float
    y: float
    z: float
    w: float
    h: float
    l: float
    ry: float
    alpha: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (self.z > 0):
            raise ValueError("Box3D requires z > 0, got z=%r" % (self.z,))
        if not (self.w > 0 and self.h > 0 and self.l > 0):
            raise ValueError(
                "Box3D requires positive extents, got %r" % ((self.w, self.h, self.l),)
            )
        object.__setattr__(self, "ry", wrap_angle(self.ry))
        if self.alpha is None:
            object.__setattr__(
                self, "alpha", wrap_angle(self.ry - math.atan2(self.x, self.z))
            )

    @property
    def volume(self) -> float:
        return self.w * self.h * self.l

    def corners(self) -> np.ndarray:
        """8 corners (8, 3) in camera coordinates.

        Local extents are l along x, h along y, w along z, rotated by ry
        about the y-axis and translated to the center.
        """
        dx = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=np.float64) * (self.l / 2)
        dy = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=np.float64) * (self.h / 2)
        dz = np.array([1, -1, -1, 1, 1, -1, -1, 1], dtype=np.float64) * (self.w / 2)
        c, s = math.cos(self.ry), math.sin(self.ry)
        x = c * dx + s * dz + self.x
        z = -s * dx + c * dz + self.z
        y = dy + self.y
        return np.stack([x, y, z], axis=1)

    def footprint(self) -> np.ndarray:
        """4 corners (4, 2) of the yaw-rotated footprint in the x-z plane."""
        dx = np.array([1, 1, -1, -1], dtype=np.float64) * (self.l / 2)
        dz = np.array([1, -1, -1, 1], dtype=np.float64) * (self.w / 2)
        c, s = math.cos(self.ry), math.sin(self.ry)
        return np.stack([c * dx + s * dz + self.x, -s * dx + c * dz + self.z], axis=1)


@dataclass(frozen=True)
class CameraRig:
    """Rectified stereo intrinsics plus baseline (left camera is reference)."""

    fx: float
    fy: float
    cx: float
    cy: float
    baseline: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0 and self.baseline > 0):
            raise ValueError("fx, fy, baseline must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


# ---------------------------------------------------------------------------
# IoU kernels
# ---------------------------------------------------------------------------

def iou_2d(a: Box2D, b: Box2D) -> float:
    """Axis-aligned IoU of two pixel rectangles, in [0, 1]."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def iou_2d_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise axis-aligned IoU between (M, 4) and (N, 4) corner-form boxes."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ix = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    iy = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(inter > 0, inter / union, 0.0)


def _ccw(poly: np.ndarray) -> np.ndarray:
    """Orient a convex polygon counter-clockwise (shoelace sign)."""
    x, y = poly[:, 0], poly[:, 1]
    signed = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
    return poly if signed >= 0 else poly[::-1]


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a simple polygon given as (N, 2) vertices."""
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def clip_convex(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a convex polygon.

    Points exactly on a clip edge count as inside. Returns (M, 2) vertices,
    possibly empty.
    """
    clipper = _ccw(np.asarray(clipper, dtype=np.float64))
    output = list(np.asarray(subject, dtype=np.float64))
    n = len(clipper)
    for i in range(n):
        if len(output) < 3:
            return np.zeros((0, 2))
        a, b = clipper[i], clipper[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        inp = output
        output = []
        # cross(b-a, p-a) >= 0 means p lies inside (left of) a CCW edge;
        # boundary points count as inside
        dists = [ex * (p[1] - a[1]) - ey * (p[0] - a[0]) for p in inp]
        for j, p in enumerate(inp):
            q = inp[(j + 1) % len(inp)]
            dp, dq = dists[j], dists[(j + 1) % len(inp)]
            if dp >= 0:
                output.append(p)
            if (dp > 0 > dq) or (dp < 0 < dq):
                t = dp / (dp - dq)
                output.append(p + t * (q - p))
    return np.array(output) if len(output) >= 3 else np.zeros((0, 2))


def iou_bev(a: Box3D, b: Box3D) -> float:
    """Rotated-rectangle IoU of the two footprints in the x-z ground plane."""
    fa, fb = a.footprint(), b.footprint()
    inter = polygon_area(clip_convex(fa, fb))
    area_a = a.w * a.l
    area_b = b.w * b.l
    union = area_a + area_b - inter
    if union <= 0:
        return 0.0
    return float(min(max(inter / union, 0.0), 1.0))


def bev_intersection_area(a: Box3D, b: Box3D) -> float:
    return polygon_area(clip_convex(a.footprint(), b.footprint()))


def iou_3d(a: Box3D, b: Box3D) -> float:
    """Volumetric IoU: BEV intersection times vertical overlap over the union."""
    inter_area = bev_intersection_area(a, b)
    if inter_area <= 0:
        return 0.0
    # y is down; the vertical interval of a box is [y - h/2, y + h/2]
    overlap = min(a.y + a.h / 2, b.y + b.h / 2) - max(a.y - a.h / 2, b.y - b.h / 2)
    if overlap <= 0:
        return 0.0
    inter = inter_area * overlap
    union = a.volume + b.volume - inter
    return float(min(max(inter / union, 0.0), 1.0))


# ---------------------------------------------------------------------------
# Projection and stereo relations
# ---------------------------------------------------------------------------

def project_points(pts: np.ndarray, rig: CameraRig) -> np.ndarray:
    """Pinhole-project (N, 3) camera-frame points to (N, 2) pixels."""
    pts = np.asarray(pts, dtype=np.float64)
    u = rig.fx * pts[:, 0] / pts[:, 2] + rig.cx
    v = rig.fy * pts[:, 1] / pts[:, 2] + rig.cy
    return np.stack([u, v], axis=1)


def project_box(b: Box3D, rig: CameraRig, view: str = "left") -> Box2D:
    """Axis-aligned hull of the 8 projected corners, clipped to the image.

    The right view shifts x by -baseline before projection. Raises
    BehindCamera if any corner has z <= 0.
    """
    if view not in ("left", "right"):
        raise ValueError("view must be 'left' or 'right'")
    corners = b.corners()
    if np.any(corners[:, 2] <= 0):
        raise BehindCamera("box corner behind camera (z <= 0)")
    if view == "right":
        corners = corners.copy()
        corners[:, 0] -= rig.baseline
    uv = project_points(corners, rig)
    x1 = max(float(uv[:, 0].min()), 0.0)
    y1 = max(float(uv[:, 1].min()), 0.0)
    x2 = min(float(uv[:, 0].max()), float(rig.width))
    y2 = min(float(uv[:, 1].max()), float(rig.height))
    return Box2D(x1, y1, x2, y2)


def depth_from_disparity(d: float, rig: CameraRig) -> float:
    """z = fx * baseline / d, for d > 0 pixels."""
    if not d > 0:
        raise NonPositiveDisparity("disparity must be > 0, got %r" % (d,))
    return rig.fx * rig.baseline / d


def disparity_from_depth(z: float, rig: CameraRig) -> float:
    """d = fx * baseline / z, for z > 0 meters."""
    if not z > 0:
        raise NonPositiveDepth("depth must be > 0, got %r" % (z,))
    return rig.fx * rig.baseline / z
