"""2D deployment geometry for the RIS sensing link.

Positions of the access point (AP), the RIS, the single-channel sensor and
the targets are converted into the distances, arrival angles and path-gain
scalars that parameterize the received-signal model.  Angles are stored in
radians internally and exposed in degrees, measured from the RIS broadside
direction with positive angles toward increasing element index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AngleOutOfRange, CoincidentNodes, DimensionMismatch


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass
class Scene:
    """Deployment layout plus the opaque gain constants of the link."""

    ap: Point2D
    ris: Point2D
    sensor: Point2D
    targets: list[Point2D]
    ris_normal_deg: float
    wavelength: float
    element_spacing: float
    num_elements: int
    scatter_coeffs: list[complex] = field(default_factory=list)
    direct_coeff: complex = 1.0 + 0j
    sensor_gain: complex = 1.0 + 0j

    def __post_init__(self):
        if not self.targets:
            raise ValueError("at least one target required")
        if not self.scatter_coeffs:
            self.scatter_coeffs = [1.0 + 0j] * len(self.targets)
        if len(self.scatter_coeffs) != len(self.targets):
            raise DimensionMismatch(
                "scatter_coeffs length %d != %d targets"
                % (len(self.scatter_coeffs), len(self.targets))
            )
        if self.num_elements < 2:
            raise ValueError("num_elements must be >= 2")
        if self.wavelength <= 0 or self.element_spacing <= 0:
            raise ValueError("wavelength and element_spacing must be positive")
        nodes = [self.ap, self.ris, self.sensor]
        for t in self.targets:
            for n in nodes:
                if t.distance_to(n) == 0.0:
                    raise CoincidentNodes("target coincides with AP/RIS/sensor")

    @property
    def k_targets(self) -> int:
        return len(self.targets)

    @property
    def spacing_over_lambda(self) -> float:
        return self.element_spacing / self.wavelength


@dataclass
class SceneDerived:
    """Distances, DOAs and path gains implied by a :class:`Scene`."""

    d_at: list[float]
    d_tr: list[float]
    d_rs: float
    d_ar: float
    theta_tr_deg: list[float]
    theta_ar_deg: float
    theta_rs_deg: float
    target_path_gain: list[complex]
    direct_path_gain: complex
    # carried along for downstream signal construction
    num_elements: int
    spacing_over_lambda: float

    @property
    def k_targets(self) -> int:
        return len(self.theta_tr_deg)


def _doa_from(ris: Point2D, normal_deg: float, p: Point2D) -> float:
    """Angle of p seen from the RIS, in degrees from broadside.

    Broadside is the unit vector at ``normal_deg``; the array axis is 90 deg
    counter-clockwise from it, so positive DOA points toward increasing
    element index.
    """
    phi = math.radians(normal_deg)
    dx, dy = p.x - ris.x, p.y - ris.y
    along = dx * math.cos(phi) + dy * math.sin(phi)
    across = -dx * math.sin(phi) + dy * math.cos(phi)
    if along <= 0.0:
        raise AngleOutOfRange(
            "node at (%g, %g) is behind the RIS (DOA outside (-90, 90))" % (p.x, p.y)
        )
    return math.degrees(math.atan2(across, along))


def derive_scene(scene: Scene) -> SceneDerived:
    """Compute distances, broadside-referenced DOAs and path gains.

    Raises CoincidentNodes if any required distance vanishes and
    AngleOutOfRange if a node sits outside the RIS front half-plane.
    """
    d_ar = scene.ap.distance_to(scene.ris)
    d_rs = scene.ris.distance_to(scene.sensor)
    if d_ar == 0.0 or d_rs == 0.0:
        raise CoincidentNodes("AP, RIS and sensor must be pairwise distinct")

    d_at, d_tr, theta_tr = [], [], []
    for t in scene.targets:
        dat = scene.ap.distance_to(t)
        dtr = t.distance_to(scene.ris)
        if dat == 0.0 or dtr == 0.0:
            raise CoincidentNodes("target coincides with AP or RIS")
        d_at.append(dat)
        d_tr.append(dtr)
        theta_tr.append(_doa_from(scene.ris, scene.ris_normal_deg, t))

    theta_ar = _doa_from(scene.ris, scene.ris_normal_deg, scene.ap)
    theta_rs = _doa_from(scene.ris, scene.ris_normal_deg, scene.sensor)

    gamma = complex(scene.sensor_gain)
    tpg = [
        gamma * complex(a) / (dat * dtr * d_rs)
        for a, dat, dtr in zip(scene.scatter_coeffs, d_at, d_tr)
    ]
    dpg = gamma * complex(scene.direct_coeff) / (d_ar * d_rs)

    return SceneDerived(
        d_at=d_at,
        d_tr=d_tr,
        d_rs=d_rs,
        d_ar=d_ar,
        theta_tr_deg=theta_tr,
        theta_ar_deg=theta_ar,
        theta_rs_deg=theta_rs,
        target_path_gain=tpg,
        direct_path_gain=dpg,
        num_elements=scene.num_elements,
        spacing_over_lambda=scene.spacing_over_lambda,
    )


def load_scene(path: str) -> Scene:
    """Load a scene from a JSON config file.

    Expected keys: ``ap``, ``ris``, ``sensor`` ([x, y] pairs), ``targets``
    (list of [x, y]), ``ris_normal_deg``, ``wavelength``,
    ``element_spacing_wavelengths``, ``num_elements`` and optional ``alpha``
    (list), ``beta``, ``gamma`` (scalars or [re, im] pairs).
    """
    with open(path) as f:
        cfg = json.load(f)
    return scene_from_dict(cfg)


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def scene_from_dict(cfg: dict) -> Scene:
    wavelength = float(cfg["wavelength"])
    spacing = float(cfg["element_spacing_wavelengths"]) * wavelength
    targets = [Point2D(float(x), float(y)) for x, y in cfg["targets"]]
    alpha = [_as_complex(a) for a in cfg.get("alpha", [1.0] * len(targets))]
    return Scene(
        ap=Point2D(*map(float, cfg["ap"])),
        ris=Point2D(*map(float, cfg["ris"])),
        sensor=Point2D(*map(float, cfg["sensor"])),
        targets=targets,
        ris_normal_deg=float(cfg["ris_normal_deg"]),
        wavelength=wavelength,
        element_spacing=spacing,
        num_elements=int(cfg["num_elements"]),
        scatter_coeffs=alpha,
        direct_coeff=_as_complex(cfg.get("beta", 1.0)),
        sensor_gain=_as_complex(cfg.get("gamma", 1.0)),
    )


# Nominal benchmark layout: RIS at the origin with broadside along +x, the
# sensor on broadside at 3 m, the AP at 5 m / -9.3878 deg, and three targets
# at 30 m.  The AP-to-target distances then follow from the geometry; the
# often-quoted nominal d_AT = 20 m cannot coexist with d_TR = 30 m and
# d_AR = 5 m in the plane (triangle inequality), so it is not enforced.
NOMINAL_DOAS_DEG = (-25.0, 15.0, 30.0)
NOMINAL_D_TR = 30.0
NOMINAL_D_RS = 3.0
NOMINAL_D_AR = 5.0
NOMINAL_THETA_AR_DEG = -9.3878
NOMINAL_NUM_ELEMENTS = 64
NOMINAL_NUM_MEASUREMENTS = 16


def nominal_scene(
    doas_deg=NOMINAL_DOAS_DEG,
    num_elements: int = NOMINAL_NUM_ELEMENTS,
    wavelength: float = 0.125,
    spacing_over_lambda: float = 0.5,
) -> Scene:
    """Build the nominal benchmark scene, optionally with perturbed DOAs."""
    ris = Point2D(0.0, 0.0)
    th_ar = math.radians(NOMINAL_THETA_AR_DEG)
    ap = Point2D(NOMINAL_D_AR * math.cos(th_ar), NOMINAL_D_AR * math.sin(th_ar))
    sensor = Point2D(NOMINAL_D_RS, 0.0)
    targets = [
        Point2D(
            NOMINAL_D_TR * math.cos(math.radians(th)),
            NOMINAL_D_TR * math.sin(math.radians(th)),
        )
        for th in doas_deg
    ]
    return Scene(
        ap=ap,
        ris=ris,
        sensor=sensor,
        targets=targets,
        ris_normal_deg=0.0,
        wavelength=wavelength,
        element_spacing=spacing_over_lambda * wavelength,
        num_elements=num_elements,
    )
