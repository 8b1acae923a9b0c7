"""Layered softbody construction from a level-of-detail configuration.

Connectivity rules are fixed so particle and spring counts have closed
forms:

* 1D: a chain of n particles, n-1 structural springs.
* 2D: ``layers`` concentric rings of n particles (outer radius first),
  n structural springs per ring, and between adjacent rings n radial
  (same index) plus 2n shear (index i to i+-1) springs.
* 3D (planar realization): the 2D construction plus n/2 structural
  antipodal braces per ring, which stiffen the silhouette.

Rings are laid out starting at the top of the circle and mirrored exactly
across the vertical axis through the center, so built bodies are
bit-symmetric.  Every rest length equals the as-built endpoint distance:
bodies are born at equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .physics import Particle, SoftBody, Spring, SpringRole, Vec2


class InvalidConfigError(Exception):
    def __init__(self, fld: str, message: str):
        self.field = fld
        super().__init__(f"{fld}: {message}")


@dataclass
class LodConfig:
    dimensionality: int = 2
    layers: int = 2
    n: int = 12
    radius: float = 0.5
    layer_gap: float = 0.18
    spacing: float = 0.22
    particle_mass: float = 0.06
    k_structural: float = 70.0
    k_radial: float = 70.0
    k_shear: float = 35.0
    c_uniform: float = 1.5
    center: Vec2 = field(default_factory=Vec2)
    pin_ends: bool = False
    material: str = "elastic"


@dataclass(frozen=True)
class BodySpec:
    particle_count: int
    spring_count_by_role: dict[SpringRole, int]
    dimensionality: int
    layers: int

    @property
    def spring_count(self) -> int:
        return sum(self.spring_count_by_role.values())


def spec_of(body: SoftBody) -> BodySpec:
    counts = {role: 0 for role in SpringRole}
    for s in body.springs:
        counts[s.role] += 1
    return BodySpec(
        particle_count=len(body.particles),
        spring_count_by_role=counts,
        dimensionality=body.dimensionality,
        layers=body.layers,
    )


def _common_checks(cfg: LodConfig) -> None:
    if cfg.particle_mass <= 0:
        raise InvalidConfigError("particle_mass", "must be positive")
    if cfg.c_uniform < 0:
        raise InvalidConfigError("c_uniform", "must be non-negative")
    if cfg.k_structural <= 0:
        raise InvalidConfigError("k_structural", "must be positive")


def _ring_checks(cfg: LodConfig) -> None:
    _common_checks(cfg)
    if cfg.n < 3:
        raise InvalidConfigError("n", "ring resolution must be at least 3")
    if cfg.layers not in (2, 3):
        raise InvalidConfigError("layers", "must be 2 or 3")
    if cfg.k_radial <= 0:
        raise InvalidConfigError("k_radial", "must be positive")
    if cfg.k_shear <= 0:
        raise InvalidConfigError("k_shear", "must be positive")
    if not cfg.layer_gap > 0:
        raise InvalidConfigError("layer_gap", "must be positive")
    if not cfg.radius > cfg.layer_gap * (cfg.layers - 1):
        raise InvalidConfigError("radius", "must exceed layer_gap*(layers-1)")


def _ring_positions(cx: float, cy: float, radius: float, n: int) -> list[tuple[float, float]]:
    """n points on a circle, index 0 at the top, exactly mirror-symmetric
    in x about the center (paired indices i and n-i share |x - cx|)."""
    pts: list[tuple[float, float]] = [(cx, cy + radius)]
    half = [(radius * math.sin(2.0 * math.pi * i / n),
             radius * math.cos(2.0 * math.pi * i / n)) for i in range(1, (n + 1) // 2)]
    pts.extend((cx - sx, cy + sy) for sx, sy in half)
    if n % 2 == 0:
        pts.append((cx, cy - radius))
    pts.extend((cx + sx, cy + sy) for sx, sy in reversed(half))
    return pts


def _spring(particles: list[Particle], a: int, b: int, k: float, c: float,
            role: SpringRole) -> Spring:
    rest = math.dist(
        (particles[a].position.x, particles[a].position.y),
        (particles[b].position.x, particles[b].position.y),
    )
    return Spring(a=a, b=b, rest_length=rest, stiffness=k, damping=c, role=role)


def build_1d(cfg: LodConfig) -> SoftBody:
    """A horizontal chain of n particles at ``spacing`` intervals,
    centered on ``center``; ends pinned when ``pin_ends`` is set."""
    _common_checks(cfg)
    if cfg.n < 2:
        raise InvalidConfigError("n", "chain needs at least 2 particles")
    if not cfg.spacing > 0:
        raise InvalidConfigError("spacing", "must be positive")
    mid = (cfg.n - 1) / 2.0
    particles = [
        Particle(
            id=i,
            position=Vec2(cfg.center.x + (i - mid) * cfg.spacing, cfg.center.y),
            mass=cfg.particle_mass,
            pinned=cfg.pin_ends and i in (0, cfg.n - 1),
        )
        for i in range(cfg.n)
    ]
    springs = [
        _spring(particles, i, i + 1, cfg.k_structural, cfg.c_uniform, SpringRole.STRUCTURAL)
        for i in range(cfg.n - 1)
    ]
    return SoftBody(particles=particles, springs=springs, dimensionality=1,
                    layers=cfg.layers, material=cfg.material)


def _build_rings(cfg: LodConfig) -> tuple[list[Particle], list[Spring]]:
    n = cfg.n
    particles: list[Particle] = []
    for layer in range(cfg.layers):
        radius = cfg.radius - layer * cfg.layer_gap
        for x, y in _ring_positions(cfg.center.x, cfg.center.y, radius, n):
            particles.append(Particle(id=len(particles), position=Vec2(x, y),
                                      mass=cfg.particle_mass))
    springs: list[Spring] = []
    for layer in range(cfg.layers):
        base = layer * n
        springs.extend(
            _spring(particles, base + i, base + (i + 1) % n,
                    cfg.k_structural, cfg.c_uniform, SpringRole.STRUCTURAL)
            for i in range(n)
        )
    for layer in range(cfg.layers - 1):
        outer, inner = layer * n, (layer + 1) * n
        springs.extend(
            _spring(particles, outer + i, inner + i,
                    cfg.k_radial, cfg.c_uniform, SpringRole.RADIAL)
            for i in range(n)
        )
        for i in range(n):
            springs.append(_spring(particles, outer + i, inner + (i + 1) % n,
                                   cfg.k_shear, cfg.c_uniform, SpringRole.SHEAR))
            springs.append(_spring(particles, outer + i, inner + (i - 1) % n,
                                   cfg.k_shear, cfg.c_uniform, SpringRole.SHEAR))
    return particles, springs


def build_2d(cfg: LodConfig) -> SoftBody:
    """Concentric layered rings: layers*n particles and
    layers*n + (layers-1)*3n springs."""
    _ring_checks(cfg)
    particles, springs = _build_rings(cfg)
    return SoftBody(particles=particles, springs=springs, dimensionality=2,
                    layers=cfg.layers, material=cfg.material)


def build_3d(cfg: LodConfig) -> SoftBody:
    """The ring construction braced with n/2 antipodal structural springs
    per ring; reads as a volumetrically stiff sphere in the plane.
    Requires even n (antipodal pairs are undefined otherwise)."""
    _ring_checks(cfg)
    if cfg.n % 2 != 0:
        raise InvalidConfigError("n", "antipodal bracing needs an even ring resolution")
    particles, springs = _build_rings(cfg)
    half = cfg.n // 2
    for layer in range(cfg.layers):
        base = layer * cfg.n
        springs.extend(
            _spring(particles, base + i, base + i + half,
                    cfg.k_structural, cfg.c_uniform, SpringRole.STRUCTURAL)
            for i in range(half)
        )
    return SoftBody(particles=particles, springs=springs, dimensionality=3,
                    layers=cfg.layers, material=cfg.material)


def build(cfg: LodConfig) -> SoftBody:
    if cfg.dimensionality == 1:
        return build_1d(cfg)
    if cfg.dimensionality == 2:
        return build_2d(cfg)
    if cfg.dimensionality == 3:
        return build_3d(cfg)
    raise InvalidConfigError("dimensionality", "must be 1, 2, or 3")
