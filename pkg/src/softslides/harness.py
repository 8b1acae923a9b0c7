"""Deterministic trace recording, verification, and integrator comparison.

A trace file is line-oriented: the first line is a JSON header naming the
deck hash, slide, tick count, and simulation parameters; every following
line is one canonical frame snapshot.  Because stepping is deterministic
and the snapshot encoding is canonical, re-running the same deck slice
must reproduce the file byte for byte.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, TextIO

from . import protocol
from .deck import DeckFile, build_presentation, deck_hash
from .integrators import IntegratorKind
from .physics import (
    Particle,
    SimParams,
    SimulationFault,
    SoftBody,
    Spring,
    SpringRole,
    Vec2,
    ViewBox,
    World,
    step,
)
from .presentation import Presentation, navigate
from .protocol import FrameSnapshot, Session

TRACE_FORMAT = "softslides-trace-1"


class TraceError(Exception):
    pass


@dataclass
class TraceHeader:
    deck_hash: str
    slide_index: int
    slide_id: str
    ticks: int
    integrator: Optional[str]
    substeps: int
    h: float
    gravity: list[float]
    restitution: float

    def encode(self) -> str:
        obj = {
            "format": TRACE_FORMAT,
            "deck_hash": self.deck_hash,
            "slide": self.slide_index,
            "slide_id": self.slide_id,
            "ticks": self.ticks,
            "integrator": self.integrator,
            "substeps": self.substeps,
            "h": self.h,
            "gravity": self.gravity,
            "restitution": self.restitution,
        }
        return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _header_for(deck: DeckFile, p: Presentation, ticks: int) -> TraceHeader:
    slide = p.slides[p.current]
    scene = p.scene
    params = scene.world.params if scene is not None else SimParams()
    return TraceHeader(
        deck_hash=deck_hash(deck),
        slide_index=p.current,
        slide_id=slide.id,
        ticks=ticks,
        integrator=scene.integrator.value if scene is not None else None,
        substeps=scene.substeps_per_tick if scene is not None else 0,
        h=params.h,
        gravity=[params.gravity.x, params.gravity.y],
        restitution=params.restitution,
    )


def resolve_slide(p: Presentation, selector: str) -> int:
    """A slide selector is either a slide id or a 0-based index."""
    for i, slide in enumerate(p.slides):
        if slide.id == selector:
            return i
    try:
        index = int(selector)
    except ValueError:
        raise TraceError(f"no slide with id {selector!r}") from None
    if not 0 <= index < len(p.slides):
        raise TraceError(f"slide index {index} out of range (deck has {len(p.slides)} slides)")
    return index


def _trace_lines(deck: DeckFile, slide: str, ticks: int) -> Iterator[str]:
    """Header line, then ticks+1 snapshot lines (tick 0 included).  A
    numeric fault ends the stream by raising after what was written."""
    p = build_presentation(deck)
    index = resolve_slide(p, slide)
    navigate(p, "goto", index)
    yield _header_for(deck, p, ticks).encode()
    session = Session(p)
    yield protocol.encode_snapshot(session.snapshot()).decode("utf-8")
    for _ in range(ticks):
        snap = session.tick()
        fault = session.fault()
        if fault is not None:
            raise SimulationFault(tick=fault[0], particle=fault[1])
        yield protocol.encode_snapshot(snap).decode("utf-8")


def run_trace(deck: DeckFile, slide: str, ticks: int, out: TextIO) -> int:
    """Record a trace to a text stream.  Returns the number of snapshot
    lines written."""
    if ticks < 0:
        raise TraceError("tick count must be non-negative")
    count = -1  # first line is the header
    for line in _trace_lines(deck, slide, ticks):
        out.write(line)
        out.write("\n")
        count += 1
    return count


@dataclass
class TraceMismatch:
    tick: int
    expected: str
    found: str


def verify_trace(trace_text: str, deck: DeckFile) -> Optional[TraceMismatch]:
    """Re-run the deck slice named by the trace header and byte-compare.
    Returns None when identical, otherwise the first divergent record
    (a header mismatch reports tick 0)."""
    lines = trace_text.splitlines()
    if not lines:
        raise TraceError("trace file is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as err:
        raise TraceError(f"trace header is not valid JSON: {err.msg}") from None
    if not isinstance(header, dict) or header.get("format") != TRACE_FORMAT:
        raise TraceError("trace header has the wrong format marker")
    for key in ("deck_hash", "slide", "ticks"):
        if key not in header:
            raise TraceError(f"trace header is missing {key!r}")
    ticks = header["ticks"]
    if not isinstance(ticks, int) or ticks < 0:
        raise TraceError("trace header has an invalid tick count")
    expected = list(_reference_lines(deck, header, ticks))
    for i, want in enumerate(expected):
        found = lines[i] if i < len(lines) else ""
        if found != want:
            return TraceMismatch(tick=max(0, i - 1), expected=want, found=found)
    if len(lines) > len(expected):
        return TraceMismatch(tick=ticks, expected="", found=lines[len(expected)])
    return None


def _reference_lines(deck: DeckFile, header: dict, ticks: int) -> Iterator[str]:
    p = build_presentation(deck)
    slide = header.get("slide")
    if not isinstance(slide, int) or not 0 <= slide < len(p.slides):
        # A header naming a slide the deck does not have can never match;
        # the divergence is at the header record.
        yield _header_for(deck, p, ticks).encode()
        return
    yield from _trace_lines(deck, str(slide), ticks)


# ---------------------------------------------------------------------------
# Integrator comparison on analytically solvable systems

@dataclass
class ComparisonRow:
    integrator: str
    h: float
    max_error: float
    wall_s_per_10k_steps: float
    deriv_evals: int


def _huge_box() -> ViewBox:
    return ViewBox(min=Vec2(-1e9, -1e9), max=Vec2(1e9, 1e9))


def oscillator_world(h: float) -> tuple[World, Callable[[float], float], Callable[[World], float]]:
    """Unit oscillator: a unit mass on a zero-rest-length unit-stiffness
    spring anchored at the origin, no damping, no gravity.  The free
    particle starts at (1, 0) at rest, so x(t) = cos(t) exactly."""
    body = SoftBody(
        particles=[
            Particle(id=0, position=Vec2(0.0, 0.0), pinned=True),
            Particle(id=1, position=Vec2(1.0, 0.0), mass=1.0),
        ],
        springs=[Spring(a=0, b=1, rest_length=0.0, stiffness=1.0, damping=0.0, role=SpringRole.STRUCTURAL)],
        dimensionality=1,
        layers=2,
    )
    params = SimParams(gravity=Vec2(0.0, 0.0), h=h, restitution=0.0)
    world = World(bodies=[body], params=params, box=_huge_box())
    return world, math.cos, lambda w: w.bodies[0].particles[1].position.x


def freefall_world(h: float) -> tuple[World, Callable[[float], float], Callable[[World], float]]:
    """Two unlinked unit masses in uniform gravity, dropped from rest at
    the origin: y(t) = -g t^2 / 2 exactly."""
    g = 9.81
    body = SoftBody(
        particles=[
            Particle(id=0, position=Vec2(0.0, 0.0), mass=1.0),
            Particle(id=1, position=Vec2(0.5, 0.0), mass=1.0),
        ],
        springs=[],
        dimensionality=1,
        layers=2,
    )
    params = SimParams(gravity=Vec2(0.0, -g), h=h, restitution=0.0)
    world = World(bodies=[body], params=params, box=_huge_box())
    return world, lambda t: -0.5 * g * t * t, lambda w: w.bodies[0].particles[0].position.y


SYSTEMS = {"oscillator": oscillator_world, "freefall": freefall_world}


def compare_integrators(
    system: str,
    hs: list[Fraction],
    t_end: Fraction = Fraction(2),
    kinds: Optional[list[IntegratorKind]] = None,
) -> list[ComparisonRow]:
    """Step each integrator over [0, t_end] at each step size and report
    the worst position error against the closed-form solution, wall time
    normalized to 10k steps, and the exact derivative evaluation count."""
    if system not in SYSTEMS:
        raise TraceError(f"unknown system {system!r} (expected one of {sorted(SYSTEMS)})")
    make = SYSTEMS[system]
    rows: list[ComparisonRow] = []
    for kind in kinds or list(IntegratorKind):
        for h in hs:
            if h <= 0:
                raise TraceError("step size must be positive")
            steps = t_end / h
            if steps.denominator != 1:
                raise TraceError(f"step size {h} does not divide the interval {t_end}")
            n_steps = steps.numerator
            world, exact, probe = make(float(h))
            evals_before = world.diagnostics.force_evals
            max_err = abs(probe(world) - exact(0.0))
            t0 = time.perf_counter()
            for i in range(1, n_steps + 1):
                step(world, kind)
                err = abs(probe(world) - exact(float(h * i)))
                if err > max_err:
                    max_err = err
            elapsed = time.perf_counter() - t0
            rows.append(
                ComparisonRow(
                    integrator=kind.value,
                    h=float(h),
                    max_error=max_err,
                    wall_s_per_10k_steps=elapsed / n_steps * 1e4,
                    deriv_evals=world.diagnostics.force_evals - evals_before,
                )
            )
    return rows


CSV_HEADER = "integrator,h,max_position_error_m,wall_s_per_10k_steps,deriv_evals"


def rows_to_csv(rows: list[ComparisonRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.integrator},{r.h!r},{r.max_error!r},{r.wall_s_per_10k_steps:.6f},{r.deriv_evals}"
        )
    return "\n".join(lines) + "\n"


def convergence_ratios(rows: list[ComparisonRow]) -> dict[str, list[float]]:
    """error(h) / error(h/2) for successive step-size halvings, per
    integrator, in the order the step sizes were given."""
    by_kind: dict[str, list[ComparisonRow]] = {}
    for r in rows:
        by_kind.setdefault(r.integrator, []).append(r)
    out: dict[str, list[float]] = {}
    for kind, items in by_kind.items():
        items = sorted(items, key=lambda r: -r.h)
        ratios = []
        for a, b in zip(items, items[1:]):
            if not math.isclose(a.h, 2 * b.h, rel_tol=1e-12):
                raise TraceError("convergence ratios need step sizes that halve")
            ratios.append(a.max_error / b.max_error)
        out[kind] = ratios
    return out
