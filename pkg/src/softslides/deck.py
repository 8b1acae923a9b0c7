"""Deck files: a strict line-oriented slide description format.

A deck is the persisted form of a presentation.  The grammar is small:

    slide <id> <text|sim>
    title: <text>
    bullet: <text>
    integrator: <euler|midpoint|feynman|rk4>
    body: <1d|2d|3d> key=value ...

Blank lines and lines starting with '#' are ignored.  Parsing is strict:
unknown directives, unknown body keys, malformed values, and entries
outside a slide are all errors that name the line they occur on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

from . import bodies
from .bodies import InvalidConfigError, LodConfig
from .integrators import IntegratorKind
from .physics import SimParams, Vec2, ViewBox, World, validate_world
from .presentation import (
    Presentation,
    PresentationBuilder,
    SimScene,
    Slide,
    Tidget,
)

KIND_TEXT = "text"
KIND_SIM = "sim"

Scalar = Union[float, int, bool, str]


class DeckParseError(Exception):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class BodyDecl:
    dims: int
    overrides: dict[str, Scalar] = field(default_factory=dict)


@dataclass
class SlideDecl:
    id: str
    kind: str
    title: str = ""
    bullets: list[str] = field(default_factory=list)
    bodies: list[BodyDecl] = field(default_factory=list)
    integrator: Optional[str] = None


@dataclass
class DeckFile:
    slides: list[SlideDecl] = field(default_factory=list)


# body keys -> (LodConfig attribute, value parser)
_BODY_KEYS = {
    "layers": ("layers", int),
    "n": ("n", int),
    "radius": ("radius", float),
    "layer_gap": ("layer_gap", float),
    "spacing": ("spacing", float),
    "mass": ("particle_mass", float),
    "k_structural": ("k_structural", float),
    "k_radial": ("k_radial", float),
    "k_shear": ("k_shear", float),
    "damping": ("c_uniform", float),
    "cx": (None, float),
    "cy": (None, float),
    "pin_ends": ("pin_ends", None),
    "material": ("material", str),
}

_INTEGRATOR_NAMES = {k.value for k in IntegratorKind}


def _parse_scalar(line_no: int, key: str, raw: str) -> Scalar:
    _, kind = _BODY_KEYS[key]
    if key == "pin_ends":
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise DeckParseError(line_no, f"body key {key!r}: expected true or false, got {raw!r}")
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            raise DeckParseError(line_no, f"body key {key!r}: expected an integer, got {raw!r}") from None
    if kind is float:
        try:
            value = float(raw)
        except ValueError:
            raise DeckParseError(line_no, f"body key {key!r}: expected a number, got {raw!r}") from None
        if value != value or value in (float("inf"), float("-inf")):
            raise DeckParseError(line_no, f"body key {key!r}: value must be finite")
        return value
    return raw


def _parse_body(line_no: int, rest: str) -> BodyDecl:
    parts = rest.split()
    if not parts:
        raise DeckParseError(line_no, "body entry needs a dimensionality (1d, 2d, or 3d)")
    dim_token = parts[0]
    if dim_token not in ("1d", "2d", "3d"):
        raise DeckParseError(line_no, f"unknown body dimensionality {dim_token!r} (expected 1d, 2d, or 3d)")
    decl = BodyDecl(dims=int(dim_token[0]))
    for item in parts[1:]:
        if "=" not in item:
            raise DeckParseError(line_no, f"body option {item!r} is not key=value")
        key, raw = item.split("=", 1)
        if key not in _BODY_KEYS:
            raise DeckParseError(line_no, f"unknown body key {key!r}")
        if key in decl.overrides:
            raise DeckParseError(line_no, f"body key {key!r} given twice")
        decl.overrides[key] = _parse_scalar(line_no, key, raw)
    return decl


def parse_deck(text: str) -> DeckFile:
    deck = DeckFile()
    current: Optional[SlideDecl] = None
    seen_ids: set[str] = set()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("slide "):
            parts = line.split()
            if len(parts) != 3:
                raise DeckParseError(line_no, "slide header must be: slide <id> <text|sim>")
            _, slide_id, kind = parts
            if kind not in (KIND_TEXT, KIND_SIM):
                raise DeckParseError(line_no, f"unknown slide kind {kind!r} (expected text or sim)")
            if slide_id in seen_ids:
                raise DeckParseError(line_no, f"duplicate slide id {slide_id!r}")
            seen_ids.add(slide_id)
            current = SlideDecl(id=slide_id, kind=kind)
            deck.slides.append(current)
            continue
        if ":" not in line:
            raise DeckParseError(line_no, f"unrecognized line: {line!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if current is None:
            raise DeckParseError(line_no, f"{key!r} entry before any slide header")
        if key == "title":
            if current.title:
                raise DeckParseError(line_no, f"slide {current.id!r} already has a title")
            current.title = rest
        elif key == "bullet":
            current.bullets.append(rest)
        elif key == "integrator":
            if current.kind != KIND_SIM:
                raise DeckParseError(line_no, "integrator entry only applies to sim slides")
            if rest not in _INTEGRATOR_NAMES:
                raise DeckParseError(
                    line_no,
                    f"unknown integrator {rest!r} (expected one of {sorted(_INTEGRATOR_NAMES)})",
                )
            if current.integrator is not None:
                raise DeckParseError(line_no, f"slide {current.id!r} already has an integrator")
            current.integrator = rest
        elif key == "body":
            if current.kind != KIND_SIM:
                raise DeckParseError(line_no, "body entry only applies to sim slides")
            current.bodies.append(_parse_body(line_no, rest))
        else:
            raise DeckParseError(line_no, f"unknown entry key {key!r}")
    if not deck.slides:
        raise DeckParseError(1, "deck has no slides")
    for decl in deck.slides:
        if decl.kind == KIND_SIM and not decl.bodies:
            raise DeckParseError(1, f"sim slide {decl.id!r} declares no bodies")
    return deck


def _format_scalar(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_deck(deck: DeckFile) -> str:
    """Canonical text for a deck: fixed entry order, shortest round-trip
    floats, one blank line between slides.  parse(serialize(d)) == d."""
    chunks: list[str] = []
    for decl in deck.slides:
        lines = [f"slide {decl.id} {decl.kind}"]
        if decl.title:
            lines.append(f"title: {decl.title}")
        for bullet in decl.bullets:
            lines.append(f"bullet: {bullet}")
        if decl.integrator is not None:
            lines.append(f"integrator: {decl.integrator}")
        for body in decl.bodies:
            opts = "".join(
                f" {key}={_format_scalar(body.overrides[key])}"
                for key in _BODY_KEYS
                if key in body.overrides
            )
            lines.append(f"body: {body.dims}d{opts}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def deck_hash(deck: DeckFile) -> str:
    """Content hash of the canonical serialization."""
    return hashlib.sha256(serialize_deck(deck).encode("utf-8")).hexdigest()


def _config_from_decl(decl: BodyDecl) -> LodConfig:
    kwargs = {"dimensionality": decl.dims}
    cx = cy = 0.0
    for key, value in decl.overrides.items():
        attr, _ = _BODY_KEYS[key]
        if key == "cx":
            cx = float(value)
        elif key == "cy":
            cy = float(value)
        else:
            assert attr is not None
            kwargs[attr] = value
    kwargs["center"] = Vec2(cx, cy)
    return LodConfig(**kwargs)


def build_presentation(deck: DeckFile) -> Presentation:
    """Turn a parsed deck into a live presentation.  Body configuration
    errors surface as deck parse errors naming the slide."""
    builder = PresentationBuilder()
    for decl in deck.slides:
        tidgets = [Tidget(lines=list(decl.bullets))] if decl.bullets else []
        scene = None
        if decl.kind == KIND_SIM:
            world_bodies = []
            for body_decl in decl.bodies:
                try:
                    world_bodies.append(bodies.build(_config_from_decl(body_decl)))
                except InvalidConfigError as err:
                    raise DeckParseError(
                        1, f"slide {decl.id!r}: invalid body ({err})"
                    ) from err
            world = World(bodies=world_bodies, params=SimParams(), box=ViewBox())
            validate_world(world)
            kind = IntegratorKind(decl.integrator) if decl.integrator else IntegratorKind.EXPLICIT_EULER
            scene = SimScene(world=world, integrator=kind)
        builder.add_slide(Slide(id=decl.id, title=decl.title, tidgets=tidgets, scene=scene))
    return builder.finish()


def load_deck(text: str) -> Presentation:
    return build_presentation(parse_deck(text))


def default_deck_text() -> str:
    """The deck shipped with the package: a complete working lecture."""
    return resources.files("softslides.data").joinpath("default.deck").read_text("utf-8")


def default_deck() -> DeckFile:
    return parse_deck(default_deck_text())
