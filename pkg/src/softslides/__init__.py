"""Deterministic mass-spring softbody simulation wired into a slide
presentation engine, with a canonical snapshot protocol for renderers."""

from .bodies import BodySpec, InvalidConfigError, LodConfig, build, spec_of
from .deck import (
    DeckFile,
    DeckParseError,
    build_presentation,
    deck_hash,
    default_deck,
    default_deck_text,
    load_deck,
    parse_deck,
    serialize_deck,
)
from .integrators import HalfStepCarry, IntegratorKind, NumericFault, step_state
from .physics import (
    DragHandle,
    InvalidWorldError,
    Particle,
    SimParams,
    SimulationFault,
    SoftBody,
    Spring,
    SpringRole,
    Vec2,
    ViewBox,
    World,
    accumulate_forces,
    all_positions,
    begin_drag,
    end_drag,
    resolve_viewbox_collision,
    step,
    update_drag,
    validate_world,
)
from .presentation import (
    Anchor,
    BuildError,
    InputEvent,
    KeyEvent,
    NavigationError,
    ParamError,
    PointerDownEvent,
    PointerMoveEvent,
    PointerUpEvent,
    Presentation,
    PresentationBuilder,
    SimScene,
    Slide,
    TickEvent,
    Tidget,
    apply_param,
    dispatch,
    navigate,
    reset_scene,
)
from .protocol import (
    Command,
    FrameSnapshot,
    ProtocolError,
    Session,
    capture,
    decode_command,
    decode_snapshot,
    encode_command,
    encode_snapshot,
)

__version__ = "0.1.0"
