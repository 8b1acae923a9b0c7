"""Command line interface: record, verify, replay, and compare.

Exit codes: 0 success, 2 configuration or usage error, 3 verification
mismatch, 4 numeric fault during simulation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import harness, protocol
from .deck import DeckFile, DeckParseError, build_presentation, default_deck_text, parse_deck
from .harness import TraceError
from .physics import InvalidWorldError, SimulationFault

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISMATCH = 3
EXIT_FAULT = 4


def _load_deck(path: Optional[str]) -> DeckFile:
    if path is None:
        text = default_deck_text()
    else:
        text = Path(path).read_text("utf-8")
    return parse_deck(text)


def _parse_grid(text: str) -> list[Fraction]:
    body = text[2:] if text.startswith("h=") else text
    grid = []
    for token in body.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            grid.append(Fraction(token))
        except (ValueError, ZeroDivisionError):
            raise TraceError(f"bad step size {token!r} in grid") from None
    if not grid:
        raise TraceError("empty step-size grid")
    return grid


def _cmd_run(args: argparse.Namespace) -> int:
    deck = _load_deck(args.deck)
    with open(args.out, "w", encoding="utf-8") as out:
        harness.run_trace(deck, args.slide, args.ticks, out)
    print(f"wrote {args.ticks + 1} snapshots to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    deck = _load_deck(args.deck)
    trace_text = Path(args.trace).read_text("utf-8")
    mismatch = harness.verify_trace(trace_text, deck)
    if mismatch is None:
        print("trace verified: byte-identical", file=sys.stderr)
        return EXIT_OK
    print(f"trace diverges at tick {mismatch.tick}", file=sys.stderr)
    return EXIT_MISMATCH


def _cmd_compare(args: argparse.Namespace) -> int:
    rows = harness.compare_integrators(args.system, _parse_grid(args.grid))
    csv = harness.rows_to_csv(rows)
    if args.out in (None, "-"):
        sys.stdout.write(csv)
    else:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    """Re-drive a deck from a recorded command log and emit the trace, so
    an external player's recording can be checked against this engine."""
    deck = _load_deck(args.deck)
    p = build_presentation(deck)
    index = harness.resolve_slide(p, args.slide)
    from .presentation import navigate

    navigate(p, "goto", index)
    header = harness._header_for(deck, p, args.ticks)
    log = []
    if args.commands is not None:
        for line_no, line in enumerate(Path(args.commands).read_text("utf-8").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict) or "at_tick" not in obj or "command" not in obj:
                raise TraceError(f"command log line {line_no}: expected {{at_tick, command}}")
            cmd = protocol.decode_command(
                json.dumps(obj["command"], separators=(",", ":")).encode("utf-8")
            )
            log.append((int(obj["at_tick"]), cmd))
    snaps = protocol.replay_commands(p, log, args.ticks)
    with open(args.out, "w", encoding="utf-8") as out:
        out.write(header.encode())
        out.write("\n")
        for snap in snaps:
            out.write(protocol.encode_snapshot(snap).decode("utf-8"))
            out.write("\n")
    print(f"replayed {len(log)} commands over {args.ticks} ticks to {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softslides",
        description="Deterministic softbody slide engine: record, verify, and compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="record a trace of one slide")
    run.add_argument("--deck", help="deck file (default: the built-in deck)")
    run.add_argument("--slide", required=True, help="slide id or 0-based index")
    run.add_argument("--ticks", type=int, required=True, help="rendered ticks to record")
    run.add_argument("--out", required=True, help="trace file to write")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="re-run and byte-compare a recorded trace")
    verify.add_argument("--trace", required=True, help="trace file to verify")
    verify.add_argument("--deck", help="deck file (default: the built-in deck)")
    verify.set_defaults(func=_cmd_verify)

    compare = sub.add_parser("compare-integrators", help="error table on a solvable system")
    compare.add_argument("--system", default="oscillator", choices=sorted(harness.SYSTEMS))
    compare.add_argument("--grid", default="h=1/60,1/120,1/240", help="comma list of step sizes")
    compare.add_argument("--out", help="CSV path (default: stdout)")
    compare.set_defaults(func=_cmd_compare)

    replay = sub.add_parser("replay", help="re-drive a slide from a command log")
    replay.add_argument("--deck", help="deck file (default: the built-in deck)")
    replay.add_argument("--slide", required=True, help="slide id or 0-based index")
    replay.add_argument("--commands", help="JSON-lines command log ({at_tick, command})")
    replay.add_argument("--ticks", type=int, required=True, help="rendered ticks to replay")
    replay.add_argument("--out", required=True, help="trace file to write")
    replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "ticks", 0) is not None and getattr(args, "ticks", 0) < 0:
        print("error: --ticks must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except SimulationFault as err:
        print(f"error: numeric fault at tick {err.tick}, particle {err.particle}", file=sys.stderr)
        return EXIT_FAULT
    except (DeckParseError, TraceError, InvalidWorldError, protocol.ProtocolError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"error: {err.filename}: file not found", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
