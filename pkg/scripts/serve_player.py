#!/usr/bin/env python3
"""Serve a live presentation session to the browser player.

Each binary websocket message carries exactly one framed chunk (big-endian
u32 length covering tag plus payload, one tag byte, payload): the server
emits S frames
(one snapshot per tick) and E frames (command rejections); the client
sends C frames carrying canonical command JSON.

One session is active at a time; extra connections are turned away.  When
a session ends, --record writes its applied-command log as JSON lines
({"at_tick": N, "command": {...}}) and --trace writes the equivalent
trace file.  Both artifacts feed the offline tooling:

    softslides replay --slide 0 --ticks N --commands session.jsonl --out re.trace
    cmp re.trace session.trace

requires the optional server dependency:  pip install websockets
"""

import argparse
import asyncio
import dataclasses
import io
import json
import sys
from pathlib import Path

from softslides import harness, protocol
from softslides.cli import _load_deck
from softslides.deck import build_presentation
from softslides.presentation import navigate

TICK_TAG = protocol.TAG_SNAPSHOT


def _frame_of(message: bytes) -> tuple[bytes, bytes]:
    frame = protocol.read_frame(io.BytesIO(message))
    if frame is None:
        raise protocol.ProtocolError("empty websocket message")
    return frame


def _log_lines(session: protocol.Session) -> str:
    lines = []
    for at_tick, cmd in session.command_log:
        obj = json.loads(protocol.encode_command(cmd))
        lines.append(json.dumps({"at_tick": at_tick, "command": obj},
                                separators=(",", ":")))
    return "".join(line + "\n" for line in lines)


def _unique_path(base: str, serial: int) -> Path:
    if serial == 1:
        return Path(base)
    p = Path(base)
    return p.with_name(f"{p.stem}-{serial}{p.suffix}")


class Server:
    def __init__(self, args) -> None:
        self.args = args
        self.deck = _load_deck(args.deck)
        self.busy = False
        self.sessions = 0

    async def handle(self, ws) -> None:
        if self.busy:
            await ws.send(protocol.encode_frame(
                protocol.TAG_ERROR,
                protocol.encode_error("another session is active")))
            await ws.close()
            return
        self.busy = True
        self.sessions += 1
        serial = self.sessions
        try:
            await self.drive(ws, serial)
        finally:
            self.busy = False

    async def drive(self, ws, serial: int) -> None:
        p = build_presentation(self.deck)
        index = harness.resolve_slide(p, self.args.slide)
        navigate(p, "goto", index)
        # the header describes the starting slide, so pin it before any
        # command can navigate away
        header = harness._header_for(self.deck, p, 0)
        session = protocol.Session(p)
        snapshots = [protocol.encode_snapshot(session.snapshot())]
        await ws.send(protocol.encode_frame(TICK_TAG, snapshots[0]))

        inbox: asyncio.Queue = asyncio.Queue()

        async def reader():
            async for message in ws:
                await inbox.put(message)

        reader_task = asyncio.create_task(reader())
        interval = 1.0 / self.args.fps
        try:
            while self.args.ticks is None or session.tick_count < self.args.ticks:
                deadline = asyncio.get_event_loop().time() + interval
                while not inbox.empty():
                    message = inbox.get_nowait()
                    try:
                        tag, payload = _frame_of(bytes(message))
                        if tag != protocol.TAG_COMMAND:
                            raise protocol.ProtocolError(
                                f"unexpected frame tag {tag!r}")
                        error = session.apply(protocol.decode_command(payload))
                    except protocol.ProtocolError as err:
                        error = str(err)
                    if error is not None:
                        await ws.send(protocol.encode_frame(
                            protocol.TAG_ERROR, protocol.encode_error(error)))
                snap = protocol.encode_snapshot(session.tick())
                snapshots.append(snap)
                await ws.send(protocol.encode_frame(TICK_TAG, snap))
                if reader_task.done():
                    break
                pause = deadline - asyncio.get_event_loop().time()
                if pause > 0:
                    await asyncio.sleep(pause)
        finally:
            reader_task.cancel()
            self.save(session, header, snapshots, serial)

    def save(self, session, header, snapshots, serial: int) -> None:
        n = session.tick_count
        print(f"session {serial}: {n} ticks, "
              f"{len(session.command_log)} commands", file=sys.stderr)
        if self.args.record:
            path = _unique_path(self.args.record, serial)
            path.write_text(_log_lines(session), encoding="utf-8")
            print(f"  command log -> {path}", file=sys.stderr)
        if self.args.trace:
            path = _unique_path(self.args.trace, serial)
            full = dataclasses.replace(header, ticks=n)
            with open(path, "w", encoding="utf-8") as out:
                out.write(full.encode())
                out.write("\n")
                for snap in snapshots:
                    out.write(snap.decode("utf-8"))
                    out.write("\n")
            print(f"  trace -> {path}", file=sys.stderr)


async def amain(args) -> int:
    try:
        import websockets
    except ImportError:
        print("error: the server needs the websockets package "
              "(pip install websockets)", file=sys.stderr)
        return 2
    server = Server(args)
    async with websockets.serve(server.handle, args.host, args.port,
                                max_size=protocol.MAX_FRAME_BYTES + 16):
        print(f"serving deck on ws://{args.host}:{args.port}/ "
              f"(slide {args.slide}, {args.fps} fps)", file=sys.stderr)
        await asyncio.Future()
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deck", help="deck file (default: the shipped deck)")
    ap.add_argument("--slide", default="0", help="starting slide id or index")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    ap.add_argument("--fps", type=float, default=60.0)
    ap.add_argument("--ticks", type=int, default=None,
                    help="end each session after this many ticks")
    ap.add_argument("--record", help="write the command log here as JSON lines")
    ap.add_argument("--trace", help="write the session trace here")
    args = ap.parse_args(argv)
    try:
        return asyncio.run(amain(args))
    except KeyboardInterrupt:
        print("stopped", file=sys.stderr)
        return 0


if __name__ == "__main__":
    sys.exit(main())
