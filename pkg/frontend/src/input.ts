/**
 * Browser input to protocol commands.
 *
 * Keyboard events map onto the engine's key codes (the engine owns the
 * bindings; this layer only translates browser key names). Pointer events
 * carry world coordinates obtained through the view transform.
 */

import { Command } from "./protocol.js";
import { ViewTransform } from "./view.js";

/** Browser KeyboardEvent.key values to engine key codes. */
const KEY_ALIASES: Record<string, string> = {
  " ": "Space",
  ArrowRight: "PageDown",
  ArrowDown: "PageDown",
  ArrowLeft: "PageUp",
  ArrowUp: "PageUp",
  Spacebar: "Space",
};

/** Keys the engine reacts to, sent as-is. */
const DIRECT_KEYS = new Set([
  "Space",
  "PageDown",
  "PageUp",
  "Home",
  "End",
  "t",
  "b",
  "r",
  "p",
  "1",
  "2",
  "3",
  "4",
]);

export function keyToCommand(browserKey: string): Command | null {
  const code = KEY_ALIASES[browserKey] ?? browserKey;
  if (!DIRECT_KEYS.has(code)) {
    return null;
  }
  return { cmd: "key", code };
}

export function pointerDown(
  vt: ViewTransform,
  px: number,
  py: number,
): Command {
  const [x, y] = vt.toWorld(px, py);
  return { cmd: "pointer_down", x, y };
}

export function pointerMove(
  vt: ViewTransform,
  px: number,
  py: number,
): Command {
  const [x, y] = vt.toWorld(px, py);
  return { cmd: "pointer_move", x, y };
}

export function pointerUp(): Command {
  return { cmd: "pointer_up" };
}
