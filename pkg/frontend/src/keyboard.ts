/** Keyboard layer: one key, one review action. Pure so it can be tested
 * without a DOM. */

export type Action =
  | "confirm"
  | "reject"
  | "next-segment"
  | "prev-segment"
  | "undo"
  | "next-image"
  | "prev-image"
  | "reload"
  | "export";

const KEY_ACTIONS: Record<string, Action> = {
  c: "confirm",
  x: "reject",
  j: "next-segment",
  ArrowDown: "next-segment",
  k: "prev-segment",
  ArrowUp: "prev-segment",
  u: "undo",
  n: "next-image",
  ArrowRight: "next-image",
  p: "prev-image",
  ArrowLeft: "prev-image",
  r: "reload",
  e: "export",
};

/** Map a KeyboardEvent-style key name to an action, or null for keys the
 * review UI does not own (so the browser keeps them). Modified keys are
 * never claimed. */
export function actionForKey(
  key: string,
  modifiers?: { ctrl?: boolean; alt?: boolean; meta?: boolean },
): Action | null {
  if (modifiers && (modifiers.ctrl || modifiers.alt || modifiers.meta)) {
    return null;
  }
  return KEY_ACTIONS[key] ?? null;
}

export const KEY_HELP: readonly [string, string][] = [
  ["c", "confirm segment"],
  ["x", "reject segment"],
  ["j / k", "next / previous segment"],
  ["u", "undo last decision"],
  ["n / p", "next / previous image"],
  ["r", "reload image (after a stale write)"],
  ["e", "export confirmed segments"],
];
