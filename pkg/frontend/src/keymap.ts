// Keyboard bindings: six flight actions plus rollback.

import { ActionName, ACTION_NAMES } from './types.js';

export type Command = ActionName | 'rollback';

export type KeyBindings = Record<string, Command>;

// Arrows steer, page keys change altitude, space stops, backspace undoes.
export const DEFAULT_BINDINGS: KeyBindings = {
  ArrowUp: 'move-forward',
  ArrowLeft: 'turn-left',
  ArrowRight: 'turn-right',
  PageUp: 'ascend',
  PageDown: 'descend',
  ' ': 'stop',
  Backspace: 'rollback',
};

const VALID_COMMANDS = new Set<string>([...ACTION_NAMES, 'rollback']);

/** Resolve a KeyboardEvent key name; unbound keys map to null. */
export function keyToCommand(key: string, bindings: KeyBindings = DEFAULT_BINDINGS): Command | null {
  return Object.prototype.hasOwnProperty.call(bindings, key) ? bindings[key] : null;
}

/**
 * Merge user overrides from config.json over the defaults.
 * Unknown command names are rejected so a typo cannot silently
 * disable a key.
 */
export function mergeBindings(overrides: Record<string, string> | undefined): KeyBindings {
  const out: KeyBindings = { ...DEFAULT_BINDINGS };
  if (!overrides) return out;
  for (const [key, cmd] of Object.entries(overrides)) {
    if (!VALID_COMMANDS.has(cmd)) {
      throw new Error(`unknown command in key bindings: ${cmd}`);
    }
    out[key] = cmd as Command;
  }
  return out;
}
