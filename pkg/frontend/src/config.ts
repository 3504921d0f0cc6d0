// Runtime configuration loaded from a single config.json next to the app.

import { KeyBindings, mergeBindings } from './keymap.js';

export interface AppConfig {
  baseUrl: string;
  sceneId: string;
  episodeId: string;
  bindings: KeyBindings;
}

interface RawConfig {
  baseUrl?: string;
  sceneId?: string;
  episodeId?: string;
  bindings?: Record<string, string>;
}

export function parseConfig(raw: RawConfig): AppConfig {
  return {
    baseUrl: raw.baseUrl ?? '',
    sceneId: raw.sceneId ?? '',
    episodeId: raw.episodeId ?? 'random',
    bindings: mergeBindings(raw.bindings),
  };
}

export async function loadConfig(url = 'config.json'): Promise<AppConfig> {
  try {
    const res = await fetch(url);
    if (!res.ok) return parseConfig({});
    return parseConfig((await res.json()) as RawConfig);
  } catch {
    return parseConfig({});
  }
}
