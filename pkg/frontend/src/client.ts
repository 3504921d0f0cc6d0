// Thin REST client for the flight gateway.

import {
  ActionName,
  ActionResponse,
  CreateSessionResponse,
  GeoJsonFeatureCollection,
  RollbackResponse,
  SubmitResponse,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class HttpError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const data = await res.json();
        if (data && typeof data.detail === 'string') detail = data.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new HttpError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(sceneId: string, episodeId = 'random'): Promise<CreateSessionResponse> {
    return this.request('POST', '/sessions', { scene_id: sceneId, episode_id: episodeId });
  }

  sendAction(sessionId: string, action: ActionName): Promise<ActionResponse> {
    return this.request('POST', `/sessions/${sessionId}/action`, { action });
  }

  rollback(sessionId: string): Promise<RollbackResponse> {
    return this.request('POST', `/sessions/${sessionId}/rollback`);
  }

  submit(sessionId: string): Promise<SubmitResponse> {
    return this.request('POST', `/sessions/${sessionId}/submit`);
  }

  sceneMap(url: string): Promise<GeoJsonFeatureCollection> {
    return this.request('GET', url);
  }

  renderUrl(path: string): string {
    return this.baseUrl + path;
  }
}
