// Flight session state machine: idle -> flying -> submitted.

import { GatewayClient, HttpError } from './client.js';
import { Command, KeyBindings, DEFAULT_BINDINGS, keyToCommand } from './keymap.js';
import { RequestQueue } from './queue.js';
import {
  ActionName,
  GeoJsonFeatureCollection,
  Pose,
  StateSnapshot,
  SubmitResponse,
} from './types.js';

export type Phase = 'idle' | 'flying' | 'submitted';

export interface SessionView {
  phase: Phase;
  description: string;
  pose: Pose | null;       // last acknowledged observed pose
  stepCount: number;
  done: boolean;
  breadcrumb: Pose[];      // one entry per acknowledged step
  renderUrl: string | null;
  gsmUrl: string | null;
  result: SubmitResponse | null;
  resultNote: string | null;
}

type Listener = (view: SessionView) => void;

/**
 * Owns one flight from session creation to submission. All mutations
 * go through the gateway; the view only ever reflects acknowledged
 * server state, so the map marker cannot drift ahead of the server.
 */
export class UiSession {
  private phase: Phase = 'idle';
  private sessionId = '';
  private description = '';
  private state: StateSnapshot | null = null;
  private breadcrumb: Pose[] = [];
  private renderUrl: string | null = null;
  private gsmUrl: string | null = null;
  private result: SubmitResponse | null = null;
  private resultNote: string | null = null;
  private mapGeojson: GeoJsonFeatureCollection | null = null;
  private readonly queue: RequestQueue<Command>;
  private readonly listeners: Listener[] = [];
  private _lastError: unknown = null;

  constructor(
    private readonly client: GatewayClient,
    private readonly bindings: KeyBindings = DEFAULT_BINDINGS,
  ) {
    this.queue = new RequestQueue<Command>(
      (cmd) => this.dispatch(cmd),
      (err) => { this._lastError = err; },
    );
  }

  get lastError(): unknown {
    return this._lastError;
  }

  onChange(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    const v = this.view();
    for (const fn of this.listeners) fn(v);
  }

  view(): SessionView {
    return {
      phase: this.phase,
      description: this.description,
      pose: this.state ? this.state.pose : null,
      stepCount: this.state ? this.state.step_count : 0,
      done: this.state ? this.state.done : false,
      breadcrumb: [...this.breadcrumb],
      renderUrl: this.renderUrl,
      gsmUrl: this.gsmUrl,
      result: this.result,
      resultNote: this.resultNote,
    };
  }

  get map(): GeoJsonFeatureCollection | null {
    return this.mapGeojson;
  }

  async start(sceneId: string, episodeId = 'random'): Promise<void> {
    if (this.phase !== 'idle') {
      throw new Error('session already started; create a new UiSession');
    }
    const created = await this.client.createSession(sceneId, episodeId);
    this.sessionId = created.session_id;
    this.description = created.description;
    this.state = created.start_state;
    this.mapGeojson = await this.client.sceneMap(created.map_geojson_url);
    this.phase = 'flying';
    this.emit();
  }

  /**
   * Keyboard entry point. Returns true when the key produced a queued
   * command. Ignored outright when unbound, before takeoff, after the
   * flight is done, or once submitted: the submitted phase admits no
   * way back to flying.
   */
  handleKey(key: string): boolean {
    if (this.phase !== 'flying') return false;
    if (this.state && this.state.done) return false;
    const cmd = keyToCommand(key, this.bindings);
    if (cmd === null) return false;
    return this.queue.push(cmd);
  }

  private async dispatch(cmd: Command): Promise<void> {
    if (this.phase !== 'flying') return;
    try {
      if (cmd === 'rollback') {
        const res = await this.client.rollback(this.sessionId);
        this.state = res.state;
        this.breadcrumb.length = res.state.step_count;
        this.renderUrl = null;
        this.gsmUrl = null;
      } else {
        const res = await this.client.sendAction(this.sessionId, cmd as ActionName);
        this.state = res.state;
        this.breadcrumb.length = res.state.step_count - 1;
        this.breadcrumb.push(res.state.pose);
        this.renderUrl = this.client.renderUrl(res.render_urls.topdown);
        this.gsmUrl = this.client.renderUrl(res.gsm_url);
        if (res.done) this.queue.clear();  // buffered moves after a stop are moot
      }
    } catch (err) {
      if (err instanceof HttpError && err.status === 409) {
        // empty undo stack or a race with done; the view stays truthful
      } else {
        throw err;
      }
    }
    this.emit();
  }

  /** Wait until every accepted command has been acknowledged. */
  settle(): Promise<void> {
    return this.queue.drain();
  }

  async submit(): Promise<SubmitResponse | null> {
    if (this.phase !== 'flying') return this.result;
    await this.settle();
    try {
      this.result = await this.client.submit(this.sessionId);
      this.resultNote = this.result.success
        ? `Goal reached: ${this.result.distance_to_goal.toFixed(1)} m away`
        : `Stopped ${this.result.distance_to_goal.toFixed(1)} m from the goal`;
    } catch (err) {
      if (!(err instanceof HttpError) || err.status !== 409) throw err;
      this.resultNote = 'Already submitted';
    }
    this.phase = 'submitted';
    this.emit();
    return this.result;
  }

  get pendingRequests(): number {
    return this.queue.pending;
  }
}
