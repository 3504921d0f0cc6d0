// Sequential request queue: one command in flight, a small buffer behind it.

export const MAX_BUFFER = 3;

/**
 * Runs async commands strictly one at a time. While a request is in
 * flight up to MAX_BUFFER further commands wait; anything beyond that
 * is dropped on the floor rather than queued, so a key held down
 * cannot build an unbounded backlog of stale moves.
 */
export class RequestQueue<T> {
  private buffer: T[] = [];
  private inFlight = false;
  private dropped = 0;

  constructor(
    private readonly send: (item: T) => Promise<void>,
    private readonly onError: (err: unknown) => void = () => undefined,
  ) {}

  /** Returns true when the command was accepted (in flight or buffered). */
  push(item: T): boolean {
    if (this.inFlight) {
      if (this.buffer.length >= MAX_BUFFER) {
        this.dropped += 1;
        return false;
      }
      this.buffer.push(item);
      return true;
    }
    this.inFlight = true;
    void this.run(item);
    return true;
  }

  private async run(item: T): Promise<void> {
    try {
      await this.send(item);
    } catch (err) {
      this.onError(err);
    } finally {
      const next = this.buffer.shift();
      if (next !== undefined) {
        void this.run(next);
      } else {
        this.inFlight = false;
      }
    }
  }

  get pending(): number {
    return this.buffer.length + (this.inFlight ? 1 : 0);
  }

  get droppedCount(): number {
    return this.dropped;
  }

  /** Discard buffered commands (the in-flight one still completes). */
  clear(): void {
    this.buffer.length = 0;
  }

  /** Resolves once everything accepted so far has been sent. */
  async drain(): Promise<void> {
    while (this.inFlight) {
      await new Promise((r) => setTimeout(r, 1));
    }
  }
}
