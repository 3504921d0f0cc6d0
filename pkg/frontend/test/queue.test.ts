import { describe, expect, it } from 'vitest';

import { MAX_BUFFER, RequestQueue } from '../src/queue';

function gatedSender() {
  const sent: string[] = [];
  let release: (() => void) | null = null;
  const send = (item: string) =>
    new Promise<void>((resolve) => {
      release = () => {
        sent.push(item);
        resolve();
      };
    });
  return { sent, send, step: () => release && release() };
}

describe('request queue', () => {
  it('runs a lone command immediately', async () => {
    const sent: string[] = [];
    const q = new RequestQueue<string>(async (s) => { sent.push(s); });
    expect(q.push('a')).toBe(true);
    await q.drain();
    expect(sent).toEqual(['a']);
  });

  it('caps the backlog at one in flight plus three buffered', async () => {
    const g = gatedSender();
    const q = new RequestQueue<string>(g.send);
    const accepted = ['a', 'b', 'c', 'd', 'e'].map((k) => q.push(k));
    // 5 rapid presses: 1 in flight, MAX_BUFFER buffered, the rest dropped
    expect(accepted).toEqual([true, true, true, true, false]);
    expect(q.pending).toBe(1 + MAX_BUFFER);
    expect(q.droppedCount).toBe(1);
    for (let i = 0; i < 4; i++) {
      g.step();
      await Promise.resolve();
      await Promise.resolve();
    }
    await q.drain();
    expect(g.sent).toEqual(['a', 'b', 'c', 'd']);
  });

  it('preserves command order', async () => {
    const sent: string[] = [];
    const q = new RequestQueue<string>(async (s) => {
      await new Promise((r) => setTimeout(r, 1));
      sent.push(s);
    });
    q.push('first');
    q.push('second');
    q.push('third');
    await q.drain();
    expect(sent).toEqual(['first', 'second', 'third']);
  });

  it('keeps accepting once the backlog clears', async () => {
    const g = gatedSender();
    const q = new RequestQueue<string>(g.send);
    for (const k of ['a', 'b', 'c', 'd', 'e']) q.push(k);
    for (let i = 0; i < 4; i++) {
      g.step();
      await Promise.resolve();
      await Promise.resolve();
    }
    await q.drain();
    expect(q.push('f')).toBe(true);
    g.step();
    await q.drain();
    expect(g.sent).toEqual(['a', 'b', 'c', 'd', 'f']);
  });

  it('clear drops buffered commands but not the in-flight one', async () => {
    const g = gatedSender();
    const q = new RequestQueue<string>(g.send);
    q.push('a');
    q.push('b');
    q.push('c');
    q.clear();
    g.step();
    await q.drain();
    expect(g.sent).toEqual(['a']);
  });

  it('releases the in-flight slot when the sender rejects', async () => {
    let calls = 0;
    const q = new RequestQueue<string>(async () => {
      calls += 1;
      throw new Error('boom');
    });
    q.push('a');
    await q.drain().catch(() => undefined);
    await new Promise((r) => setTimeout(r, 5));
    expect(q.pending).toBe(0);
    expect(calls).toBe(1);
  });
});
