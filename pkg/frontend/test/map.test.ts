import { describe, expect, it } from 'vitest';

import { GatewayClient } from '../src/client';
import { drawMap, Draw2D, markerTriangle, Viewport, worldToCanvas } from '../src/map';
import { UiSession } from '../src/session';
import { Pose } from '../src/types';
import { MockGateway } from './mockGateway';

const VIEW: Viewport = { extent: [600, 600], width: 300, height: 300 };

function pose(x: number, y: number, yaw = 0): Pose {
  return { x, y, z: 120, pitch: -45, yaw };
}

class RecordingCtx implements Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern = '';
  strokeStyle: string | CanvasGradient | CanvasPattern = '';
  lineWidth = 0;
  calls: [string, ...number[]][] = [];
  clearRect(x: number, y: number, w: number, h: number) { this.calls.push(['clearRect', x, y, w, h]); }
  beginPath() { this.calls.push(['beginPath']); }
  moveTo(x: number, y: number) { this.calls.push(['moveTo', x, y]); }
  lineTo(x: number, y: number) { this.calls.push(['lineTo', x, y]); }
  closePath() { this.calls.push(['closePath']); }
  fill() { this.calls.push(['fill']); }
  stroke() { this.calls.push(['stroke']); }
  arc(x: number, y: number, r: number) { this.calls.push(['arc', x, y, r]); }

  of(kind: string): [string, ...number[]][] {
    return this.calls.filter(([k]) => k === kind);
  }
}

describe('viewport transform', () => {
  it('maps world corners to canvas corners with y flipped', () => {
    expect(worldToCanvas(VIEW, 0, 0)).toEqual([0, 300]);
    expect(worldToCanvas(VIEW, 600, 600)).toEqual([300, 0]);
    expect(worldToCanvas(VIEW, 300, 300)).toEqual([150, 150]);
  });
});

describe('heading marker', () => {
  it('points east at yaw 0', () => {
    const [nose] = markerTriangle(VIEW, pose(300, 300, 0));
    expect(nose[0]).toBeGreaterThan(150);
    expect(nose[1]).toBeCloseTo(150, 6);
  });

  it('points up the canvas at yaw 90 (north)', () => {
    const [nose] = markerTriangle(VIEW, pose(300, 300, 90));
    expect(nose[0]).toBeCloseTo(150, 6);
    expect(nose[1]).toBeLessThan(150);
  });

  it('rotates 30 degrees per turn quantum', () => {
    const a = markerTriangle(VIEW, pose(300, 300, 0))[0];
    const b = markerTriangle(VIEW, pose(300, 300, 30))[0];
    const angA = Math.atan2(150 - a[1], a[0] - 150);
    const angB = Math.atan2(150 - b[1], b[0] - 150);
    expect(((angB - angA) * 180) / Math.PI).toBeCloseTo(30, 6);
  });
});

describe('draw pass', () => {
  const geojson = {
    type: 'FeatureCollection' as const,
    features: [{
      type: 'Feature' as const,
      geometry: {
        type: 'Polygon' as const,
        coordinates: [[[200, 280], [400, 280], [400, 320], [200, 320], [200, 280]]],
      },
      properties: { name: 'Sidney Street' },
    }],
  };

  it('clears, then draws landmark rings, breadcrumb, and marker', () => {
    const ctx = new RecordingCtx();
    const trail = [pose(300, 435), pose(300, 430)];
    drawMap(ctx, VIEW, geojson, trail, pose(300, 430, 270));
    expect(ctx.calls[0][0]).toBe('clearRect');
    // 5 ring vertices + 2 trail vertices + 3 marker vertices
    const vertices = ctx.of('moveTo').length + ctx.of('lineTo').length;
    expect(vertices).toBe(5 + 2 + 3);
    expect(ctx.of('arc').length).toBe(2);  // one dot per breadcrumb step
  });

  it('breadcrumb vertex count always equals the trail length', () => {
    for (const n of [0, 1, 4, 9]) {
      const ctx = new RecordingCtx();
      const trail = Array.from({ length: n }, (_, i) => pose(300, 440 - 5 * i));
      drawMap(ctx, VIEW, null, trail, null);
      const vertices = ctx.of('moveTo').length + ctx.of('lineTo').length;
      expect(vertices).toBe(n);
      expect(ctx.of('arc').length).toBe(n);
    }
  });

  it('marker sits at the last acknowledged pose of a live session', async () => {
    const gateway = new MockGateway();
    const session = new UiSession(new GatewayClient('http://mock', gateway.fetch));
    await session.start('fixture');
    session.handleKey('ArrowUp');
    session.handleKey('ArrowUp');
    await session.settle();

    const v = session.view();
    const ctx = new RecordingCtx();
    drawMap(ctx, VIEW, session.map, v.breadcrumb, v.pose);
    const serverPose = gateway.session('mock-1').pose;
    const [mx, my] = worldToCanvas(VIEW, serverPose.x, serverPose.y);
    const tri = markerTriangle(VIEW, v.pose!);
    const cx = (tri[0][0] + tri[1][0] + tri[2][0]) / 3;
    const cy = (tri[0][1] + tri[1][1] + tri[2][1]) / 3;
    // triangle centroid is a fraction of the marker size from its anchor
    expect(Math.hypot(cx - mx, cy - my)).toBeLessThan(3);
    // and the anchor is exactly the acknowledged pose
    expect(v.pose).toEqual(serverPose);
  });
});
