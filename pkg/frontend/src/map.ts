// Canvas 2D map: landmark polygons, breadcrumb trail, heading marker.
//
// World coordinates are meters with y growing north; the canvas grows
// downward, so the viewport transform flips y. Everything is drawn
// from the server's GeoJSON, no tile service involved.

import { GeoJsonFeatureCollection, Pose } from './types.js';

export interface Viewport {
  extent: [number, number];  // world width, height in meters
  width: number;             // canvas pixels
  height: number;
}

export const MARKER_SIZE_PX = 7;

export function worldToCanvas(v: Viewport, x: number, y: number): [number, number] {
  return [
    (x / v.extent[0]) * v.width,
    v.height - (y / v.extent[1]) * v.height,
  ];
}

/**
 * Triangle outline for the agent marker, nose pointing along yaw
 * (0 = east, counter-clockwise in world space). Returned in canvas
 * pixels, nose vertex first.
 */
export function markerTriangle(v: Viewport, pose: Pose, size = MARKER_SIZE_PX): [number, number][] {
  const [cx, cy] = worldToCanvas(v, pose.x, pose.y);
  const rad = (pose.yaw * Math.PI) / 180;
  // canvas y is flipped, so a world-ccw rotation is canvas-cw
  const nose: [number, number] = [cx + size * Math.cos(rad), cy - size * Math.sin(rad)];
  const left: [number, number] = [
    cx + size * 0.6 * Math.cos(rad + (2.5 * Math.PI) / 3),
    cy - size * 0.6 * Math.sin(rad + (2.5 * Math.PI) / 3),
  ];
  const right: [number, number] = [
    cx + size * 0.6 * Math.cos(rad - (2.5 * Math.PI) / 3),
    cy - size * 0.6 * Math.sin(rad - (2.5 * Math.PI) / 3),
  ];
  return [nose, left, right];
}

// The subset of CanvasRenderingContext2D the renderer touches; tests
// substitute a recording fake.
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

const LANDMARK_FILL = 'rgba(90, 140, 90, 0.35)';
const LANDMARK_STROKE = '#3a5a3a';
const BREADCRUMB_STROKE = '#2a6fd6';
const MARKER_FILL = '#d63a2a';

export function drawMap(
  ctx: Draw2D,
  v: Viewport,
  geojson: GeoJsonFeatureCollection | null,
  breadcrumb: Pose[],
  marker: Pose | null,
): void {
  ctx.clearRect(0, 0, v.width, v.height);

  if (geojson) {
    ctx.fillStyle = LANDMARK_FILL;
    ctx.strokeStyle = LANDMARK_STROKE;
    ctx.lineWidth = 1;
    for (const f of geojson.features) {
      for (const ring of f.geometry.coordinates) {
        ctx.beginPath();
        ring.forEach(([x, y], i) => {
          const [px, py] = worldToCanvas(v, x, y);
          if (i === 0) ctx.moveTo(px, py);
          else ctx.lineTo(px, py);
        });
        ctx.closePath();
        ctx.fill();
        ctx.stroke();
      }
    }
  }

  if (breadcrumb.length > 0) {
    ctx.strokeStyle = BREADCRUMB_STROKE;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    breadcrumb.forEach((p, i) => {
      const [px, py] = worldToCanvas(v, p.x, p.y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    // a dot per step keeps single-step trails visible
    ctx.fillStyle = BREADCRUMB_STROKE;
    for (const p of breadcrumb) {
      const [px, py] = worldToCanvas(v, p.x, p.y);
      ctx.beginPath();
      ctx.arc(px, py, 1.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  if (marker) {
    const tri = markerTriangle(v, marker);
    ctx.fillStyle = MARKER_FILL;
    ctx.beginPath();
    ctx.moveTo(tri[0][0], tri[0][1]);
    ctx.lineTo(tri[1][0], tri[1][1]);
    ctx.lineTo(tri[2][0], tri[2][1]);
    ctx.closePath();
    ctx.fill();
  }
}
