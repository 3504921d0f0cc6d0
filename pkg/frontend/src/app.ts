// Browser bootstrap: wires the session state machine to the DOM.

import { GatewayClient } from './client.js';
import { loadConfig } from './config.js';
import { drawMap, Viewport } from './map.js';
import { UiSession, SessionView } from './session.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function main(): Promise<void> {
  const config = await loadConfig();
  const client = new GatewayClient(config.baseUrl);
  let session = new UiSession(client, config.bindings);

  const canvas = el<HTMLCanvasElement>('map');
  const ctx = canvas.getContext('2d');
  if (!ctx) throw new Error('canvas 2d context unavailable');
  const viewport: Viewport = {
    extent: [1000, 1000],
    width: canvas.width,
    height: canvas.height,
  };

  const descriptionBox = el<HTMLElement>('description');
  const renderImg = el<HTMLImageElement>('render');
  const statusBox = el<HTMLElement>('status');
  const dialog = el<HTMLElement>('result-dialog');
  const dialogText = el<HTMLElement>('result-text');
  const submitBtn = el<HTMLButtonElement>('submit');
  const nextBtn = el<HTMLButtonElement>('next-episode');

  function redraw(view: SessionView): void {
    descriptionBox.textContent = view.description;
    statusBox.textContent =
      `step ${view.stepCount}` +
      (view.pose ? `  alt ${view.pose.z.toFixed(0)} m  yaw ${view.pose.yaw}` : '');
    if (view.renderUrl) renderImg.src = view.renderUrl;
    drawMap(ctx!, viewport, session.map, view.breadcrumb, view.pose);
    submitBtn.disabled = view.phase !== 'flying';
    if (view.phase === 'submitted') {
      dialogText.textContent = view.resultNote ?? '';
      dialog.hidden = false;
    }
  }

  async function begin(): Promise<void> {
    dialog.hidden = true;
    session = new UiSession(client, config.bindings);
    session.onChange(redraw);
    await session.start(config.sceneId, config.episodeId);
    const fc = session.map;
    if (fc && fc.features.length > 0) {
      let mx = 0;
      let my = 0;
      for (const f of fc.features) {
        for (const ring of f.geometry.coordinates) {
          for (const [x, y] of ring) {
            mx = Math.max(mx, x);
            my = Math.max(my, y);
          }
        }
      }
      viewport.extent = [Math.max(mx, 100) * 1.1, Math.max(my, 100) * 1.1];
    }
    redraw(session.view());
  }

  document.addEventListener('keydown', (e) => {
    if (session.handleKey(e.key)) e.preventDefault();
  });
  submitBtn.addEventListener('click', () => void session.submit());
  nextBtn.addEventListener('click', () => void begin());

  await begin();
}

void main();
