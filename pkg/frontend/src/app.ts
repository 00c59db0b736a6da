// Application wiring: one connection, a latest-wins frame store, two canvas
// projections with draggable handles, control buttons, and the instrument
// panels. Rendering runs at display rate; only the newest frame is drawn.

import { TeleopConnection, ConnectionStatus } from './connection';
import { FrameStore } from './frameStore';
import {
  HandleName,
  TargetState,
  applyDrag,
  applyKey,
  hitTest,
  standingTargets,
  targetMessage,
} from './handles';
import { buildControl, ErrorFrame, StateFrame } from './protocol';
import {
  Viewport,
  defaultViewport,
  drawDriftVector,
  drawGhost,
  drawGrid,
  drawRobot,
  followCamera,
  worldToCanvas,
} from './scene';
import {
  RewardHistory,
  drawDriftGauge,
  drawRoutingBars,
  drawSparkline,
} from './panels';

interface Elements {
  top: HTMLCanvasElement;
  side: HTMLCanvasElement;
  routing: HTMLCanvasElement;
  spark: HTMLCanvasElement;
  gauge: HTMLCanvasElement;
  banner: HTMLElement;
  modeBtn: HTMLButtonElement;
  cminSlider: HTMLInputElement;
  errorDialog: HTMLElement;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function startApp(wsUrl: string): void {
  const els: Elements = {
    top: byId('view-top'),
    side: byId('view-side'),
    routing: byId('routing'),
    spark: byId('spark'),
    gauge: byId('gauge'),
    banner: byId('banner'),
    modeBtn: byId('mode-btn'),
    cminSlider: byId('cmin'),
    errorDialog: byId('error-dialog'),
  };
  const store = new FrameStore();
  const rewards = new RewardHistory();
  let targets: TargetState = standingTargets();
  let mode: 'closed' | 'open' = 'closed';
  let status: ConnectionStatus = 'connecting';
  let fatal: ErrorFrame | null = null;

  const conn = new TeleopConnection(
    wsUrl,
    {
      onFrame: (frame) => {
        if (frame.type === 'error') {
          if (frame.code === 'version_mismatch' || frame.code === 'busy') {
            fatal = frame;
          }
          return;
        }
        store.put(frame, performance.now());
        rewards.push(frame.reward.total);
      },
      onStatus: (s) => {
        status = s;
      },
    },
    (url) => new WebSocket(url) as unknown as import('./connection').SocketLike
  );
  conn.connect();

  const viewports: Record<'top' | 'side', Viewport> = {
    top: defaultViewport('top', els.top.width, els.top.height),
    side: defaultViewport('side', els.side.width, els.side.height),
  };

  function sendTargets(): void {
    conn.send(targetMessage(targets, performance.now() / 1000));
  }

  function wireDrag(canvas: HTMLCanvasElement, view: 'top' | 'side'): void {
    let dragging: HandleName | null = null;
    const pos = (ev: MouseEvent): [number, number] => {
      const rect = canvas.getBoundingClientRect();
      return [ev.clientX - rect.left, ev.clientY - rect.top];
    };
    canvas.addEventListener('mousedown', (ev) => {
      const [x, y] = pos(ev);
      dragging = hitTest(viewports[view], targets, x, y);
    });
    canvas.addEventListener('mousemove', (ev) => {
      if (!dragging) return;
      const [x, y] = pos(ev);
      targets = applyDrag(viewports[view], targets, dragging, x, y);
      sendTargets();
    });
    const stop = () => {
      dragging = null;
    };
    canvas.addEventListener('mouseup', stop);
    canvas.addEventListener('mouseleave', stop);
  }
  wireDrag(els.top, 'top');
  wireDrag(els.side, 'side');

  window.addEventListener('keydown', (ev) => {
    const next = applyKey(targets, ev.key);
    if (next) {
      targets = next;
      sendTargets();
    }
  });

  els.modeBtn.addEventListener('click', () => {
    mode = mode === 'closed' ? 'open' : 'closed';
    els.modeBtn.textContent = `mode: ${mode}`;
    conn.send(buildControl({ mode }), false);
  });

  els.cminSlider.addEventListener('change', () => {
    const c_min = parseFloat(els.cminSlider.value);
    conn.send(buildControl({ drift: { c_min } }), false);
  });

  function render(): void {
    const now = performance.now();
    const frame = store.latest();
    if (fatal) {
      els.errorDialog.textContent = `${fatal.code}: ${fatal.message}`;
      els.errorDialog.style.display = 'block';
    }
    els.banner.textContent = store.isStale(now)
      ? `connection ${status} (stale ${Math.round(store.ageMs(now))} ms)`
      : `connected, t=${frame ? frame.t.toFixed(2) : '?'} s, mode ${frame?.mode}`;
    els.banner.className = store.isStale(now) ? 'banner stale' : 'banner live';
    if (frame) {
      viewports.top = followCamera(viewports.top, frame);
      viewports.side = followCamera(viewports.side, frame);
      for (const view of ['top', 'side'] as const) {
        const canvas = view === 'top' ? els.top : els.side;
        const ctx = canvas.getContext('2d');
        if (!ctx) continue;
        ctx.clearRect(0, 0, canvas.width, canvas.height);
        drawGrid(ctx, viewports[view]);
        drawGhost(ctx, viewports[view], frame);
        drawRobot(ctx, viewports[view], frame);
        drawDriftVector(ctx, viewports[view], frame);
        drawHandles(ctx, viewports[view]);
      }
      const rctx = els.routing.getContext('2d');
      if (rctx) drawRoutingBars(rctx, els.routing.width, els.routing.height,
                                frame.routing);
      const sctx = els.spark.getContext('2d');
      if (sctx) drawSparkline(sctx, els.spark.width, els.spark.height, rewards);
      const gctx = els.gauge.getContext('2d');
      if (gctx) drawDriftGauge(gctx, els.gauge.width, els.gauge.height, frame);
    }
    requestAnimationFrame(render);
  }

  function drawHandles(ctx: CanvasRenderingContext2D, vp: Viewport): void {
    const names: HandleName[] = ['head', 'wrist_l', 'wrist_r'];
    const positions = {
      head: targets.head,
      wrist_l: targets.wristL.pos,
      wrist_r: targets.wristR.pos,
    };
    for (const name of names) {
      const p = positions[name];
      const [x, y] = worldToCanvas(vp, p);
      ctx.strokeStyle = '#111827';
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(x, y, 10, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  requestAnimationFrame(render);
}
