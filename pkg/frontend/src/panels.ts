// Instrument panels: per-layer routing-weight bars (one color per expert),
// a reward sparkline, and the drift gauge. All render from the latest frame.

import type { StateFrame } from './protocol';

export const EXPERT_COLORS = ['#3b82f6', '#f59e0b', '#10b981', '#ef4444',
                              '#8b5cf6', '#14b8a6', '#f472b6', '#737373'];

export class RewardHistory {
  values: number[] = [];

  constructor(private capacity = 300) {}

  push(total: number): void {
    this.values.push(total);
    if (this.values.length > this.capacity) this.values.shift();
  }
}

export function drawRoutingBars(ctx: CanvasRenderingContext2D, width: number,
                                height: number, routing: number[][]): void {
  ctx.clearRect(0, 0, width, height);
  const layers = routing.length;
  if (layers === 0) return;
  const rowH = height / layers;
  for (let l = 0; l < layers; l += 1) {
    const weights = routing[l];
    let x = 0;
    for (let e = 0; e < weights.length; e += 1) {
      const w = Math.max(0, weights[e]) * width;
      ctx.fillStyle = EXPERT_COLORS[e % EXPERT_COLORS.length];
      ctx.fillRect(x, l * rowH + 2, w, rowH - 4);
      x += w;
    }
    ctx.fillStyle = '#374151';
    ctx.font = '10px sans-serif';
    ctx.fillText(`L${l + 1}`, 2, l * rowH + rowH / 2 + 3);
  }
}

export function drawSparkline(ctx: CanvasRenderingContext2D, width: number,
                              height: number, history: RewardHistory): void {
  ctx.clearRect(0, 0, width, height);
  const vals = history.values;
  if (vals.length < 2) return;
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const span = hi - lo || 1;
  ctx.strokeStyle = '#3b82f6';
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  vals.forEach((v, i) => {
    const x = (i / (vals.length - 1)) * width;
    const y = height - ((v - lo) / span) * (height - 4) - 2;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

export function driftGaugeFraction(frame: StateFrame, fullScale = 0.5): number {
  return Math.min(frame.drift.mag / fullScale, 1.0);
}

export function drawDriftGauge(ctx: CanvasRenderingContext2D, width: number,
                               height: number, frame: StateFrame): void {
  ctx.clearRect(0, 0, width, height);
  const frac = driftGaugeFraction(frame);
  ctx.fillStyle = '#e5e7eb';
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = frac < 0.5 ? '#10b981' : frac < 0.8 ? '#f59e0b' : '#ef4444';
  ctx.fillRect(0, 0, width * frac, height);
  ctx.fillStyle = '#111827';
  ctx.font = '11px sans-serif';
  ctx.fillText(`drift ${frame.drift.mag.toFixed(3)} m`, 4, height - 4);
}
