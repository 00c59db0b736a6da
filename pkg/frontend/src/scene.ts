// Two synchronized 2D projections of the scene: top-down (x right, y up on
// the canvas maps to world x forward, y left) for locomotion, and a side
// elevation (world x vs z) for height and squatting. Pure math here; canvas
// drawing stays in thin render functions so the transforms are testable.

import type { StateFrame, Vec3 } from './protocol';

export type ViewKind = 'top' | 'side';

export interface Viewport {
  kind: ViewKind;
  width: number;
  height: number;
  scale: number;     // px per meter
  centerX: number;   // world coords at the canvas center
  centerY: number;   // world y (top view) or z (side view)
}

export function defaultViewport(kind: ViewKind, width: number, height: number): Viewport {
  return {
    kind,
    width,
    height,
    scale: kind === 'top' ? 60 : 120,
    centerX: 0,
    centerY: kind === 'top' ? 0 : 0.9,
  };
}

export function worldToCanvas(vp: Viewport, p: Vec3): [number, number] {
  const u = vp.kind === 'top' ? p[0] : p[0];
  const v = vp.kind === 'top' ? p[1] : p[2];
  const x = vp.width / 2 + (u - vp.centerX) * vp.scale;
  const y = vp.height / 2 - (v - vp.centerY) * vp.scale;
  return [x, y];
}

export function canvasToWorld(vp: Viewport, x: number, y: number): [number, number] {
  const u = (x - vp.width / 2) / vp.scale + vp.centerX;
  const v = -(y - vp.height / 2) / vp.scale + vp.centerY;
  return [u, v];
}

/** Keep the robot inside the middle of the top view by panning. */
export function followCamera(vp: Viewport, frame: StateFrame): Viewport {
  if (vp.kind !== 'top') {
    return { ...vp, centerX: frame.robot.root[0] };
  }
  return { ...vp, centerX: frame.robot.root[0], centerY: frame.robot.root[1] };
}

export interface SceneColors {
  robot: string;
  ghost: string;
  drift: string;
  contact: string;
  grid: string;
}

export const COLORS: SceneColors = {
  robot: '#3b82f6',
  ghost: '#9ca3af',
  drift: '#ef4444',
  contact: '#10b981',
  grid: '#e5e7eb',
};

export function drawGrid(ctx: CanvasRenderingContext2D, vp: Viewport): void {
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const metersAcross = vp.width / vp.scale;
  const start = Math.floor(vp.centerX - metersAcross / 2);
  for (let m = start; m <= vp.centerX + metersAcross / 2 + 1; m += 1) {
    const [x] = worldToCanvas(vp, [m, 0, 0]);
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, vp.height);
    ctx.stroke();
  }
  if (vp.kind === 'side') {
    const [, floorY] = worldToCanvas(vp, [0, 0, 0]);
    ctx.strokeStyle = '#6b7280';
    ctx.beginPath();
    ctx.moveTo(0, floorY);
    ctx.lineTo(vp.width, floorY);
    ctx.stroke();
  }
}

function dot(ctx: CanvasRenderingContext2D, vp: Viewport, p: Vec3, r: number,
             color: string): void {
  const [x, y] = worldToCanvas(vp, p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function line(ctx: CanvasRenderingContext2D, vp: Viewport, a: Vec3, b: Vec3,
              color: string, width = 2): void {
  const [x0, y0] = worldToCanvas(vp, a);
  const [x1, y1] = worldToCanvas(vp, b);
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
}

export function drawRobot(ctx: CanvasRenderingContext2D, vp: Viewport,
                          frame: StateFrame): void {
  const r = frame.robot;
  line(ctx, vp, r.root, r.head, COLORS.robot, 3);
  line(ctx, vp, r.head, r.elbow_l, COLORS.robot);
  line(ctx, vp, r.elbow_l, r.wrist_l.pos, COLORS.robot);
  line(ctx, vp, r.head, r.elbow_r, COLORS.robot);
  line(ctx, vp, r.elbow_r, r.wrist_r.pos, COLORS.robot);
  dot(ctx, vp, r.head, 6, COLORS.robot);
  dot(ctx, vp, r.wrist_l.pos, 4, COLORS.robot);
  dot(ctx, vp, r.wrist_r.pos, 4, COLORS.robot);
  if (vp.kind === 'top') {
    // heading tick
    const tip: Vec3 = [
      r.root[0] + 0.3 * Math.cos(r.yaw),
      r.root[1] + 0.3 * Math.sin(r.yaw),
      r.root[2],
    ];
    line(ctx, vp, r.root, tip, COLORS.contact, 2);
  }
}

export function drawGhost(ctx: CanvasRenderingContext2D, vp: Viewport,
                          frame: StateFrame): void {
  const g = frame.ghost;
  dot(ctx, vp, g.head, 6, COLORS.ghost);
  dot(ctx, vp, g.wrist_l, 4, COLORS.ghost);
  dot(ctx, vp, g.wrist_r, 4, COLORS.ghost);
  line(ctx, vp, g.head, g.wrist_l, COLORS.ghost, 1);
  line(ctx, vp, g.head, g.wrist_r, COLORS.ghost, 1);
}

export function drawDriftVector(ctx: CanvasRenderingContext2D, vp: Viewport,
                                frame: StateFrame): void {
  if (vp.kind !== 'top') return;
  const r = frame.robot.root;
  const tip: Vec3 = [r[0] + frame.drift.vec[0], r[1] + frame.drift.vec[1], r[2]];
  line(ctx, vp, r, tip, COLORS.drift, 2);
}
