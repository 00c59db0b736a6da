// Operator target state: three draggable handles (head + both wrists) in
// either projection, keyboard planar steering, and client-side envelope
// clamping. Pure state transitions; DOM wiring lives in app.ts.

import type { Pose6d, TargetMessage, Vec3 } from './protocol';
import { buildTarget } from './protocol';
import type { Viewport } from './scene';
import { canvasToWorld, worldToCanvas } from './scene';

export type HandleName = 'head' | 'wrist_l' | 'wrist_r';

export interface TargetState {
  head: Vec3;
  wristL: Pose6d;
  wristR: Pose6d;
}

export const HEAD_Z_RANGE: [number, number] = [0.55, 1.28];
export const WRIST_REACH = 0.65; // m from the head, matching the server clamp
export const HANDLE_RADIUS_PX = 12;
export const KEY_STEP = 0.04;    // m per keyboard tick

export function standingTargets(): TargetState {
  return {
    head: [0, 0, 1.2],
    wristL: { pos: [0, 0.18, 0.78], quat: [1, 0, 0, 0] },
    wristR: { pos: [0, -0.18, 0.78], quat: [1, 0, 0, 0] },
  };
}

export interface ClampReport {
  clamped: boolean;
}

export function clampTargets(t: TargetState, report?: ClampReport): TargetState {
  const out: TargetState = {
    head: [...t.head] as Vec3,
    wristL: { pos: [...t.wristL.pos] as Vec3, quat: [...t.wristL.quat] as Pose6d['quat'] },
    wristR: { pos: [...t.wristR.pos] as Vec3, quat: [...t.wristR.quat] as Pose6d['quat'] },
  };
  const z = Math.min(Math.max(out.head[2], HEAD_Z_RANGE[0]), HEAD_Z_RANGE[1]);
  if (z !== out.head[2] && report) report.clamped = true;
  out.head[2] = z;
  for (const w of [out.wristL, out.wristR]) {
    const rel: Vec3 = [
      w.pos[0] - out.head[0],
      w.pos[1] - out.head[1],
      w.pos[2] - out.head[2],
    ];
    const r = Math.hypot(rel[0], rel[1], rel[2]);
    if (r > WRIST_REACH) {
      const s = WRIST_REACH / r;
      w.pos = [
        out.head[0] + rel[0] * s,
        out.head[1] + rel[1] * s,
        out.head[2] + rel[2] * s,
      ];
      if (report) report.clamped = true;
    }
  }
  return out;
}

export function handlePositions(t: TargetState): Record<HandleName, Vec3> {
  return { head: t.head, wrist_l: t.wristL.pos, wrist_r: t.wristR.pos };
}

/** Hit-test canvas coordinates against the handle markers in one view. */
export function hitTest(vp: Viewport, t: TargetState, x: number, y: number):
    HandleName | null {
  const order: HandleName[] = ['wrist_l', 'wrist_r', 'head'];
  const pos = handlePositions(t);
  for (const name of order) {
    const [hx, hy] = worldToCanvas(vp, pos[name]);
    if (Math.hypot(x - hx, y - hy) <= HANDLE_RADIUS_PX) return name;
  }
  return null;
}

/** Apply a drag in one projection: top view edits x/y, side view x/z. The
 *  untouched coordinate of the handle is preserved. */
export function applyDrag(vp: Viewport, t: TargetState, handle: HandleName,
                          x: number, y: number): TargetState {
  const [u, v] = canvasToWorld(vp, x, y);
  const pos = handlePositions(t);
  const p: Vec3 = [...pos[handle]] as Vec3;
  if (vp.kind === 'top') {
    p[0] = u;
    p[1] = v;
  } else {
    p[0] = u;
    p[2] = v;
  }
  const next: TargetState = {
    head: handle === 'head' ? p : ([...t.head] as Vec3),
    wristL: handle === 'wrist_l'
      ? { pos: p, quat: t.wristL.quat }
      : { pos: [...t.wristL.pos] as Vec3, quat: t.wristL.quat },
    wristR: handle === 'wrist_r'
      ? { pos: p, quat: t.wristR.quat }
      : { pos: [...t.wristR.pos] as Vec3, quat: t.wristR.quat },
  };
  if (handle === 'head') {
    // walking: the hands follow the head so dragging the head steers
    const dx = p[0] - t.head[0];
    const dy = vp.kind === 'top' ? p[1] - t.head[1] : 0;
    next.wristL.pos = [t.wristL.pos[0] + dx, t.wristL.pos[1] + dy, t.wristL.pos[2]];
    next.wristR.pos = [t.wristR.pos[0] + dx, t.wristR.pos[1] + dy, t.wristR.pos[2]];
  }
  return clampTargets(next);
}

const KEY_DELTAS: Record<string, [number, number, number]> = {
  w: [KEY_STEP, 0, 0],
  s: [-KEY_STEP, 0, 0],
  a: [0, KEY_STEP, 0],
  d: [0, -KEY_STEP, 0],
  q: [0, 0, KEY_STEP],
  e: [0, 0, -KEY_STEP],
};

/** Keyboard planar steering: everything translates together. */
export function applyKey(t: TargetState, key: string): TargetState | null {
  const delta = KEY_DELTAS[key.toLowerCase()];
  if (!delta) return null;
  const move = (p: Vec3): Vec3 => [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
  return clampTargets({
    head: move(t.head),
    wristL: { pos: move(t.wristL.pos), quat: t.wristL.quat },
    wristR: { pos: move(t.wristR.pos), quat: t.wristR.quat },
  });
}

export function targetMessage(t: TargetState, nowS: number): TargetMessage {
  return buildTarget(nowS, t.head, t.wristL, t.wristR);
}
