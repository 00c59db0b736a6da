import { describe, expect, it } from 'vitest';

import {
  HEAD_Z_RANGE,
  WRIST_REACH,
  applyDrag,
  applyKey,
  clampTargets,
  hitTest,
  standingTargets,
  targetMessage,
} from '../src/handles';
import { validateTarget } from '../src/protocol';
import { canvasToWorld, defaultViewport, worldToCanvas } from '../src/scene';

describe('scene transforms', () => {
  it('world/canvas roundtrip in both views', () => {
    for (const kind of ['top', 'side'] as const) {
      const vp = defaultViewport(kind, 800, 400);
      const [x, y] = worldToCanvas(vp, [1.25, 0.5, 0.9]);
      const [u, v] = canvasToWorld(vp, x, y);
      expect(u).toBeCloseTo(1.25, 9);
      expect(v).toBeCloseTo(kind === 'top' ? 0.5 : 0.9, 9);
    }
  });
});

describe('clamping', () => {
  it('clamps head height into the envelope', () => {
    const t = standingTargets();
    t.head = [0, 0, 9.0];
    const report = { clamped: false };
    const out = clampTargets(t, report);
    expect(out.head[2]).toBe(HEAD_Z_RANGE[1]);
    expect(report.clamped).toBe(true);
  });

  it('clamps wrists onto the reach sphere', () => {
    const t = standingTargets();
    t.wristL.pos = [5, 5, 5];
    const out = clampTargets(t);
    const rel = [
      out.wristL.pos[0] - out.head[0],
      out.wristL.pos[1] - out.head[1],
      out.wristL.pos[2] - out.head[2],
    ];
    expect(Math.hypot(...(rel as [number, number, number]))).toBeLessThanOrEqual(
      WRIST_REACH + 1e-9
    );
  });

  it('leaves in-envelope targets untouched', () => {
    const t = standingTargets();
    const report = { clamped: false };
    const out = clampTargets(t, report);
    expect(report.clamped).toBe(false);
    expect(out.head).toEqual(t.head);
  });
});

describe('dragging', () => {
  it('hit-tests handle markers', () => {
    const vp = defaultViewport('side', 800, 400);
    const t = standingTargets();
    const [hx, hy] = worldToCanvas(vp, t.head);
    expect(hitTest(vp, t, hx + 3, hy - 3)).toBe('head');
    expect(hitTest(vp, t, hx + 200, hy)).toBeNull();
  });

  it('dragging the head in the top view translates the hands', () => {
    const vp = defaultViewport('top', 800, 400);
    const t = standingTargets();
    const [x, y] = worldToCanvas(vp, [1.0, 0.0, 1.2]);
    const out = applyDrag(vp, t, 'head', x, y);
    expect(out.head[0]).toBeCloseTo(1.0, 6);
    expect(out.wristL.pos[0]).toBeCloseTo(1.0, 6);
    expect(out.wristR.pos[0]).toBeCloseTo(1.0, 6);
    expect(out.head[2]).toBeCloseTo(1.2, 9); // height untouched in top view
  });

  it('dragging a wrist moves only that wrist, clamped', () => {
    const vp = defaultViewport('side', 800, 400);
    const t = standingTargets();
    const [x, y] = worldToCanvas(vp, [3.0, 0, 2.5]);
    const out = applyDrag(vp, t, 'wrist_l', x, y);
    expect(out.wristR.pos).toEqual(t.wristR.pos);
    const rel = Math.hypot(
      out.wristL.pos[0] - out.head[0],
      out.wristL.pos[1] - out.head[1],
      out.wristL.pos[2] - out.head[2]
    );
    expect(rel).toBeLessThanOrEqual(WRIST_REACH + 1e-9);
  });
});

describe('keyboard steering', () => {
  it('WASD translates the whole target set', () => {
    const t = standingTargets();
    const out = applyKey(t, 'w');
    expect(out).not.toBeNull();
    expect(out!.head[0]).toBeGreaterThan(t.head[0]);
    expect(out!.wristL.pos[0]).toBeGreaterThan(t.wristL.pos[0]);
  });

  it('Q/E adjust height within the envelope', () => {
    let t = standingTargets();
    for (let i = 0; i < 100; i += 1) t = applyKey(t, 'q')!;
    expect(t.head[2]).toBe(HEAD_Z_RANGE[1]);
    for (let i = 0; i < 400; i += 1) t = applyKey(t, 'e')!;
    expect(t.head[2]).toBe(HEAD_Z_RANGE[0]);
  });

  it('unbound keys produce no message', () => {
    expect(applyKey(standingTargets(), 'x')).toBeNull();
  });
});

describe('outbound target construction', () => {
  it('always passes schema validation', () => {
    let t = standingTargets();
    t = applyKey(t, 'w')!;
    const vp = defaultViewport('top', 800, 400);
    t = applyDrag(vp, t, 'wrist_r', 10, 10);
    const msg = targetMessage(t, 1.5);
    expect(validateTarget(msg)).toBe(true);
  });
});
