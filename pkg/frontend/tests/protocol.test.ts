import { describe, expect, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';
import { dirname, join } from 'node:path';

import {
  PROTOCOL_VERSION,
  buildControl,
  buildTarget,
  parseInbound,
  validateControl,
  validateOutbound,
  validateTarget,
} from '../src/protocol';

const here = dirname(fileURLToPath(import.meta.url));
const schema = JSON.parse(
  readFileSync(join(here, '..', '..', 'schema', 'teleop-wire.schema.json'), 'utf-8')
);

function sampleTarget() {
  return buildTarget(
    1.25,
    [0, 0, 1.2],
    { pos: [0.1, 0.2, 0.9], quat: [1, 0, 0, 0] },
    { pos: [0.1, -0.2, 0.9], quat: [1, 0, 0, 0] }
  );
}

function sampleState() {
  return {
    type: 'state',
    v: 1,
    seq: 3,
    t: 0.06,
    mode: 'closed',
    robot: {
      root: [0, 0, 0.85],
      yaw: 0,
      joints: new Array(14).fill(0),
      head: [0, 0, 1.2],
      wrist_l: { pos: [0, 0.18, 0.78], quat: [1, 0, 0, 0] },
      wrist_r: { pos: [0, -0.18, 0.78], quat: [1, 0, 0, 0] },
      elbow_l: [0, 0.18, 0.98],
      elbow_r: [0, -0.18, 0.98],
    },
    ghost: { head: [0, 0, 1.2], wrist_l: [0, 0.18, 0.78], wrist_r: [0, -0.18, 0.78] },
    drift: { vec: [0, 0, 0], mag: 0 },
    routing: [[0.25, 0.25, 0.25, 0.25]],
    reward: { total: 1.5 },
    contacts: [1, 1],
  };
}

describe('outbound validation', () => {
  it('accepts a well-formed target', () => {
    expect(validateTarget(sampleTarget())).toBe(true);
    expect(validateOutbound(sampleTarget())).toBe(true);
  });

  it('rejects missing wrist fields', () => {
    const bad = sampleTarget() as Record<string, unknown>;
    delete bad.wrist_r;
    expect(validateTarget(bad)).toBe(false);
  });

  it('rejects short vectors and non-finite numbers', () => {
    const bad = sampleTarget();
    (bad.head as number[]).pop();
    expect(validateTarget(bad)).toBe(false);
    const nan = sampleTarget();
    nan.head[0] = NaN;
    expect(validateTarget(nan)).toBe(false);
  });

  it('accepts control messages and rejects bad modes and drift keys', () => {
    expect(validateControl(buildControl({ mode: 'open' }))).toBe(true);
    expect(validateControl(buildControl({ drift: { c_min: 0.02 } }))).toBe(true);
    expect(validateControl({ type: 'control', v: 1, mode: 'diagonal' })).toBe(false);
    expect(
      validateControl({ type: 'control', v: 1, drift: { warp: 9 } })
    ).toBe(false);
  });

  it('rejects the wrong protocol version', () => {
    const msg = sampleTarget() as Record<string, unknown>;
    msg.v = PROTOCOL_VERSION + 1;
    expect(validateOutbound(msg)).toBe(false);
  });
});

describe('inbound parsing', () => {
  it('parses a state frame', () => {
    const frame = parseInbound(JSON.stringify(sampleState()));
    expect(frame).not.toBeNull();
    expect(frame!.type).toBe('state');
  });

  it('parses an error frame', () => {
    const frame = parseInbound(
      JSON.stringify({ type: 'error', v: 1, code: 'busy', message: 'taken' })
    );
    expect(frame).not.toBeNull();
    expect(frame!.type).toBe('error');
  });

  it('returns null on garbage without throwing', () => {
    expect(parseInbound('{nope')).toBeNull();
    expect(parseInbound('42')).toBeNull();
    expect(parseInbound(JSON.stringify({ type: 'state', v: 1 }))).toBeNull();
  });
});

describe('agreement with the shared schema file', () => {
  function requiredOf(defName: string): string[] {
    return schema.$defs[defName].required;
  }

  it('target validator checks every schema-required field', () => {
    for (const field of requiredOf('target')) {
      const msg = sampleTarget() as Record<string, unknown>;
      delete msg[field];
      expect(validateTarget(msg), `missing ${field} must fail`).toBe(false);
    }
  });

  it('state parser checks the schema-required skeleton', () => {
    for (const field of requiredOf('state')) {
      if (field === 'contacts' || field === 'routing') continue; // tolerated
      const msg = sampleState() as Record<string, unknown>;
      delete msg[field];
      expect(parseInbound(JSON.stringify(msg)), `missing ${field}`).toBeNull();
    }
  });

  it('builders emit the schema protocol version', () => {
    expect(schema.$defs.target.properties.v.const).toBe(PROTOCOL_VERSION);
    expect(sampleTarget().v).toBe(PROTOCOL_VERSION);
    expect(buildControl({ mode: 'closed' }).v).toBe(PROTOCOL_VERSION);
  });

  it('drift keys match the schema control definition', () => {
    const schemaKeys = Object.keys(
      schema.$defs.control.properties.drift.properties
    ).sort();
    expect(schemaKeys).toEqual(
      ['c_min', 'c_vel', 'max_deviation', 'reset_interval'].sort()
    );
  });
});
