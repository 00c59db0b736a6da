// Wire protocol types and validators, mirroring schema/teleop-wire.schema.json.
// Every outbound message is validated before send; inbound frames are guarded
// so a malformed server frame can never crash the render loop.

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export interface Pose6d {
  pos: Vec3;
  quat: Quat;
}

export interface TargetMessage {
  type: 'target';
  v: number;
  t: number;
  head: Vec3;
  wrist_l: Pose6d;
  wrist_r: Pose6d;
}

export interface ControlMessage {
  type: 'control';
  v: number;
  mode?: 'closed' | 'open';
  pause?: boolean;
  drift?: {
    c_vel?: number;
    c_min?: number;
    max_deviation?: number;
    reset_interval?: number;
  };
}

export interface RobotState {
  root: Vec3;
  yaw: number;
  joints: number[];
  head: Vec3;
  wrist_l: Pose6d;
  wrist_r: Pose6d;
  elbow_l: Vec3;
  elbow_r: Vec3;
}

export interface GhostState {
  head: Vec3;
  wrist_l: Vec3;
  wrist_r: Vec3;
}

export interface StateFrame {
  type: 'state';
  v: number;
  seq: number;
  t: number;
  mode: 'closed' | 'open';
  robot: RobotState;
  ghost: GhostState;
  drift: { vec: Vec3; mag: number };
  routing: number[][];
  reward: { total: number; [term: string]: number };
  contacts: number[];
}

export interface ErrorFrame {
  type: 'error';
  v: number;
  code: string;
  message: string;
}

export type InboundFrame = StateFrame | ErrorFrame;

function isNumber(x: unknown): x is number {
  return typeof x === 'number' && Number.isFinite(x);
}

function isVec(x: unknown, n: number): boolean {
  return Array.isArray(x) && x.length === n && x.every(isNumber);
}

function isPose6d(x: unknown): boolean {
  if (x == null || typeof x !== 'object') return false;
  const p = x as Pose6d;
  return isVec(p.pos, 3) && isVec(p.quat, 4);
}

export function validateTarget(msg: unknown): msg is TargetMessage {
  if (msg == null || typeof msg !== 'object') return false;
  const m = msg as TargetMessage;
  return (
    m.type === 'target' &&
    m.v === PROTOCOL_VERSION &&
    isNumber(m.t) &&
    isVec(m.head, 3) &&
    isPose6d(m.wrist_l) &&
    isPose6d(m.wrist_r)
  );
}

const DRIFT_KEYS = ['c_vel', 'c_min', 'max_deviation', 'reset_interval'];

export function validateControl(msg: unknown): msg is ControlMessage {
  if (msg == null || typeof msg !== 'object') return false;
  const m = msg as ControlMessage;
  if (m.type !== 'control' || m.v !== PROTOCOL_VERSION) return false;
  if (m.mode !== undefined && m.mode !== 'closed' && m.mode !== 'open') return false;
  if (m.pause !== undefined && typeof m.pause !== 'boolean') return false;
  if (m.drift !== undefined) {
    if (m.drift == null || typeof m.drift !== 'object') return false;
    for (const [k, v] of Object.entries(m.drift)) {
      if (!DRIFT_KEYS.includes(k) || !isNumber(v)) return false;
    }
  }
  return true;
}

export function validateOutbound(msg: unknown): boolean {
  return validateTarget(msg) || validateControl(msg);
}

export function parseInbound(raw: string): InboundFrame | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (obj == null || typeof obj !== 'object') return null;
  const f = obj as { type?: string; v?: number };
  if (f.type === 'error') {
    const e = obj as ErrorFrame;
    return typeof e.code === 'string' && typeof e.message === 'string' ? e : null;
  }
  if (f.type !== 'state' || f.v !== PROTOCOL_VERSION) return null;
  const s = obj as StateFrame;
  if (
    !isNumber(s.seq) ||
    !isNumber(s.t) ||
    (s.mode !== 'closed' && s.mode !== 'open') ||
    s.robot == null ||
    !isVec(s.robot.root, 3) ||
    !isVec(s.robot.head, 3) ||
    !isPose6d(s.robot.wrist_l) ||
    !isPose6d(s.robot.wrist_r) ||
    s.ghost == null ||
    !isVec(s.ghost.head, 3) ||
    s.drift == null ||
    !isVec(s.drift.vec, 3) ||
    !isNumber(s.drift.mag) ||
    !Array.isArray(s.routing) ||
    s.reward == null ||
    !isNumber(s.reward.total)
  ) {
    return null;
  }
  return s;
}

export function buildTarget(
  t: number,
  head: Vec3,
  wristL: Pose6d,
  wristR: Pose6d
): TargetMessage {
  return {
    type: 'target',
    v: PROTOCOL_VERSION,
    t,
    head,
    wrist_l: wristL,
    wrist_r: wristR,
  };
}

export function buildControl(fields: Omit<ControlMessage, 'type' | 'v'>): ControlMessage {
  return { type: 'control', v: PROTOCOL_VERSION, ...fields };
}
