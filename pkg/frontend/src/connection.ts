// WebSocket session management: exponential-backoff reconnect, outbound
// throttling to the control rate, and schema validation on every send.

import {
  InboundFrame,
  parseInbound,
  validateOutbound,
} from './protocol';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export const MIN_SEND_INTERVAL_MS = 20; // at most 50 Hz outbound
export const BACKOFF_BASE_MS = 250;
export const BACKOFF_MAX_MS = 8000;

export function backoffDelayMs(attempt: number): number {
  const d = BACKOFF_BASE_MS * 2 ** Math.max(0, attempt - 1);
  return Math.min(d, BACKOFF_MAX_MS);
}

export type ConnectionStatus = 'connecting' | 'open' | 'retrying' | 'closed';

export interface ConnectionEvents {
  onFrame: (frame: InboundFrame) => void;
  onStatus: (status: ConnectionStatus, attempt: number) => void;
}

export class TeleopConnection {
  private socket: SocketLike | null = null;
  private attempt = 0;
  private closed = false;
  private lastSendMs = -Infinity;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  droppedSends = 0;
  invalidSends = 0;

  constructor(
    private url: string,
    private events: ConnectionEvents,
    private makeSocket: SocketFactory,
    private now: () => number = () => Date.now()
  ) {}

  connect(): void {
    if (this.closed) return;
    this.attempt += 1;
    this.events.onStatus('connecting', this.attempt);
    const sock = this.makeSocket(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.attempt = 0;
      this.events.onStatus('open', 0);
    };
    sock.onmessage = (ev) => {
      const frame = parseInbound(ev.data);
      if (frame !== null) this.events.onFrame(frame);
    };
    sock.onclose = () => {
      this.socket = null;
      if (!this.closed) this.scheduleRetry();
    };
    sock.onerror = () => {
      // the close handler owns reconnection
    };
  }

  private scheduleRetry(): void {
    this.attempt += 1;
    this.events.onStatus('retrying', this.attempt);
    this.retryTimer = setTimeout(() => this.connect(), backoffDelayMs(this.attempt));
  }

  /** Throttled, validated send. Returns true when the message left. */
  send(msg: unknown, throttle = true): boolean {
    if (!validateOutbound(msg)) {
      this.invalidSends += 1;
      return false;
    }
    if (this.socket === null) return false;
    const t = this.now();
    if (throttle && t - this.lastSendMs < MIN_SEND_INTERVAL_MS) {
      this.droppedSends += 1;
      return false;
    }
    this.lastSendMs = t;
    this.socket.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    if (this.socket !== null) this.socket.close();
    this.events.onStatus('closed', this.attempt);
  }

  get isOpen(): boolean {
    return this.socket !== null;
  }
}
