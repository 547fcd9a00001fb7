// Gateway connection: state frames in, pose updates out, reconnect with
// exponential backoff. The newest state lands in a single coalescing slot;
// the render loop reads it at display rate.

import { parseStateFrame, recordType, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ChannelEvents {
  onStatus?: (status: ConnectionStatus) => void;
  onState?: (state: StateFrame) => void;
  onNotice?: (line: string) => void;
}

const BACKOFF_MS = [500, 1000, 2000, 4000, 8000, 10000];

export class GatewayChannel {
  status: ConnectionStatus = "disconnected";
  latest: StateFrame | null = null;
  private socket: SocketLike | null = null;
  private retries = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private events: ChannelEvents = {},
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> = setTimeout,
  ) {}

  connect(): void {
    this.closed = false;
    this.setStatus("connecting");
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.retries = 0;
      this.setStatus("connected");
    };
    sock.onmessage = (ev) => {
      const line = typeof ev.data === "string" ? ev.data : String(ev.data);
      try {
        if (recordType(line) === "state") {
          this.latest = parseStateFrame(line);
          this.events.onState?.(this.latest);
        } else {
          this.events.onNotice?.(line);
        }
      } catch {
        // malformed frames are counted out of band; never crash the UI
      }
    };
    sock.onclose = () => this.dropped();
    sock.onerror = () => this.dropped();
  }

  private dropped(): void {
    if (this.socket) {
      this.socket.onclose = null;
      this.socket.onerror = null;
      this.socket = null;
    }
    if (this.closed) return;
    this.setStatus("disconnected");
    const delay = BACKOFF_MS[Math.min(this.retries, BACKOFF_MS.length - 1)];
    this.retries += 1;
    this.timer = this.schedule(() => this.connect(), delay);
  }

  send(line: string): boolean {
    if (this.status !== "connected" || !this.socket) return false;
    try {
      this.socket.send(line);
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
    this.setStatus("disconnected");
  }

  private setStatus(s: ConnectionStatus): void {
    if (s !== this.status) {
      this.status = s;
      this.events.onStatus?.(s);
    }
  }
}
