import { describe, expect, it } from "vitest";

import { GatewayChannel } from "../src/net.js";
import type { SocketLike } from "../src/net.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: ((ev?: unknown) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

const STATE_LINE =
  "type=state t_server=0.01 payload_p=0,0,0.5 payload_q=1,0,0,0 arms=1 id0=arm0 q0=0,0 m0=0.1 err0=0";

function harness() {
  const sockets: FakeSocket[] = [];
  const statuses: string[] = [];
  const states: number[] = [];
  const timers: Array<{ fn: () => void; ms: number }> = [];
  const channel = new GatewayChannel(
    "ws://test/ws",
    {
      onStatus: (s) => statuses.push(s),
      onState: (st) => states.push(st.tServer),
    },
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    (fn, ms) => {
      timers.push({ fn, ms });
      return 0 as unknown as ReturnType<typeof setTimeout>;
    },
  );
  return { channel, sockets, statuses, states, timers };
}

describe("gateway channel", () => {
  it("reports connected and dispatches state frames", () => {
    const h = harness();
    h.channel.connect();
    expect(h.statuses).toEqual(["connecting"]);
    h.sockets[0].onopen?.();
    expect(h.channel.status).toBe("connected");
    h.sockets[0].onmessage?.({ data: STATE_LINE });
    expect(h.states).toEqual([0.01]);
    expect(h.channel.latest?.arms[0].armId).toBe("arm0");
  });

  it("ignores malformed frames without crashing", () => {
    const h = harness();
    h.channel.connect();
    h.sockets[0].onopen?.();
    h.sockets[0].onmessage?.({ data: "???" });
    h.sockets[0].onmessage?.({ data: "type=state arms=9" });
    expect(h.channel.latest).toBeNull();
    expect(h.channel.status).toBe("connected");
  });

  it("reconnects with growing backoff after a drop", () => {
    const h = harness();
    h.channel.connect();
    h.sockets[0].onopen?.();
    h.sockets[0].onclose?.();
    expect(h.channel.status).toBe("disconnected");
    expect(h.timers).toHaveLength(1);
    expect(h.timers[0].ms).toBe(500);
    h.timers[0].fn(); // first retry
    expect(h.sockets).toHaveLength(2);
    h.sockets[1].onerror?.(); // fails again
    expect(h.timers[1].ms).toBe(1000);
  });

  it("send only works while connected", () => {
    const h = harness();
    expect(h.channel.send("x")).toBe(false);
    h.channel.connect();
    h.sockets[0].onopen?.();
    expect(h.channel.send("type=pose ...")).toBe(true);
    expect(h.sockets[0].sent).toHaveLength(1);
  });

  it("close stops the retry loop", () => {
    const h = harness();
    h.channel.connect();
    h.sockets[0].onopen?.();
    h.channel.close();
    expect(h.channel.status).toBe("disconnected");
    expect(h.timers).toHaveLength(0);
  });
});
