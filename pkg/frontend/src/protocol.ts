// Wire records, matching the service: one flat `type=<...> field=value` line
// per message, vectors comma-joined, floats in shortest round-trip decimal.

import type { Quat, Vec3 } from "./math3.js";

export interface ArmStateFrame {
  armId: string;
  joints: number[];
  manipulability: number;
  positionError: number;
}

export interface StateFrame {
  tServer: number;
  payloadPosition: Vec3;
  payloadQuaternion: Quat;
  arms: ArmStateFrame[];
}

export interface PoseUpdate {
  sessionId: string;
  seq: number;
  tClient: number;
  p: Vec3;
  q: Quat;
  grab: boolean;
}

export class WireFormatError extends Error {}

function fields(line: string): Map<string, string> {
  const out = new Map<string, string>();
  for (const tok of line.trim().split(/\s+/)) {
    if (!tok) continue;
    const eq = tok.indexOf("=");
    if (eq <= 0) throw new WireFormatError(`bad token ${tok}`);
    const key = tok.slice(0, eq);
    if (out.has(key)) throw new WireFormatError(`duplicate field ${key}`);
    out.set(key, tok.slice(eq + 1));
  }
  return out;
}

function need(f: Map<string, string>, key: string): string {
  const v = f.get(key);
  if (v === undefined) throw new WireFormatError(`missing field ${key}`);
  return v;
}

function num(text: string, what: string): number {
  const v = Number(text);
  if (!Number.isFinite(v)) throw new WireFormatError(`bad number for ${what}: ${text}`);
  return v;
}

function vec(text: string, n: number, what: string): number[] {
  const parts = text.split(",");
  if (parts.length !== n) throw new WireFormatError(`${what} needs ${n} components`);
  return parts.map((p) => num(p, what));
}

export function recordType(line: string): string {
  return fields(line).get("type") ?? "";
}

export function parseStateFrame(line: string): StateFrame {
  const f = fields(line);
  if (f.get("type") !== "state") throw new WireFormatError(`expected type=state`);
  const nArms = num(need(f, "arms"), "arms");
  const arms: ArmStateFrame[] = [];
  for (let i = 0; i < nArms; i++) {
    arms.push({
      armId: need(f, `id${i}`),
      joints: need(f, `q${i}`).split(",").map((x) => num(x, `q${i}`)),
      manipulability: num(need(f, `m${i}`), `m${i}`),
      positionError: num(need(f, `err${i}`), `err${i}`),
    });
  }
  return {
    tServer: num(need(f, "t_server"), "t_server"),
    payloadPosition: vec(need(f, "payload_p"), 3, "payload_p") as Vec3,
    payloadQuaternion: vec(need(f, "payload_q"), 4, "payload_q") as Quat,
    arms,
  };
}

// String(x) is the shortest decimal that round-trips, like Python's repr.
const fmt = (x: number): string => String(x);

export function encodePoseUpdate(msg: PoseUpdate): string {
  return (
    `type=pose session_id=${msg.sessionId} seq=${msg.seq} ` +
    `t_client=${fmt(msg.tClient)} p=${msg.p.map(fmt).join(",")} ` +
    `q=${msg.q.map(fmt).join(",")} grab=${msg.grab ? 1 : 0}`
  );
}
