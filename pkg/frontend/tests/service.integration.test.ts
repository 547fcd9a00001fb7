// End-to-end against the real teleoperation service: connect, render the
// 3-arm scene headlessly, run a scripted pointer drag, verify readout rates,
// then kill the service and check the disconnected state.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WS from "ws";

import { OrbitCamera } from "../src/camera.js";
import { PayloadDragger } from "../src/drag.js";
import { GatewayChannel } from "../src/net.js";
import type { SocketLike } from "../src/net.js";
import { ReadoutBoard } from "../src/readouts.js";
import { drawScene } from "../src/render2d.js";
import type { SceneDoc } from "../src/scene_model.js";

let service: ChildProcess | null = null;
let wsPort = 0;

function startService(): Promise<number> {
  return new Promise((resolve, reject) => {
    const proc = spawn(
      "multiarm",
      ["run", "--live", "127.0.0.1", "--scene", "ur5_triple", "--ws-port", "0"],
      { env: { ...process.env, PYTHONUNBUFFERED: "1" }, stdio: ["ignore", "pipe", "pipe"] },
    );
    service = proc;
    let out = "";
    const onData = (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/gateway on ws:\/\/[^:]+:(\d+)\/ws/);
      if (m) {
        proc.stdout!.off("data", onData);
        resolve(Number(m[1]));
      }
    };
    proc.stdout!.on("data", onData);
    proc.stderr!.on("data", (c: Buffer) => process.stderr.write(c));
    proc.on("exit", (code) => reject(new Error(`service exited early (${code}): ${out}`)));
    setTimeout(() => reject(new Error(`service did not report a port: ${out}`)), 20000);
  });
}

const wsFactory = (url: string): SocketLike => new WS(url) as unknown as SocketLike;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

class RecordingContext {
  ops: string[] = [];
  lineWidth = 0;
  strokeStyle = "";
  fillStyle = "";
  globalAlpha = 1;
  clearRect() { this.ops.push("clearRect"); }
  save() {}
  restore() {}
  beginPath() { this.ops.push("beginPath"); }
  moveTo() {}
  lineTo() { this.ops.push("lineTo"); }
  stroke() { this.ops.push("stroke"); }
  arc() { this.ops.push("arc"); }
  fill() {}
}

describe("operator UI against the live service", () => {
  beforeAll(async () => {
    wsPort = await startService();
  }, 30000);

  afterAll(() => {
    service?.kill("SIGKILL");
  });

  it("connects, renders 3 arms, drags the payload, and survives a shutdown", async () => {
    const sceneResp = await fetch(`http://127.0.0.1:${wsPort}/scene.json`);
    const scene = (await sceneResp.json()) as SceneDoc;
    expect(scene.arms).toHaveLength(3);

    const statuses: string[] = [];
    const board = new ReadoutBoard();
    const camera = new OrbitCamera();
    camera.target = [...scene.payload_start.position] as typeof camera.target;
    const channel = new GatewayChannel(
      `ws://127.0.0.1:${wsPort}/ws`,
      {
        onStatus: (s) => statuses.push(s),
        onState: (state) => {
          dragger.updatePayloadPose(state.payloadPosition, state.payloadQuaternion);
          for (const arm of state.arms) {
            board.observe(arm.armId, state.tServer, arm.manipulability, arm.positionError);
          }
        },
      },
      wsFactory,
    );
    const sent: string[] = [];
    const dragger = new PayloadDragger(camera, (line) => {
      sent.push(line);
      channel.send(line);
    }, { sessionId: "ui-test", maxHz: 60 });
    dragger.updatePayloadPose(
      scene.payload_start.position,
      scene.payload_start.quaternion,
    );
    channel.connect();
    await sleep(1500);
    expect(channel.status).toBe("connected");
    expect(channel.latest).not.toBeNull();
    expect(channel.latest!.arms).toHaveLength(3);

    // readouts update at >= 30 Hz (service ticks at 100 Hz)
    const updates0 = board.arms.get("arm0")?.updates ?? 0;
    await sleep(1000);
    const rate = (board.arms.get("arm0")!.updates - updates0) / 1.0;
    expect(rate).toBeGreaterThanOrEqual(30);

    // headless render of the live state: one polyline per arm plus furniture
    const ctx = new RecordingContext();
    drawScene(ctx as unknown as CanvasRenderingContext2D, camera, scene, channel.latest, true);
    expect(ctx.ops.filter((o) => o === "stroke").length).toBeGreaterThanOrEqual(scene.arms.length);
    expect(ctx.ops.filter((o) => o === "arc").length).toBeGreaterThan(0);

    // scripted pointer drag: 120 move events over ~1 s, throttled to <= 60 Hz
    const s = camera.project(channel.latest!.payloadPosition)!;
    const t0 = Date.now();
    expect(dragger.pointerDown(s[0], s[1], scene.payload_radius, false, t0)).toBe(true);
    for (let i = 1; i <= 120; i++) {
      dragger.pointerMove(s[0] + i, s[1] + i / 4, t0 + i * 8);
      await sleep(8);
    }
    dragger.pointerUp(Date.now());
    const wall = (Date.now() - t0) / 1000;
    const grabs = sent.filter((l) => l.endsWith("grab=1"));
    const releases = sent.filter((l) => l.endsWith("grab=0"));
    expect(releases).toHaveLength(1);
    expect(sent[sent.length - 1]).toBe(releases[0]);
    expect(grabs.length / wall).toBeLessThanOrEqual(61);

    // the solver actually followed the drag: payload echoed away from start
    await sleep(400);
    const echoed = channel.latest!.payloadPosition;
    const d = Math.hypot(
      echoed[0] - scene.payload_start.position[0],
      echoed[1] - scene.payload_start.position[1],
      echoed[2] - scene.payload_start.position[2],
    );
    expect(d).toBeGreaterThan(0.005);

    // killing the service must surface as a disconnected state, not a crash
    service!.kill("SIGKILL");
    service = null;
    await sleep(1200);
    expect(statuses[statuses.length - 1]).toBe("disconnected");
    const ctx2 = new RecordingContext();
    drawScene(ctx2 as unknown as CanvasRenderingContext2D, camera, scene, channel.latest, false);
    expect(ctx2.ops.length).toBeGreaterThan(0);
    channel.close();
  }, 30000);
});
