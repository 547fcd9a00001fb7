// Operator UI entry point: connect to the gateway, render the scene, let the
// operator grab and drag the payload, show live per-arm readouts.
//
// The endpoint defaults to the serving host's /ws and can be overridden with
// ?ws=ws://host:port/ws.

import { OrbitCamera } from "./camera.js";
import { PayloadDragger } from "./drag.js";
import { GatewayChannel } from "./net.js";
import { ReadoutBoard } from "./readouts.js";
import { drawScene } from "./render2d.js";
import type { SceneDoc } from "./scene_model.js";

function wsUrl(): string {
  const override = new URLSearchParams(location.search).get("ws");
  if (override) return override;
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

async function boot(): Promise<void> {
  const sceneResp = await fetch("/scene.json");
  const scene = (await sceneResp.json()) as SceneDoc;

  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const statusEl = document.getElementById("status")!;
  const readoutsEl = document.getElementById("readouts")!;
  const camera = new OrbitCamera();
  camera.target = [...scene.payload_start.position] as typeof camera.target;

  const board = new ReadoutBoard();
  const channel = new GatewayChannel(wsUrl(), {
    onStatus: (s) => {
      statusEl.textContent = s;
      statusEl.className = `status ${s}`;
    },
    onState: (state) => {
      dragger.updatePayloadPose(state.payloadPosition, state.payloadQuaternion);
      for (const arm of state.arms) {
        board.observe(arm.armId, state.tServer, arm.manipulability, arm.positionError);
      }
    },
  });
  const dragger = new PayloadDragger(camera, (line) => channel.send(line));
  dragger.updatePayloadPose(scene.payload_start.position, scene.payload_start.quaternion);
  channel.connect();

  const resize = () => {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    camera.resize(canvas.width, canvas.height);
  };
  window.addEventListener("resize", resize);
  resize();

  let orbiting = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const grabbed = dragger.pointerDown(
      ev.offsetX,
      ev.offsetY,
      scene.payload_radius,
      ev.shiftKey,
      performance.now(),
    );
    if (!grabbed) {
      orbiting = true;
      lastX = ev.offsetX;
      lastY = ev.offsetY;
    }
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (dragger.isGrabbing) {
      dragger.pointerMove(ev.offsetX, ev.offsetY, performance.now());
    } else if (orbiting) {
      camera.orbit(ev.offsetX - lastX, ev.offsetY - lastY);
      lastX = ev.offsetX;
      lastY = ev.offsetY;
    }
  });
  const release = () => {
    if (dragger.isGrabbing) dragger.pointerUp(performance.now());
    orbiting = false;
  };
  canvas.addEventListener("pointerup", release);
  canvas.addEventListener("pointercancel", release);
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    camera.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
  });

  const gauges = new Map<string, { m: HTMLElement; e: HTMLElement; spark: HTMLCanvasElement }>();
  const ensureGauge = (armId: string) => {
    let g = gauges.get(armId);
    if (g) return g;
    const row = document.createElement("div");
    row.className = "arm-row";
    row.innerHTML = `<span class="arm-name">${armId}</span>
      <canvas class="spark" width="140" height="28"></canvas>
      <span class="val m">m=?</span><span class="val e">err=?</span>`;
    readoutsEl.appendChild(row);
    g = {
      m: row.querySelector(".m") as HTMLElement,
      e: row.querySelector(".e") as HTMLElement,
      spark: row.querySelector(".spark") as HTMLCanvasElement,
    };
    gauges.set(armId, g);
    return g;
  };

  const frame = () => {
    const state = channel.latest;
    const connected = channel.status === "connected";
    drawScene(ctx, camera, scene, state, connected);
    for (const [armId, readout] of board.arms) {
      const g = ensureGauge(armId);
      const m = readout.manip.latest();
      const e = readout.posErr.latest();
      g.m.textContent = m === undefined ? "m=?" : `m=${m.toFixed(4)}`;
      g.e.textContent = e === undefined ? "err=?" : `err=${(e * 1000).toFixed(3)} mm`;
      const sctx = g.spark.getContext("2d")!;
      sctx.clearRect(0, 0, g.spark.width, g.spark.height);
      sctx.strokeStyle = connected ? "#4ec9b0" : "#777";
      sctx.beginPath();
      readout.manip.polyline(g.spark.width, g.spark.height).forEach(([x, y], i) => {
        if (i === 0) sctx.moveTo(x, y);
        else sctx.lineTo(x, y);
      });
      sctx.stroke();
      g.m.style.opacity = connected ? "1" : "0.4";
      g.e.style.opacity = connected ? "1" : "0.4";
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

boot().catch((err) => {
  const statusEl = document.getElementById("status");
  if (statusEl) {
    statusEl.textContent = `failed to start: ${err}`;
    statusEl.className = "status disconnected";
  }
});
