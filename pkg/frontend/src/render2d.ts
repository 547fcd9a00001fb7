// Canvas wireframe view: ground grid, arms as link polylines, payload sphere,
// handle bars. Greyscale when disconnected.

import { OrbitCamera } from "./camera.js";
import { qrotate, vadd, vscale } from "./math3.js";
import type { Vec3 } from "./math3.js";
import { armShape, handleWorldPose, SceneDoc } from "./scene_model.js";
import type { StateFrame } from "./protocol.js";

const ARM_COLORS = ["#4ec9b0", "#d7ba7d", "#c586c0", "#569cd6", "#ce9178", "#b5cea8"];

export function drawScene(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  scene: SceneDoc,
  state: StateFrame | null,
  connected: boolean,
): void {
  ctx.clearRect(0, 0, camera.width, camera.height);
  ctx.save();
  if (!connected) ctx.globalAlpha = 0.45;
  drawGrid(ctx, camera);
  const payloadPos = state ? state.payloadPosition : scene.payload_start.position;
  const payloadQuat = state ? state.payloadQuaternion : scene.payload_start.quaternion;

  scene.arms.forEach((arm, i) => {
    const joints = state?.arms.find((a) => a.armId === arm.arm_id)?.joints;
    const q = joints ?? new Array(arm.joints.length).fill(0);
    const shape = armShape(arm, q);
    strokePolyline(ctx, camera, shape.points, connected ? ARM_COLORS[i % ARM_COLORS.length] : "#888", 3);
    for (const p of shape.points) dot(ctx, camera, p, 3.5, "#ddd");
  });

  // handle bars on the payload (x axis of each handle frame)
  for (const arm of scene.arms) {
    const h = handleWorldPose(scene, arm.arm_id, { position: payloadPos, quaternion: payloadQuat });
    const half = vscale(qrotate(h.quaternion, [1, 0, 0]), 0.05);
    strokePolyline(ctx, camera, [vadd(h.position, vscale(half, -1)), vadd(h.position, half)], "#f2d024", 4);
  }

  drawPayload(ctx, camera, payloadPos, scene.payload_radius, connected);
  ctx.restore();
}

function drawGrid(ctx: CanvasRenderingContext2D, camera: OrbitCamera): void {
  ctx.lineWidth = 1;
  ctx.strokeStyle = "#2a2f38";
  const n = 6;
  const step = 0.25;
  for (let i = -n; i <= n; i++) {
    strokePolyline(ctx, camera, [[i * step, -n * step, 0], [i * step, n * step, 0]], "#2a2f38", 1);
    strokePolyline(ctx, camera, [[-n * step, i * step, 0], [n * step, i * step, 0]], "#2a2f38", 1);
  }
}

function strokePolyline(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  points: Vec3[],
  color: string,
  width: number,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  let started = false;
  for (const p of points) {
    const s = camera.project(p);
    if (!s) {
      started = false;
      continue;
    }
    if (started) ctx.lineTo(s[0], s[1]);
    else {
      ctx.moveTo(s[0], s[1]);
      started = true;
    }
  }
  ctx.stroke();
}

function dot(ctx: CanvasRenderingContext2D, camera: OrbitCamera, p: Vec3, r: number, color: string): void {
  const s = camera.project(p);
  if (!s) return;
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(s[0], s[1], r, 0, 2 * Math.PI);
  ctx.fill();
}

function drawPayload(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  center: Vec3,
  radius: number,
  connected: boolean,
): void {
  const s = camera.project(center);
  if (!s) return;
  const rPx = (radius * camera.focalLength()) / s[2];
  ctx.strokeStyle = connected ? "#7ab8f5" : "#777";
  ctx.fillStyle = connected ? "rgba(122, 184, 245, 0.25)" : "rgba(120,120,120,0.2)";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(s[0], s[1], rPx, 0, 2 * Math.PI);
  ctx.fill();
  ctx.stroke();
}
