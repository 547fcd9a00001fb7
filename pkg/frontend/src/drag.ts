// Pointer gestures -> pose update stream.
//
// Offset-preserving grab: the payload keeps its offset from the pointer ray's
// intersection with the drag plane (perpendicular to the camera's forward
// axis through the grab point). A modifier switches to rotation about the
// view axis. Messages go out at most `maxHz` per second while dragging, and a
// release always emits exactly one final grab=false message.

import { OrbitCamera } from "./camera.js";
import { encodePoseUpdate } from "./protocol.js";
import { qaxisangle, qmul, qnormalize, vadd, vdot, vscale, vsub } from "./math3.js";
import type { Quat, Vec3 } from "./math3.js";

export interface DragSink {
  (line: string): void;
}

export class PayloadDragger {
  private grabbing = false;
  private rotateMode = false;
  private seq = 0;
  private lastSendMs = -Infinity;
  private planePoint: Vec3 = [0, 0, 0];
  private planeNormal: Vec3 = [0, 0, 1];
  private grabOffset: Vec3 = [0, 0, 0];
  private grabQuaternion: Quat = [1, 0, 0, 0];
  private grabScreenX = 0;
  private pose: { position: Vec3; quaternion: Quat } = { position: [0, 0, 0], quaternion: [1, 0, 0, 0] };
  readonly sessionId: string;
  sentCount = 0;

  constructor(
    private camera: OrbitCamera,
    private send: DragSink,
    opts: { sessionId?: string; maxHz?: number } = {},
  ) {
    this.sessionId = opts.sessionId ?? `ui-${Math.floor(Math.random() * 1e9)}`;
    this.maxHz = opts.maxHz ?? 60;
  }

  readonly maxHz: number;

  get isGrabbing(): boolean {
    return this.grabbing;
  }

  /** Latest payload pose from the state stream (the drag starts from it). */
  updatePayloadPose(position: Vec3, quaternion: Quat): void {
    if (!this.grabbing) {
      this.pose = { position: [...position] as Vec3, quaternion: [...quaternion] as Quat };
    }
  }

  /** Ray-sphere hit test against the payload. */
  hitsPayload(sx: number, sy: number, radius: number): boolean {
    const dir = this.camera.rayThrough(sx, sy);
    const oc = vsub(this.pose.position, this.camera.eye());
    const along = vdot(oc, dir);
    if (along < 0) return false;
    const d2 = vdot(oc, oc) - along * along;
    return d2 <= radius * radius;
  }

  pointerDown(sx: number, sy: number, radius: number, modifier: boolean, nowMs: number): boolean {
    if (!this.hitsPayload(sx, sy, radius)) return false;
    this.grabbing = true;
    this.rotateMode = modifier;
    this.grabScreenX = sx;
    this.grabQuaternion = [...this.pose.quaternion] as Quat;
    this.planeNormal = this.camera.basis().forward;
    this.planePoint = [...this.pose.position] as Vec3;
    const hit = this.camera.intersectPlane(sx, sy, this.planePoint, this.planeNormal);
    this.grabOffset = hit ? vsub(this.pose.position, hit) : [0, 0, 0];
    this.emit(true, nowMs, true);
    return true;
  }

  pointerMove(sx: number, sy: number, nowMs: number): void {
    if (!this.grabbing) return;
    if (this.rotateMode) {
      const angle = (sx - this.grabScreenX) * 0.01;
      this.pose.quaternion = qnormalize(
        qmul(qaxisangle(this.planeNormal, angle), this.grabQuaternion),
      );
    } else {
      const hit = this.camera.intersectPlane(sx, sy, this.planePoint, this.planeNormal);
      if (hit) this.pose.position = vadd(hit, this.grabOffset);
    }
    this.emit(true, nowMs, false);
  }

  pointerUp(nowMs: number): void {
    if (!this.grabbing) return;
    this.grabbing = false;
    this.rotateMode = false;
    this.emit(false, nowMs, true); // the terminal message always goes out
  }

  private emit(grab: boolean, nowMs: number, force: boolean): void {
    if (!force && nowMs - this.lastSendMs < 1000 / this.maxHz) return;
    this.lastSendMs = nowMs;
    this.seq += 1;
    this.sentCount += 1;
    this.send(
      encodePoseUpdate({
        sessionId: this.sessionId,
        seq: this.seq,
        tClient: nowMs / 1000,
        p: this.pose.position,
        q: this.pose.quaternion,
        grab,
      }),
    );
  }

  get currentPose(): { position: Vec3; quaternion: Quat } {
    return this.pose;
  }
}
