// Orbit camera with a pinhole projection; the drag plane math reuses the same
// basis vectors, so unprojection is exact with respect to the renderer.

import { vadd, vcross, vdot, vnormalize, vscale, vsub } from "./math3.js";
import type { Vec3 } from "./math3.js";

const WORLD_UP: Vec3 = [0, 0, 1];

export class OrbitCamera {
  target: Vec3 = [0, 0, 0.4];
  distance = 2.6;
  azimuth = Math.PI / 4;
  elevation = 0.45;
  fovY = Math.PI / 4;
  width = 960;
  height = 600;

  eye(): Vec3 {
    const ce = Math.cos(this.elevation);
    return vadd(this.target, [
      this.distance * ce * Math.cos(this.azimuth),
      this.distance * ce * Math.sin(this.azimuth),
      this.distance * Math.sin(this.elevation),
    ]);
  }

  /** forward/right/up unit vectors of the view frame. */
  basis(): { forward: Vec3; right: Vec3; up: Vec3 } {
    const forward = vnormalize(vsub(this.target, this.eye()));
    const right = vnormalize(vcross(forward, WORLD_UP));
    const up = vcross(right, forward);
    return { forward, right, up };
  }

  focalLength(): number {
    return (0.5 * this.height) / Math.tan(0.5 * this.fovY);
  }

  /** world point -> [sx, sy, depth]; null when behind the camera. */
  project(p: Vec3): [number, number, number] | null {
    const { forward, right, up } = this.basis();
    const d = vsub(p, this.eye());
    const z = vdot(d, forward);
    if (z <= 1e-6) return null;
    const f = this.focalLength();
    return [
      0.5 * this.width + (f * vdot(d, right)) / z,
      0.5 * this.height - (f * vdot(d, up)) / z,
      z,
    ];
  }

  /** unit ray direction through a screen pixel. */
  rayThrough(sx: number, sy: number): Vec3 {
    const { forward, right, up } = this.basis();
    const f = this.focalLength();
    const dir = vadd(
      forward,
      vadd(vscale(right, (sx - 0.5 * this.width) / f), vscale(up, (0.5 * this.height - sy) / f)),
    );
    return vnormalize(dir);
  }

  /** intersection of the pixel ray with the plane through `point` normal to `normal`. */
  intersectPlane(sx: number, sy: number, point: Vec3, normal: Vec3): Vec3 | null {
    const dir = this.rayThrough(sx, sy);
    const denom = vdot(dir, normal);
    if (Math.abs(denom) < 1e-9) return null;
    const t = vdot(vsub(point, this.eye()), normal) / denom;
    if (t <= 0) return null;
    return vadd(this.eye(), vscale(dir, t));
  }

  orbit(dx: number, dy: number): void {
    this.azimuth -= dx * 0.008;
    this.elevation = Math.min(1.45, Math.max(-0.2, this.elevation + dy * 0.006));
  }

  zoom(factor: number): void {
    this.distance = Math.min(8, Math.max(0.5, this.distance * factor));
  }

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }
}
