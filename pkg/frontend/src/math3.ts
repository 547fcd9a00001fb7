// Small 3D helpers: vectors as [x,y,z], quaternions as [w,x,y,z].

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export const vadd = (a: Vec3, b: Vec3): Vec3 => [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
export const vsub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
export const vscale = (a: Vec3, s: number): Vec3 => [a[0] * s, a[1] * s, a[2] * s];
export const vdot = (a: Vec3, b: Vec3): number => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
export const vcross = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];
export const vnorm = (a: Vec3): number => Math.sqrt(vdot(a, a));

export function vnormalize(a: Vec3): Vec3 {
  const n = vnorm(a);
  if (n < 1e-12) throw new Error("cannot normalize near-zero vector");
  return vscale(a, 1 / n);
}

export function qmul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export const qconj = (q: Quat): Quat => [q[0], -q[1], -q[2], -q[3]];

export function qnormalize(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]);
  if (n < 1e-12) throw new Error("cannot normalize near-zero quaternion");
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export function qrotate(q: Quat, v: Vec3): Vec3 {
  // v + 2 (w u x v + u x (u x v))
  const u: Vec3 = [q[1], q[2], q[3]];
  const c = vcross(u, v);
  const d = vcross(u, c);
  return [
    v[0] + 2 * (q[0] * c[0] + d[0]),
    v[1] + 2 * (q[0] * c[1] + d[1]),
    v[2] + 2 * (q[0] * c[2] + d[2]),
  ];
}

export function qaxisangle(axis: Vec3, angle: number): Quat {
  const a = vnormalize(axis);
  const h = 0.5 * angle;
  const s = Math.sin(h);
  return [Math.cos(h), s * a[0], s * a[1], s * a[2]];
}

export interface PoseLike {
  position: Vec3;
  quaternion: Quat;
}

export function composePose(a: PoseLike, b: PoseLike): PoseLike {
  return {
    position: vadd(a.position, qrotate(a.quaternion, b.position)),
    quaternion: qnormalize(qmul(a.quaternion, b.quaternion)),
  };
}
