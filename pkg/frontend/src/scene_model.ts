// Scene geometry fetched from the service's /scene.json: enough to render
// arm link segments from streamed joint values. Rendering only - all IK and
// metrics come from the service.

import { composePose, PoseLike, qaxisangle, qmul, qnormalize, qrotate, vadd } from "./math3.js";
import type { Quat, Vec3 } from "./math3.js";

export interface JointDoc {
  offset_position: Vec3;
  offset_quaternion: Quat;
  axis: Vec3;
}

export interface ArmDoc {
  arm_id: string;
  base_pose: { position: Vec3; quaternion: Quat };
  joints: JointDoc[];
  tool_offset: { position: Vec3; quaternion: Quat };
}

export interface SceneDoc {
  scene: string;
  payload_radius: number;
  payload_start: { position: Vec3; quaternion: Quat };
  arms: ArmDoc[];
  handles: Record<string, { position: Vec3; quaternion: Quat }>;
}

export interface ArmShape {
  points: Vec3[]; // base, each joint origin, end effector
  ee: PoseLike;
}

export function armShape(arm: ArmDoc, joints: number[]): ArmShape {
  if (joints.length !== arm.joints.length) {
    throw new Error(`joint count mismatch for ${arm.arm_id}`);
  }
  let p: Vec3 = [...arm.base_pose.position] as Vec3;
  let q: Quat = qnormalize([...arm.base_pose.quaternion] as Quat);
  const points: Vec3[] = [p];
  for (let i = 0; i < arm.joints.length; i++) {
    const j = arm.joints[i];
    p = vadd(p, qrotate(q, j.offset_position));
    q = qnormalize(qmul(q, j.offset_quaternion));
    points.push(p);
    q = qnormalize(qmul(q, qaxisangle(j.axis, joints[i])));
  }
  const ee = composePose({ position: p, quaternion: q }, {
    position: arm.tool_offset.position,
    quaternion: arm.tool_offset.quaternion,
  });
  points.push(ee.position as Vec3);
  return { points, ee };
}

export function handleWorldPose(scene: SceneDoc, armId: string, payload: PoseLike): PoseLike {
  const local = scene.handles[armId];
  return composePose(payload, { position: local.position, quaternion: local.quaternion });
}
