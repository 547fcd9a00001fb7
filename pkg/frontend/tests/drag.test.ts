import { describe, expect, it } from "vitest";

import { OrbitCamera } from "../src/camera.js";
import { PayloadDragger } from "../src/drag.js";
import { vnorm, vsub } from "../src/math3.js";
import type { Vec3 } from "../src/math3.js";

const RADIUS = 0.15;
const START: Vec3 = [0, 0, 0.5];

function setup(maxHz = 60) {
  const cam = new OrbitCamera();
  const sent: string[] = [];
  const dragger = new PayloadDragger(cam, (line) => sent.push(line), {
    sessionId: "test",
    maxHz,
  });
  dragger.updatePayloadPose(START, [1, 0, 0, 0]);
  return { cam, sent, dragger };
}

function grabField(line: string): string {
  return line.split("grab=")[1];
}

function posField(line: string): Vec3 {
  return line.split("p=")[1].split(" ")[0].split(",").map(Number) as Vec3;
}

describe("payload dragging", () => {
  it("misses when the pointer is off the sphere", () => {
    const { cam, dragger, sent } = setup();
    expect(dragger.pointerDown(2, 2, RADIUS, false, 0)).toBe(false);
    expect(sent).toHaveLength(0);
    expect(cam).toBeDefined();
  });

  it("click without movement sends zero translation and a terminal release", () => {
    const { cam, dragger, sent } = setup();
    const s = cam.project(START)!;
    expect(dragger.pointerDown(s[0], s[1], RADIUS, false, 0)).toBe(true);
    dragger.pointerUp(20);
    expect(sent.length).toBe(2);
    expect(vnorm(vsub(posField(sent[0]), START))).toBeLessThan(1e-9);
    expect(grabField(sent[0])).toBe("1");
    expect(grabField(sent[1])).toBe("0");
    expect(vnorm(vsub(posField(sent[1]), START))).toBeLessThan(1e-9);
  });

  it("drag displacement matches the camera's own plane unprojection", () => {
    const { cam, dragger, sent } = setup();
    const s = cam.project(START)!;
    dragger.pointerDown(s[0], s[1], RADIUS, false, 0);
    const targetPx: [number, number] = [s[0] + 100, s[1]];
    dragger.pointerMove(targetPx[0], targetPx[1], 100);
    dragger.pointerUp(200);
    const moved = posField(sent[sent.length - 1]);
    // oracle: intersect the same pixel ray with the drag plane directly
    const expected = cam.intersectPlane(targetPx[0], targetPx[1], START, cam.basis().forward)!;
    expect(vnorm(vsub(moved, expected))).toBeLessThan(1e-9);
    // screen-right at the default camera looks along world -y-ish; it must move in the plane
    expect(vnorm(vsub(moved, START))).toBeGreaterThan(0.01);
  });

  it("throttles to at most maxHz while moving and always sends the release", () => {
    const { cam, dragger, sent } = setup(60);
    const s = cam.project(START)!;
    dragger.pointerDown(s[0], s[1], RADIUS, false, 0);
    // 300 move events over 1 simulated second
    for (let i = 1; i <= 300; i++) {
      dragger.pointerMove(s[0] + i / 10, s[1], (i * 1000) / 300);
    }
    dragger.pointerUp(1000);
    const grabMsgs = sent.filter((l) => grabField(l) === "1");
    const releases = sent.filter((l) => grabField(l) === "0");
    expect(releases).toHaveLength(1);
    expect(sent[sent.length - 1]).toBe(releases[0]);
    expect(grabMsgs.length).lessThanOrEqual(61); // 60 Hz over 1 s (+ the initial grab)
    expect(grabMsgs.length).toBeGreaterThan(30);
    // seq strictly increasing
    const seqs = sent.map((l) => Number(l.split("seq=")[1].split(" ")[0]));
    for (let i = 1; i < seqs.length; i++) expect(seqs[i]).toBeGreaterThan(seqs[i - 1]);
  });

  it("modifier drag rotates about the view axis without translating", () => {
    const { cam, dragger, sent } = setup();
    const s = cam.project(START)!;
    dragger.pointerDown(s[0], s[1], RADIUS, true, 0);
    dragger.pointerMove(s[0] + 80, s[1], 100);
    dragger.pointerUp(200);
    const last = sent[sent.length - 1];
    const q = last.split("q=")[1].split(" ")[0].split(",").map(Number);
    expect(vnorm(vsub(posField(last), START))).toBeLessThan(1e-9);
    expect(Math.abs(q[0] - 1)).toBeGreaterThan(1e-4); // actually rotated
  });

  it("ignores state updates while grabbing (no feedback fights)", () => {
    const { cam, dragger } = setup();
    const s = cam.project(START)!;
    dragger.pointerDown(s[0], s[1], RADIUS, false, 0);
    dragger.updatePayloadPose([9, 9, 9], [1, 0, 0, 0]);
    expect(vnorm(vsub(dragger.currentPose.position, START))).toBeLessThan(1e-9);
  });
});
