import { describe, expect, it } from "vitest";

import { encodePoseUpdate, parseStateFrame, recordType, WireFormatError } from "../src/protocol.js";

// a line exactly as the service emits it
const STATE_LINE =
  "type=state t_server=0.05 payload_p=0.1,0.2,0.5 payload_q=1.0,0.0,0.0,0.0 arms=2 " +
  "id0=arm0 q0=0.1,-0.2,0.3,0.4,0.5,-0.6 m0=0.0715 err0=2.5e-05 " +
  "id1=arm1 q1=1.0,2.0,3.0,4.0,5.0,6.0 m1=0.081 err1=0.0001";

describe("state frames", () => {
  it("parses the service format", () => {
    const frame = parseStateFrame(STATE_LINE);
    expect(frame.tServer).toBe(0.05);
    expect(frame.payloadPosition).toEqual([0.1, 0.2, 0.5]);
    expect(frame.arms).toHaveLength(2);
    expect(frame.arms[0].armId).toBe("arm0");
    expect(frame.arms[0].joints).toHaveLength(6);
    expect(frame.arms[0].manipulability).toBeCloseTo(0.0715, 12);
    expect(frame.arms[1].positionError).toBe(0.0001);
  });

  it("rejects wrong types and malformed lines", () => {
    expect(() => parseStateFrame("type=pose session_id=x")).toThrow(WireFormatError);
    expect(() => parseStateFrame("type=state arms=1")).toThrow(WireFormatError);
    expect(() => parseStateFrame("garbage")).toThrow(WireFormatError);
    expect(recordType("type=notice status=busy")).toBe("notice");
  });
});

describe("pose updates", () => {
  it("encodes the wire format with exact numbers", () => {
    const line = encodePoseUpdate({
      sessionId: "ui-1",
      seq: 42,
      tClient: 1.25,
      p: [0.1, -0.2, 0.30000000000000004],
      q: [1, 0, 0, 0],
      grab: true,
    });
    expect(line).toBe(
      "type=pose session_id=ui-1 seq=42 t_client=1.25 p=0.1,-0.2,0.30000000000000004 q=1,0,0,0 grab=1",
    );
    // shortest round-trip formatting: parse back bit-exact
    const px = Number(line.split("p=")[1].split(" ")[0].split(",")[2]);
    expect(px).toBe(0.30000000000000004);
  });

  it("marks release with grab=0", () => {
    const line = encodePoseUpdate({
      sessionId: "s",
      seq: 1,
      tClient: 0,
      p: [0, 0, 0],
      q: [1, 0, 0, 0],
      grab: false,
    });
    expect(line.endsWith("grab=0")).toBe(true);
  });
});
