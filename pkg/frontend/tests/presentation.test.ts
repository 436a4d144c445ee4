import { describe, expect, it } from "vitest";

import { ScenePresentation } from "../src/presentation.js";
import { topics } from "../src/protocol.js";

function segmentsFrame(limb: number, seq: number, tipZ = 1.0): string {
  const pose = {
    position: { x: 0, y: 0, z: 0.05 * seq },
    orientation: { w: 1, x: 0, y: 0, z: 0 },
  };
  return JSON.stringify({
    op: "publish",
    topic: topics.limbSegments(limb),
    msg: {
      seq,
      stamp: seq * 0.02,
      frame: "render",
      limb,
      limb_id: "Arm1",
      poses: [pose],
      tip: { x: 0, y: 0, z: tipZ },
    },
  });
}

function odomFrame(seq: number): string {
  return JSON.stringify({
    op: "publish",
    topic: topics.vehicleOdom,
    msg: {
      seq,
      stamp: seq * 0.05,
      frame: "render",
      pose: { position: { x: 0, y: 0, z: 0 }, orientation: { w: 1, x: 0, y: 0, z: 0 } },
      twist: { linear: { x: 0, y: 0, z: 0 }, angular: { x: 0, y: 0, z: 0 } },
    },
  });
}

describe("ScenePresentation", () => {
  it("becomes renderable after odom + one limb frame", () => {
    const p = new ScenePresentation();
    expect(p.renderable).toBe(false);
    p.apply(odomFrame(1));
    expect(p.renderable).toBe(false);
    p.apply(segmentsFrame(0, 1));
    expect(p.renderable).toBe(true);
  });

  it("never regresses on stale or duplicate seq", () => {
    const p = new ScenePresentation();
    expect(p.apply(segmentsFrame(0, 5, 1.0))).toBe(true);
    expect(p.apply(segmentsFrame(0, 5, 9.9))).toBe(false); // duplicate
    expect(p.apply(segmentsFrame(0, 3, 9.9))).toBe(false); // regression
    expect(p.limbs[0]?.tip.z).toBe(1.0);
    expect(p.framesStale).toBe(2);
    expect(p.apply(segmentsFrame(0, 6, 2.0))).toBe(true);
    expect(p.limbs[0]?.tip.z).toBe(2.0);
  });

  it("tracks seq per topic independently", () => {
    const p = new ScenePresentation();
    expect(p.apply(segmentsFrame(0, 10))).toBe(true);
    expect(p.apply(segmentsFrame(1, 2))).toBe(true); // other limb, lower seq ok
  });

  it("counts malformed frames without throwing", () => {
    const p = new ScenePresentation();
    expect(p.apply("not json")).toBe(false);
    expect(p.apply("[1,2,3]")).toBe(false);
    expect(p.apply(JSON.stringify({ op: "publish", topic: "/x" }))).toBe(false);
    expect(p.framesMalformed).toBe(3);
  });

  it("routes status frames to the listener", () => {
    const seen: string[] = [];
    const p = new ScenePresentation({ onStatus: (s) => seen.push(s.msg) });
    p.apply(JSON.stringify({ op: "status", level: "error", msg: "boom" }));
    expect(seen).toEqual(["boom"]);
  });
});
