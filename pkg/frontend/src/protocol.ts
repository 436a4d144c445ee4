// Wire types for the MARUN2 bridge (see PROTOCOL.md at the repo root).
// All geometry arrives in the render frame; the console does no frame math.

export interface WireVec3 {
  x: number;
  y: number;
  z: number;
}

export interface WireQuat {
  w: number;
  x: number;
  y: number;
  z: number;
}

export interface WirePose {
  position: WireVec3;
  orientation: WireQuat;
}

export interface SegmentsMsg {
  seq: number;
  stamp: number;
  frame: string;
  limb: number;
  limb_id: string;
  poses: WirePose[];
  tip: WireVec3;
}

export interface HapticMsg {
  seq: number;
  stamp: number;
  limb: number;
  limb_id: string;
  force: WireVec3;
  magnitude: number;
}

export interface OdomMsg {
  seq: number;
  stamp: number;
  pose: WirePose;
  twist: { linear: WireVec3; angular: WireVec3 };
}

export interface ContactEventMsg {
  phase: "enter" | "stay" | "exit";
  body_a: string;
  body_b: string;
  point: WireVec3;
  normal: WireVec3;
  penetration: number;
  impulse: number;
  force: number;
}

export interface ContactsMsg {
  seq: number;
  stamp: number;
  events: ContactEventMsg[];
}

export interface SceneObjectMsg {
  id: string;
  shape: { kind: string; [dim: string]: unknown };
  kinematic: boolean;
  position: WireVec3;
  orientation: WireQuat;
}

export interface ScenarioMsg {
  seq: number;
  stamp: number;
  running: boolean;
  kind: string | null;
  elapsed: number;
  success: boolean;
  time_limit: number | null;
  path_length: number | null;
  grip: boolean;
  objects: SceneObjectMsg[];
}

export interface ClockMsg {
  seq: number;
  sim_time: number;
  step: number;
}

export type TopicMsg =
  | SegmentsMsg
  | HapticMsg
  | OdomMsg
  | ContactsMsg
  | ScenarioMsg
  | ClockMsg;

export interface PublishFrame {
  op: "publish";
  topic: string;
  msg: Record<string, unknown>;
}

export interface StatusFrame {
  op: "status";
  level: string;
  msg: string;
  id?: string;
}

export type InboundFrame = (PublishFrame & { msg: TopicMsg }) | StatusFrame;

export const LIMB_COUNT = 4;

export const topics = {
  limbCmd: (i: number) => `/ursula/limb/${i}/cmd`,
  limbSegments: (i: number) => `/ursula/limb/${i}/segments`,
  limbHaptic: (i: number) => `/ursula/limb/${i}/haptic`,
  vehicleCmd: "/ursula/vehicle/cmd",
  vehicleOdom: "/ursula/vehicle/odom",
  contacts: "/ursula/contacts",
  clock: "/marun/clock",
  scenarioState: "/marun/scenario/state",
};

export function subscriptionList(): string[] {
  const out: string[] = [];
  for (let i = 0; i < LIMB_COUNT; i++) out.push(topics.limbSegments(i));
  for (let i = 0; i < 2; i++) out.push(topics.limbHaptic(i));
  out.push(topics.vehicleOdom, topics.contacts, topics.scenarioState, topics.clock);
  return out;
}

export function parseFrame(data: string): InboundFrame | null {
  let obj: unknown;
  try {
    obj = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const frame = obj as { op?: unknown };
  if (frame.op === "publish" || frame.op === "status") return obj as InboundFrame;
  return null;
}

export function subscribeFrame(topic: string): string {
  return JSON.stringify({ op: "subscribe", topic });
}

export function publishFrame(topic: string, msg: Record<string, unknown>): string {
  return JSON.stringify({ op: "publish", topic, msg });
}
