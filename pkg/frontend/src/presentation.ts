// Presentation state: the last accepted frame per topic, seq-filtered.
//
// The console is a pure protocol client: everything it displays is traceable
// to a received topic frame, and out-of-order frames never regress the
// display (a frame with seq <= the last seen on its topic is dropped).

import {
  ContactsMsg,
  HapticMsg,
  InboundFrame,
  LIMB_COUNT,
  OdomMsg,
  ScenarioMsg,
  SegmentsMsg,
  StatusFrame,
  topics,
} from "./protocol.js";

export interface PresentationListener {
  onChange?: () => void;
  onStatus?: (status: StatusFrame) => void;
}

export class ScenePresentation {
  lastSeq = new Map<string, number>();
  limbs: (SegmentsMsg | null)[] = Array(LIMB_COUNT).fill(null);
  haptics: (HapticMsg | null)[] = [null, null];
  odom: OdomMsg | null = null;
  contacts: ContactsMsg | null = null;
  scenario: ScenarioMsg | null = null;
  simTime = 0;
  framesAccepted = 0;
  framesStale = 0;
  framesMalformed = 0;

  private listener: PresentationListener;

  constructor(listener: PresentationListener = {}) {
    this.listener = listener;
  }

  /** True once there is enough data to draw the robot. */
  get renderable(): boolean {
    return this.odom !== null && this.limbs.some((l) => l !== null);
  }

  apply(raw: string): boolean {
    let frame: InboundFrame | null = null;
    try {
      frame = JSON.parse(raw);
    } catch {
      frame = null;
    }
    if (!frame || typeof frame !== "object" || !("op" in frame)) {
      this.framesMalformed++;
      return false;
    }
    if (frame.op === "status") {
      this.listener.onStatus?.(frame as StatusFrame);
      return true;
    }
    if (frame.op !== "publish") {
      this.framesMalformed++;
      return false;
    }
    const { topic, msg } = frame as { topic: string; msg: { seq?: number } };
    if (typeof topic !== "string" || !msg || typeof msg.seq !== "number") {
      this.framesMalformed++;
      return false;
    }
    const last = this.lastSeq.get(topic);
    if (last !== undefined && msg.seq <= last) {
      this.framesStale++;
      return false; // never regress the display
    }
    this.lastSeq.set(topic, msg.seq);
    this.route(topic, msg);
    this.framesAccepted++;
    this.listener.onChange?.();
    return true;
  }

  private route(topic: string, msg: unknown): void {
    for (let i = 0; i < LIMB_COUNT; i++) {
      if (topic === topics.limbSegments(i)) {
        this.limbs[i] = msg as SegmentsMsg;
        this.simTime = (msg as SegmentsMsg).stamp;
        return;
      }
    }
    for (let i = 0; i < 2; i++) {
      if (topic === topics.limbHaptic(i)) {
        this.haptics[i] = msg as HapticMsg;
        return;
      }
    }
    if (topic === topics.vehicleOdom) {
      this.odom = msg as OdomMsg;
    } else if (topic === topics.contacts) {
      this.contacts = msg as ContactsMsg;
    } else if (topic === topics.scenarioState) {
      this.scenario = msg as ScenarioMsg;
    } else if (topic === topics.clock) {
      this.simTime = (msg as { sim_time: number }).sim_time;
    }
  }
}
