// End-to-end: the console against a live simulator core.
//
// Spawns `python3 -m marun2.cli --mode serve` (the package must be installed)
// and drives a ConsoleSession through it with a scripted gamepad stream.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { ConsoleSession, WsLike } from "../src/connection.js";
import { InputMapper, idleDevice } from "../src/input.js";
import { ScenePresentation } from "../src/presentation.js";
import { RobotView } from "../src/render.js";

const PORT = 9300 + Math.floor(Math.random() * 500);
const URL = `ws://127.0.0.1:${PORT}`;

let core: ChildProcess;

function wsFactory(url: string): WsLike {
  return new WebSocket(url) as unknown as WsLike;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(cond: () => boolean, timeoutMs: number, what: string): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (cond()) return;
    await sleep(10);
  }
  throw new Error(`timeout waiting for ${what}`);
}

beforeAll(async () => {
  core = spawn("python3", ["-u", "-m", "marun2.cli", "--mode", "serve",
                           "--bind", `127.0.0.1:${PORT}`],
               { stdio: ["ignore", "pipe", "pipe"] });
  let banner = "";
  core.stdout?.on("data", (chunk) => { banner += String(chunk); });
  core.stderr?.on("data", (chunk) => { banner += String(chunk); });
  await waitFor(() => banner.includes("serving"), 15000, `core startup (${banner})`);
}, 20000);

afterAll(() => {
  core?.kill("SIGTERM");
});

describe("console against a live core", () => {
  it("renders within 2 frames, moves the limb, bounds command rate, rejects stale seq", async () => {
    const presentation = new ScenePresentation();
    // Track how many first-arrival frames of the prerequisite topics (odom +
    // any segments) the console needed before the robot was drawable: it must
    // be exactly the two firsts — the console buffers nothing beyond them.
    let prerequisiteFirsts = 0;
    let renderableAtFirsts = -1;
    const seenTopics = new Set<string>();
    const session = new ConsoleSession(URL, presentation, { wsFactory });

    const origApply = presentation.apply.bind(presentation);
    presentation.apply = (raw: string) => {
      let topic = "";
      try {
        topic = JSON.parse(raw).topic ?? "";
      } catch {
        topic = "";
      }
      const category = topic === "/ursula/vehicle/odom" ? "odom"
        : /segments$/.test(topic) ? "segments" : null;
      const ok = origApply(raw);
      if (ok && category && !seenTopics.has(category)) {
        seenTopics.add(category);
        prerequisiteFirsts++;
        if (renderableAtFirsts < 0 && presentation.renderable) {
          renderableAtFirsts = prerequisiteFirsts;
        }
      }
      return ok;
    };

    session.connect();
    await waitFor(() => session.state === "connected", 10000, "connection");
    await waitFor(() => presentation.renderable, 5000, "first renderable state");

    // Drawable after at most two prerequisite frames (one odom + one
    // segments), and the view reflects them on the very next sync tick.
    expect(renderableAtFirsts).toBeGreaterThan(0);
    expect(renderableAtFirsts).toBeLessThanOrEqual(2);
    const view = new RobotView();
    view.sync(presentation); // render tick 1 of 2 allowed
    const odom = presentation.odom!;
    expect(view.vehicle.position.x).toBe(odom.pose.position.x);
    expect(view.vehicle.position.y).toBe(odom.pose.position.y);
    expect(view.vehicle.position.z).toBe(odom.pose.position.z);

    const tipBefore = presentation.limbs[0]!.tip;

    // Scripted gamepad stream: full-right stick on limb 0 for 1.5 s at an
    // unthrottled 200 Hz poll rate.
    const mapper = new InputMapper();
    const t0 = Date.now();
    let commandFrames = 0;
    while (Date.now() - t0 < 1500) {
      const device = idleDevice();
      device.limbAxes = [1, 0];
      for (const frame of mapper.update(device, Date.now())) {
        if (session.sendCommand(frame.payload)) commandFrames++;
      }
      await sleep(5);
    }

    // Bounded command rate: <= 50 Hz per poll tick (2 frames per tick:
    // limb + vehicle), so <= 2 * 50 * 1.5 plus slack.
    expect(commandFrames).toBeLessThanOrEqual(2 * 50 * 1.5 + 10);
    expect(commandFrames).toBeGreaterThan(20);

    await waitFor(() => {
      const tip = presentation.limbs[0]?.tip;
      if (!tip) return false;
      const moved = Math.hypot(tip.x - tipBefore.x, tip.y - tipBefore.y,
                               tip.z - tipBefore.z);
      return moved > 0.1;
    }, 5000, "observable limb motion");

    // Seq regression never displayed: replay the freshest segments frame
    // with a stale seq and verify the displayed state is untouched.
    const live = presentation.limbs[0]!;
    const stale = {
      op: "publish",
      topic: `/ursula/limb/0/segments`,
      msg: { ...live, seq: 1, tip: { x: 99, y: 99, z: 99 } },
    };
    expect(presentation.apply(JSON.stringify(stale))).toBe(false);
    expect(presentation.limbs[0]!.tip.x).not.toBe(99);
    expect(presentation.framesStale).toBeGreaterThan(0);

    session.close();
  }, 30000);

  it("reconnect resumes rendering from the live seq", async () => {
    const presentation = new ScenePresentation();
    const session = new ConsoleSession(URL, presentation, {
      wsFactory,
      reconnectMinMs: 50,
    });
    session.connect();
    await waitFor(() => session.state === "connected", 10000, "connection");
    await waitFor(() => presentation.renderable, 5000, "renderable");
    const seqBefore = presentation.limbs.find((l) => l)?.seq ?? 0;

    // Kill the socket out from under the session; it must come back.
    (session as unknown as { ws: { close(): void } }).ws.close();
    await waitFor(() => session.state === "connected", 10000, "reconnection");
    await waitFor(() => {
      const seqNow = presentation.limbs.find((l) => l)?.seq ?? 0;
      return seqNow > seqBefore;
    }, 5000, "fresh frames after reconnect");
    session.close();
  }, 30000);
});
