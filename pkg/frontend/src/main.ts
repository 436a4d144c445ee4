// Console entry point: wires connection, input, presentation, renderer and
// the HUD panels together. Bridge URL via ?bridge=ws://host:port.

import * as THREE from "three";

import { ConsoleSession } from "./connection.js";
import { InputMapper, gamepadToDevice, idleDevice, keysToDevice } from "./input.js";
import { ScenePresentation } from "./presentation.js";
import { RobotView } from "./render.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

const params = new URLSearchParams(window.location.search);
const bridgeUrl = params.get("bridge") ?? "ws://127.0.0.1:9090";

const banner = el("banner");
const panel = el("panel");
const forces = el("forces");

const presentation = new ScenePresentation({
  onStatus: (status) => {
    if (status.level === "error") console.warn("bridge:", status.msg);
  },
});
const session = new ConsoleSession(bridgeUrl, presentation, {
  wsFactory: (url) => new WebSocket(url) as never,
  onStateChange: (state) => {
    banner.textContent =
      state === "connected" ? `connected to ${bridgeUrl}` : `${state} — ${bridgeUrl}`;
    banner.className = state;
  },
});
session.connect();

// --- renderer -------------------------------------------------------------

const scene = new THREE.Scene();
scene.background = new THREE.Color(0x0a1a28);
scene.add(new THREE.AmbientLight(0xffffff, 0.5));
const sun = new THREE.DirectionalLight(0xbbddff, 1.2);
sun.position.set(2, 6, -3);
scene.add(sun);
scene.add(new THREE.GridHelper(20, 40, 0x224455, 0x113344));

const robot = new RobotView();
scene.add(robot.root);

const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setSize(window.innerWidth, window.innerHeight);
document.body.appendChild(renderer.domElement);
const camera = new THREE.PerspectiveCamera(
  60, window.innerWidth / window.innerHeight, 0.01, 100);
camera.position.set(1.8, 1.4, -1.6);

window.addEventListener("resize", () => {
  camera.aspect = window.innerWidth / window.innerHeight;
  camera.updateProjectionMatrix();
  renderer.setSize(window.innerWidth, window.innerHeight);
});

// --- input ----------------------------------------------------------------

const mapper = new InputMapper();
const keysDown = new Set<string>();
let tabEdge = false;
let prevButtons: boolean[] = [];

window.addEventListener("keydown", (ev) => {
  if (ev.key === "Tab") {
    tabEdge = true;
    ev.preventDefault();
    return;
  }
  keysDown.add(ev.key.length === 1 ? ev.key.toLowerCase() : ev.key);
});
window.addEventListener("keyup", (ev) => {
  keysDown.delete(ev.key.length === 1 ? ev.key.toLowerCase() : ev.key);
});

function pollInput(nowMs: number): void {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  const pad = Array.from(pads).find((p) => p && p.connected) ?? null;
  let device = idleDevice();
  if (pad) {
    device = gamepadToDevice(pad, prevButtons);
    prevButtons = pad.buttons.map((b) => b.pressed);
  } else {
    device = keysToDevice(keysDown, tabEdge);
    tabEdge = false;
  }
  for (const frame of mapper.update(device, nowMs)) {
    session.sendCommand(frame.payload);
  }
}

// --- HUD --------------------------------------------------------------------

function refreshPanel(): void {
  const s = presentation.scenario;
  const lines = [
    `limb selected: ${mapper.selectedLimb}  (Tab / d-pad to cycle)`,
    `sim time: ${presentation.simTime.toFixed(2)} s`,
    s && s.kind
      ? `scenario: ${s.kind}  running=${s.running}  success=${s.success}` +
        `  elapsed=${s.elapsed.toFixed(1)}s` +
        (s.path_length != null ? `  path=${s.path_length.toFixed(2)}m` : "")
      : "scenario: idle",
    `frames: ${presentation.framesAccepted} accepted, ${presentation.framesStale} stale dropped`,
  ];
  panel.textContent = lines.join("\n");
  const f0 = presentation.haptics[0];
  const f1 = presentation.haptics[1];
  forces.textContent =
    `tip force Arm1: ${f0 ? f0.magnitude.toFixed(2) : "-"} N   ` +
    `Arm2: ${f1 ? f1.magnitude.toFixed(2) : "-"} N`;
}

// --- loop -------------------------------------------------------------------

function tick(nowMs: number): void {
  pollInput(nowMs);
  robot.sync(presentation);
  refreshPanel();
  renderer.render(scene, camera);
  requestAnimationFrame(tick);
}
requestAnimationFrame(tick);
