// Operator input: gamepad sticks or keyboard, mapped to limb and vehicle
// commands. One limb is selected for fine control at a time; command frames
// are throttled to at most 50 Hz regardless of how often the devices poll.

import { LIMB_COUNT, publishFrame, topics } from "./protocol.js";

export const DEAD_ZONE = 0.08;
export const COMMAND_INTERVAL_MS = 20; // 50 Hz cap

export interface DeviceState {
  // Normalized [-1, 1]; gamepad convention: stick up is negative ay.
  limbAxes: [number, number];
  surge: number;
  sway: number;
  heave: number;
  yawRate: number;
  grip: boolean;
  selectLimbDelta: number; // -1 / 0 / +1 edge-triggered by the caller
}

export function idleDevice(): DeviceState {
  return {
    limbAxes: [0, 0],
    surge: 0,
    sway: 0,
    heave: 0,
    yawRate: 0,
    grip: false,
    selectLimbDelta: 0,
  };
}

function clampUnit(v: number): number {
  return v < -1 ? -1 : v > 1 ? 1 : v;
}

/** Radial dead-zone: a stick inside the zone reads exactly (0, 0). */
export function applyDeadZone(x: number, y: number, zone = DEAD_ZONE): [number, number] {
  const mag = Math.hypot(x, y);
  if (mag < zone) return [0, 0];
  return [clampUnit(x), clampUnit(y)];
}

export interface CommandFrame {
  topic: string;
  payload: string;
}

export class InputMapper {
  selectedLimb = 0;
  private lastSentMs = -Infinity;

  /** Map a device snapshot to command frames, throttled to <= 50 Hz. */
  update(device: DeviceState, nowMs: number): CommandFrame[] {
    if (device.selectLimbDelta !== 0) {
      this.selectedLimb =
        (this.selectedLimb + device.selectLimbDelta + LIMB_COUNT) % LIMB_COUNT;
    }
    if (nowMs - this.lastSentMs < COMMAND_INTERVAL_MS) return [];
    this.lastSentMs = nowMs;

    const [ax, ay] = applyDeadZone(device.limbAxes[0], device.limbAxes[1]);
    const [sway, surge] = applyDeadZone(device.sway, device.surge);
    const heave = Math.abs(device.heave) < DEAD_ZONE ? 0 : clampUnit(device.heave);
    const yawRate = Math.abs(device.yawRate) < DEAD_ZONE ? 0 : clampUnit(device.yawRate);

    return [
      {
        topic: topics.limbCmd(this.selectedLimb),
        payload: publishFrame(topics.limbCmd(this.selectedLimb), { axes: [ax, ay] }),
      },
      {
        topic: topics.vehicleCmd,
        payload: publishFrame(topics.vehicleCmd, {
          surge,
          sway,
          heave,
          yaw_rate: yawRate,
          grip: device.grip,
        }),
      },
    ];
  }
}

/** Standard-mapping gamepad snapshot -> device state. */
export function gamepadToDevice(pad: Gamepad, prevButtons: boolean[]): DeviceState {
  const btn = (i: number) => pad.buttons[i]?.pressed ?? false;
  const axis = (i: number) => pad.axes[i] ?? 0;
  // Left stick: selected limb (stick up bends "up": ay = -axes[1]).
  // Right stick: vehicle sway/surge. Bumpers: yaw. Triggers: heave.
  const device = idleDevice();
  device.limbAxes = [axis(0), -axis(1)];
  device.sway = axis(2);
  device.surge = -axis(3);
  device.yawRate = (btn(5) ? 1 : 0) - (btn(4) ? 1 : 0);
  const lt = pad.buttons[6]?.value ?? 0;
  const rt = pad.buttons[7]?.value ?? 0;
  device.heave = rt - lt;
  device.grip = btn(0);
  const upEdge = btn(12) && !prevButtons[12];
  const downEdge = btn(13) && !prevButtons[13];
  device.selectLimbDelta = (downEdge ? 1 : 0) - (upEdge ? 1 : 0);
  return device;
}

/** Keyboard fallback: WASD vehicle, arrows limb, R/F heave, Q/E yaw,
 *  space grip, Tab cycles the selected limb. */
export function keysToDevice(down: Set<string>, tabEdge: boolean): DeviceState {
  const device = idleDevice();
  const k = (key: string) => down.has(key);
  device.limbAxes = [
    (k("ArrowRight") ? 1 : 0) - (k("ArrowLeft") ? 1 : 0),
    (k("ArrowUp") ? 1 : 0) - (k("ArrowDown") ? 1 : 0),
  ];
  device.surge = (k("w") ? 1 : 0) - (k("s") ? 1 : 0);
  device.sway = (k("d") ? 1 : 0) - (k("a") ? 1 : 0);
  device.heave = (k("r") ? 1 : 0) - (k("f") ? 1 : 0);
  device.yawRate = (k("e") ? 1 : 0) - (k("q") ? 1 : 0);
  device.grip = k(" ");
  device.selectLimbDelta = tabEdge ? 1 : 0;
  return device;
}
