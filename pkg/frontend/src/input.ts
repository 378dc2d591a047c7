// Keyboard and gamepad capture, mapped to a throttle axis in [-1, 1].
// Up arrow / W accelerates, down arrow / S brakes; a connected gamepad's
// triggers or left stick override the keyboard when touched.

export class InputManager {
  private keys: { [code: string]: boolean } = {};

  constructor(target: Window = window) {
    target.addEventListener("keydown", (event) => {
      this.keys[(event as KeyboardEvent).code.toLowerCase()] = true;
    });
    target.addEventListener("keyup", (event) => {
      this.keys[(event as KeyboardEvent).code.toLowerCase()] = false;
    });
  }

  private keyboardAxis(): number {
    let value = 0;
    if (this.keys["arrowup"] || this.keys["keyw"]) value += 1;
    if (this.keys["arrowdown"] || this.keys["keys"]) value -= 1;
    return value;
  }

  private gamepadAxis(): number | null {
    const pads = navigator.getGamepads?.() ?? [];
    const gp = pads.find(Boolean);
    if (!gp) return null;
    const throttle = gp.buttons?.[7]?.value ?? 0; // right trigger
    const brake = gp.buttons?.[6]?.value ?? 0; // left trigger
    const stick = -(gp.axes?.[1] ?? 0); // left stick, up is positive
    const deadzone = 0.08;
    let value = throttle - brake;
    if (Math.abs(value) < deadzone) {
      value = Math.abs(stick) < deadzone ? 0 : stick;
    }
    return Math.abs(value) < deadzone ? null : value;
  }

  // Current throttle in [-1, 1]; at most one message per frame is sent
  // from the value returned here.
  capture(): number {
    const pad = this.gamepadAxis();
    const raw = pad ?? this.keyboardAxis();
    return Math.max(-1, Math.min(1, raw));
  }
}
