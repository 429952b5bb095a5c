/**
 * Client-side range validation mirroring the engine's rules, so no UI
 * control can emit a command the server would reject.
 */

export const MAX_MEMORIES = 20;
export const MAX_CUE_SLOTS = 8;
export const MAX_DISTANCE = 100 * Math.SQRT2;

export function validMemoryIndex(index: number): boolean {
  return Number.isInteger(index) && index >= 1 && index <= MAX_MEMORIES;
}

export function validCueSlot(slot: number): boolean {
  return Number.isInteger(slot) && slot >= 1 && slot <= MAX_CUE_SLOTS;
}

export function validLampState(state: {
  brightness: number;
  hue: number;
  saturation: number;
}): string | null {
  if (!(state.brightness >= 0 && state.brightness <= 100)) {
    return `brightness must be in [0, 100], got ${state.brightness}`;
  }
  if (!(state.hue >= 0 && state.hue < 360)) {
    return `hue must be in [0, 360), got ${state.hue}`;
  }
  if (!(state.saturation >= 0 && state.saturation <= 100)) {
    return `saturation must be in [0, 100], got ${state.saturation}`;
  }
  return null;
}

export function validZone(zone: { x: number; y: number; radius: number }): string | null {
  if (!(zone.x >= 0 && zone.x <= 100 && zone.y >= 0 && zone.y <= 100)) {
    return `zone center must lie on the 0-100 grid`;
  }
  if (!(zone.radius > 0)) {
    return `zone radius must be > 0`;
  }
  return null;
}

export function validThreshold(threshold: number): string | null {
  if (!(threshold > 0 && threshold < MAX_DISTANCE)) {
    return `distance threshold must be in (0, ${MAX_DISTANCE.toFixed(3)})`;
  }
  return null;
}

export function validCooldown(ms: number): string | null {
  return Number.isInteger(ms) && ms >= 0 ? null : "cooldown must be a non-negative integer";
}
