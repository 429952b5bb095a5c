/**
 * The 0-100 stage map: latest person positions plus the position-trigger
 * zones of the loaded scene drawn to a square canvas.
 */

import type { PersonDot, SceneDoc } from "./types.js";

export interface Zone {
  flowId: string;
  x: number;
  y: number;
  radius: number;
  enabled: boolean;
}

export function zonesFromScene(scene: SceneDoc | null): Zone[] {
  if (scene === null) {
    return [];
  }
  const zones: Zone[] = [];
  for (const flow of scene.flows) {
    if ("near" in flow.when) {
      zones.push({
        flowId: flow.id,
        x: flow.when.near.x,
        y: flow.when.near.y,
        radius: flow.when.near.radius,
        enabled: flow.enabled,
      });
    }
  }
  return zones;
}

export function drawStageMap(
  ctx: CanvasRenderingContext2D,
  size: number,
  zones: Zone[],
  positions: Iterable<PersonDot>,
): void {
  const scale = size / 100;
  ctx.clearRect(0, 0, size, size);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, size, size);

  ctx.strokeStyle = "#232a38";
  ctx.lineWidth = 1;
  for (let grid = 10; grid < 100; grid += 10) {
    ctx.beginPath();
    ctx.moveTo(grid * scale, 0);
    ctx.lineTo(grid * scale, size);
    ctx.moveTo(0, grid * scale);
    ctx.lineTo(size, grid * scale);
    ctx.stroke();
  }

  for (const zone of zones) {
    ctx.beginPath();
    ctx.arc(zone.x * scale, zone.y * scale, zone.radius * scale, 0, Math.PI * 2);
    ctx.fillStyle = zone.enabled ? "rgba(86, 156, 214, 0.18)" : "rgba(120, 120, 120, 0.10)";
    ctx.fill();
    ctx.strokeStyle = zone.enabled ? "#569cd6" : "#666";
    ctx.stroke();
    ctx.fillStyle = zone.enabled ? "#9ecbff" : "#888";
    ctx.font = "11px system-ui, sans-serif";
    ctx.fillText(zone.flowId, zone.x * scale + 4, zone.y * scale - zone.radius * scale - 4);
  }

  for (const person of positions) {
    ctx.beginPath();
    ctx.arc(person.x * scale, person.y * scale, 6, 0, Math.PI * 2);
    ctx.fillStyle = "#e8b339";
    ctx.fill();
    ctx.fillStyle = "#ffe9b8";
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillText(String(person.id), person.x * scale + 8, person.y * scale + 4);
  }
}
