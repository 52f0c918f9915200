import type { Snapshot } from "./types";

export interface MapCell {
  room: string;
  name: string;
  x: number;
  y: number;
  column: number;
  row: number;
  here: boolean;
}

// Rooms sit on an integer grid with north as +y, so y flips for CSS rows.
export function layoutMap(snapshot: Snapshot): MapCell[] {
  const grid = snapshot.world.grid;
  if (grid.length === 0) return [];
  const names = new Map(snapshot.world.nodes.map((n) => [n.id, n.name]));
  const player = snapshot.world.nodes.find((n) => n.id === snapshot.world.player);
  const here = player?.parent ?? null;
  const minX = Math.min(...grid.map((c) => c.x));
  const maxY = Math.max(...grid.map((c) => c.y));
  return grid.map((cell) => ({
    room: cell.room,
    name: names.get(cell.room) ?? cell.room,
    x: cell.x,
    y: cell.y,
    column: cell.x - minX + 1,
    row: maxY - cell.y + 1,
    here: cell.room === here,
  }));
}

export function renderMap(panel: HTMLElement, snapshot: Snapshot): void {
  panel.replaceChildren();
  for (const cell of layoutMap(snapshot)) {
    const el = document.createElement("div");
    el.className = cell.here ? "map__cell map__cell--here" : "map__cell";
    el.style.gridColumn = String(cell.column);
    el.style.gridRow = String(cell.row);
    el.dataset.room = cell.room;
    el.dataset.x = String(cell.x);
    el.dataset.y = String(cell.y);
    el.textContent = cell.name;
    panel.append(el);
  }
}
