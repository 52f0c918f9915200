import type { Snapshot } from "./types";

export function carriedNames(snapshot: Snapshot): string[] {
  return snapshot.world.nodes
    .filter((n) => n.parent === snapshot.world.player)
    .map((n) => n.name)
    .sort((a, b) => a.localeCompare(b));
}

export function renderInventory(list: HTMLElement, snapshot: Snapshot): void {
  list.replaceChildren();
  const names = carriedNames(snapshot);
  if (names.length === 0) {
    const empty = document.createElement("li");
    empty.className = "inventory__empty";
    empty.textContent = "(nothing)";
    list.append(empty);
    return;
  }
  for (const name of names) {
    const entry = document.createElement("li");
    entry.className = "inventory__item";
    entry.textContent = name;
    list.append(entry);
  }
}
