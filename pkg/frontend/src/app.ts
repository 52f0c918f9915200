import { GameClient, type ClientOptions } from "./api";
import { renderInventory } from "./inventory";
import { renderMap } from "./map";
import { TranscriptView } from "./transcript";
import type { Snapshot } from "./types";

const TEMPLATE = `
  <div class="play">
    <section class="play__main">
      <div class="play__transcript transcript" data-play-transcript></div>
      <form class="play__form" data-play-form>
        <input
          class="play__input"
          data-play-input
          type="text"
          placeholder="What do you do?"
          autocomplete="off"
          spellcheck="false"
        />
        <button class="play__send" type="submit">Go</button>
      </form>
    </section>
    <aside class="play__side">
      <h2 class="play__heading">Map</h2>
      <div class="play__map map" data-play-map></div>
      <h2 class="play__heading">Inventory</h2>
      <ul class="play__inventory inventory" data-play-inventory></ul>
      <p class="play__status" data-play-status></p>
    </aside>
  </div>
`;

export interface AppHandle {
  sessionId: string;
  refresh(): Promise<void>;
  close(): void;
}

function statusLine(snapshot: Snapshot): string {
  const nodes = new Map(snapshot.world.nodes.map((n) => [n.id, n]));
  const player = nodes.get(snapshot.world.player);
  const room = player?.parent ? nodes.get(player.parent) : undefined;
  return room ? `turn ${snapshot.turn} — ${room.name}` : `turn ${snapshot.turn}`;
}

export async function mount(root: HTMLElement, options: ClientOptions = {}): Promise<AppHandle> {
  root.innerHTML = TEMPLATE;
  const pick = <T extends Element>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) throw new Error(`missing ${selector}`);
    return el;
  };
  const transcriptPane = pick<HTMLElement>("[data-play-transcript]");
  const mapPanel = pick<HTMLElement>("[data-play-map]");
  const inventoryList = pick<HTMLElement>("[data-play-inventory]");
  const status = pick<HTMLElement>("[data-play-status]");
  const form = pick<HTMLFormElement>("[data-play-form]");
  const input = pick<HTMLInputElement>("[data-play-input]");

  const client = new GameClient(options);
  const view = new TranscriptView(transcriptPane);

  const opened = await client.openSession();
  root.dataset.sessionId = opened.session_id;

  const refresh = async () => {
    const snapshot = await client.fetchSnapshot(opened.session_id);
    renderMap(mapPanel, snapshot);
    renderInventory(inventoryList, snapshot);
    status.textContent = statusLine(snapshot);
  };

  const unsubscribe = client.subscribe(opened.session_id, (event) => {
    view.append(event);
    if (event.type === "command") {
      // keep the side panels in step with whatever just happened
      refresh().catch((err) => console.error("snapshot refresh failed", err));
    }
  });

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    input.focus();
    // the result comes back through the event stream; the POST response
    // is only used to surface transport errors
    client.sendCommand(opened.session_id, text).catch((err) => {
      view.notice(err instanceof Error ? err.message : String(err));
    });
  });

  await refresh();
  input.focus();

  return {
    sessionId: opened.session_id,
    refresh,
    close: unsubscribe,
  };
}
