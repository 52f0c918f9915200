import { mount } from "./app";

const root = document.querySelector<HTMLElement>("#app");
if (root) {
  mount(root).catch((err) => {
    root.textContent = `Could not reach the game server: ${
      err instanceof Error ? err.message : String(err)
    }`;
  });
}
