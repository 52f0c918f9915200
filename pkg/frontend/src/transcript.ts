import type { ServerEvent } from "./types";

const STATUS_CLASS: Record<string, string> = {
  executed: "transcript__line--ok",
  blocked: "transcript__line--blocked",
  unknown: "transcript__line--unknown",
  engine: "transcript__line--engine",
};

/**
 * The transcript pane renders exclusively from server events, so whatever is
 * on screen is exactly what the server broadcast — commands typed in another
 * tab show up too.
 */
export class TranscriptView {
  private readonly pane: HTMLElement;

  constructor(pane: HTMLElement) {
    this.pane = pane;
  }

  append(event: ServerEvent): void {
    if (event.type === "session") {
      this.push(event.display, "transcript__line--scene", "scene");
    } else {
      const echo = this.push(`> ${event.text}`, "transcript__line--echo", "echo");
      echo.dataset.text = event.text;
      const result = event.result;
      if (result.display) {
        const line = this.push(result.display, STATUS_CLASS[result.status] ?? "", "display");
        line.dataset.status = result.status;
      }
      for (const reason of result.reasons) {
        this.push(`  - ${reason}`, "transcript__line--reason", "reason");
      }
    }
    this.pane.scrollTop = this.pane.scrollHeight;
  }

  notice(text: string): void {
    this.push(text, "transcript__line--notice", "notice");
    this.pane.scrollTop = this.pane.scrollHeight;
  }

  private push(text: string, extraClass: string, kind: string): HTMLPreElement {
    const line = document.createElement("pre");
    line.className = extraClass ? `transcript__line ${extraClass}` : "transcript__line";
    line.dataset.kind = kind;
    line.textContent = text;
    this.pane.append(line);
    return line;
  }
}
