import type { CommandResult, ServerEvent, SessionOpened, Snapshot } from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
  baseUrl?: string;
  fetchImpl?: FetchLike;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

const JSON_HEADERS = { "content-type": "application/json" };

async function errorDetail(res: Response): Promise<string> {
  try {
    const doc = (await res.json()) as { detail?: unknown };
    if (typeof doc.detail === "string") return doc.detail;
  } catch {
    // non-JSON error body; fall through
  }
  return `request failed with status ${res.status}`;
}

/** Parse one SSE frame ("data: ..." lines) into a server event. */
export function parseSseFrame(frame: string): ServerEvent | null {
  const data = frame
    .split("\n")
    .filter((line) => line.startsWith("data:"))
    .map((line) => line.slice(5).trimStart())
    .join("\n");
  if (!data) return null;
  try {
    return JSON.parse(data) as ServerEvent;
  } catch {
    return null;
  }
}

/** Read an event-stream body to the end, dispatching each complete frame. */
export async function pumpEventStream(
  body: ReadableStream<Uint8Array>,
  onEvent: (event: ServerEvent) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let cut: number;
    while ((cut = buffer.indexOf("\n\n")) !== -1) {
      const event = parseSseFrame(buffer.slice(0, cut));
      buffer = buffer.slice(cut + 2);
      if (event) onEvent(event);
    }
  }
}

export class GameClient {
  private readonly base: string;
  private readonly doFetch: FetchLike;

  constructor(options: ClientOptions = {}) {
    this.base = (options.baseUrl ?? "").replace(/\/+$/, "");
    const impl = options.fetchImpl;
    this.doFetch = impl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.doFetch(this.base + path, init);
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  openSession(body: Record<string, unknown> = {}): Promise<SessionOpened> {
    return this.request<SessionOpened>("/sessions", {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify(body),
    });
  }

  sendCommand(sessionId: string, text: string): Promise<CommandResult> {
    return this.request<CommandResult>(`/sessions/${sessionId}/command`, {
      method: "POST",
      headers: JSON_HEADERS,
      body: JSON.stringify({ text }),
    });
  }

  fetchSnapshot(sessionId: string): Promise<Snapshot> {
    return this.request<Snapshot>(`/sessions/${sessionId}/snapshot`);
  }

  /**
   * Subscribe to the session's event stream. The server replays the whole
   * transcript on connect, so subscribing late loses nothing. Returns a
   * function that closes the stream.
   */
  subscribe(sessionId: string, onEvent: (event: ServerEvent) => void): () => void {
    const controller = new AbortController();
    this.doFetch(`${this.base}/sessions/${sessionId}/events`, {
      headers: { accept: "text/event-stream" },
      signal: controller.signal,
    })
      .then((res) => {
        if (!res.ok || !res.body) throw new ApiError(res.status, "event stream unavailable");
        return pumpEventStream(res.body, onEvent);
      })
      .catch((err) => {
        if (!controller.signal.aborted) {
          console.error("event stream dropped", err);
        }
      });
    return () => controller.abort();
  }
}
