import { describe, expect, it } from "vitest";
import { ApiError, GameClient, parseSseFrame, pumpEventStream } from "../src/api";
import type { ServerEvent } from "../src/types";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

interface Recorded {
  input: string;
  init?: RequestInit;
}

function recordingFetch(responses: Response[]): { calls: Recorded[]; fetch: typeof fetch } {
  const calls: Recorded[] = [];
  const impl = async (input: string, init?: RequestInit) => {
    calls.push({ input, init });
    const next = responses.shift();
    if (!next) throw new Error("no canned response left");
    return next;
  };
  return { calls, fetch: impl as typeof fetch };
}

describe("GameClient", () => {
  it("opens a session against the sessions endpoint", async () => {
    const { calls, fetch } = recordingFetch([
      jsonResponse({ session_id: "abc", display: "You are here.", turn: 0 }, 201),
    ]);
    const client = new GameClient({ baseUrl: "http://game.test/", fetchImpl: fetch });
    const opened = await client.openSession();
    expect(opened.session_id).toBe("abc");
    expect(calls[0].input).toBe("http://game.test/sessions");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({});
  });

  it("posts command text and returns the result", async () => {
    const result = {
      status: "executed",
      display: "Done.",
      reasons: [],
      state_delta: [],
      turn: 1,
      action_id: "a0001",
    };
    const { calls, fetch } = recordingFetch([jsonResponse(result)]);
    const client = new GameClient({ fetchImpl: fetch });
    const got = await client.sendCommand("abc", "look");
    expect(got).toEqual(result);
    expect(calls[0].input).toBe("/sessions/abc/command");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ text: "look" });
  });

  it("surfaces the server's error detail", async () => {
    const { fetch } = recordingFetch([jsonResponse({ detail: "no such session" }, 404)]);
    const client = new GameClient({ fetchImpl: fetch });
    const err = await client.fetchSnapshot("nope").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.message).toBe("no such session");
  });

  it("falls back to a generic message for non-JSON errors", async () => {
    const { fetch } = recordingFetch([new Response("boom", { status: 500 })]);
    const client = new GameClient({ fetchImpl: fetch });
    const err = await client.sendCommand("abc", "look").catch((e) => e);
    expect(err.message).toBe("request failed with status 500");
  });
});

describe("parseSseFrame", () => {
  it("reads the data line", () => {
    const event = parseSseFrame('data: {"type": "session", "session_id": "s", "display": "hi"}');
    expect(event).toEqual({ type: "session", session_id: "s", display: "hi" });
  });

  it("ignores frames without data", () => {
    expect(parseSseFrame(": keepalive")).toBeNull();
    expect(parseSseFrame("")).toBeNull();
  });

  it("ignores unparseable payloads", () => {
    expect(parseSseFrame("data: not json")).toBeNull();
  });
});

describe("pumpEventStream", () => {
  function streamOf(chunks: string[]): ReadableStream<Uint8Array> {
    const encoder = new TextEncoder();
    return new ReadableStream({
      start(controller) {
        for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
        controller.close();
      },
    });
  }

  it("reassembles frames split across chunks", async () => {
    const frame = 'data: {"type": "command", "text": "look", "result": {"status": "executed", "display": "x", "reasons": [], "state_delta": [], "turn": 1, "action_id": null}}\n\n';
    const events: ServerEvent[] = [];
    await pumpEventStream(streamOf([frame.slice(0, 25), frame.slice(25, 60), frame.slice(60)]), (e) =>
      events.push(e),
    );
    expect(events).toHaveLength(1);
    expect(events[0].type).toBe("command");
  });

  it("dispatches every frame in a burst", async () => {
    const burst =
      'data: {"type": "session", "session_id": "s", "display": "a"}\n\n' +
      'data: {"type": "session", "session_id": "s", "display": "b"}\n\n';
    const events: ServerEvent[] = [];
    await pumpEventStream(streamOf([burst]), (e) => events.push(e));
    expect(events.map((e) => (e.type === "session" ? e.display : ""))).toEqual(["a", "b"]);
  });

  it("drops a trailing partial frame", async () => {
    const events: ServerEvent[] = [];
    await pumpEventStream(streamOf(['data: {"type": "session"']), (e) => events.push(e));
    expect(events).toHaveLength(0);
  });
});
