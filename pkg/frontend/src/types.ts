export type NodeKind = "room" | "item" | "container" | "character" | "player";

export interface WorldNode {
  id: string;
  kind: NodeKind;
  name: string;
  parent: string | null;
  attributes: Record<string, boolean | number>;
  aliases: string[];
  description: string;
}

export interface GridCell {
  room: string;
  x: number;
  y: number;
}

export interface Snapshot {
  turn: number;
  seed: number;
  world: {
    player: string;
    nodes: WorldNode[];
    grid: GridCell[];
    placement_order: string[];
    currency: { id: string; amount: number }[];
  };
  story: {
    action_id: string | null;
    index: number;
    sentence: string;
    error_type: string | null;
    reason: string | null;
  }[];
  history: unknown[];
  registry: unknown[];
}

export type CommandStatus = "executed" | "blocked" | "unknown" | "engine";

export interface CommandResult {
  status: CommandStatus;
  display: string;
  reasons: string[];
  state_delta: string[];
  turn: number;
  action_id: string | null;
}

export interface SessionOpened {
  session_id: string;
  display: string;
  turn: number;
}

export type ServerEvent =
  | { type: "session"; session_id: string; display: string }
  | { type: "command"; text: string; result: CommandResult };
