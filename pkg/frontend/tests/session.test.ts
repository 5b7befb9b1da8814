import { describe, expect, it } from "vitest";

import { parseUvl, serializeUvl } from "../src/model.js";
import { applyOp, Envelope, SessionClient } from "../src/session.js";
import { emitEdit } from "../src/editor.js";
import { CAR_UVL } from "./fixtures.js";

class FakeChannel {
  sent: Envelope[] = [];
  send(message: Envelope): void {
    this.sent.push(message);
  }
}

function welcome(pid: string, editor = "p1", seq = 0): Envelope {
  return {
    type: "Welcome",
    sessionId: "s1",
    seq,
    payload: {
      participantId: pid,
      model: CAR_UVL,
      history: { applied: [], redo: [] },
      participants: { p1: "Alice", p2: "Bob" },
      editor,
      shareLink: "https://example.invalid/session#s1",
      constraintIds: [0],
      nextConstraintId: 1,
    },
  };
}

function broadcast(seq: number, op: Record<string, unknown>): Envelope {
  return { type: "ApplyOp", sessionId: "s1", seq, payload: { op } };
}

describe("session client", () => {
  it("joins and applies the Welcome snapshot", () => {
    const channel = new FakeChannel();
    const client = new SessionClient("Bob", channel);
    client.join("s1");
    expect(channel.sent[0]).toEqual({
      type: "Join",
      sessionId: "s1",
      payload: { name: "Bob" },
    });
    client.receive(welcome("p2"));
    expect(client.participantId).toBe("p2");
    expect(client.editor).toBe("p1");
    expect(client.isEditor).toBe(false);
    expect(serializeUvl(client.model!)).toBe(CAR_UVL);
  });

  it("two clients converge on seq-ordered broadcasts", () => {
    const host = new SessionClient("Alice", new FakeChannel());
    const guest = new SessionClient("Bob", new FakeChannel());
    host.receive(welcome("p1"));
    guest.receive(welcome("p2"));
    const messages = [
      broadcast(1, { kind: "CreateFeature", name: "Nav", parent: "Car", index: null }),
      broadcast(2, { kind: "SetMandatory", feature: "Nav", flag: true }),
      { type: "Undo", sessionId: "s1", seq: 3 } as Envelope,
      { type: "Redo", sessionId: "s1", seq: 4 } as Envelope,
    ];
    for (const m of messages) {
      host.receive(m);
      guest.receive(m);
    }
    expect(host.seq).toBe(4);
    expect(serializeUvl(host.model!)).toBe(serializeUvl(guest.model!));
    expect(serializeUvl(host.model!)).toContain("Nav");
  });

  it("undo restores the exact previous snapshot", () => {
    const client = new SessionClient("Alice", new FakeChannel());
    client.receive(welcome("p1"));
    const before = serializeUvl(client.model!);
    client.receive(broadcast(1, { kind: "Rename", feature: "Radio", newName: "Stereo" }));
    expect(serializeUvl(client.model!)).toContain("Stereo => Electric");
    client.receive({ type: "Undo", sessionId: "s1", seq: 2 });
    expect(serializeUvl(client.model!)).toBe(before);
  });

  it("tracks constraint ids across add/delete", () => {
    const client = new SessionClient("Alice", new FakeChannel());
    client.receive(welcome("p1"));
    client.receive(broadcast(1, { kind: "DeleteConstraint", constraint: 0 }));
    expect(client.model!.constraints).toEqual([]);
    client.receive(broadcast(2, { kind: "AddConstraint", formula: "Gas => !Radio" }));
    expect(client.constraintIds.ids).toEqual([1]);
    client.receive(broadcast(3, { kind: "EditConstraint", constraint: 1, formula: "!Gas" }));
    expect(client.model!.constraints).toEqual(["!Gas"]);
  });

  it("requests a resync on gaps or non-replayable ops", () => {
    const client = new SessionClient("Alice", new FakeChannel());
    client.receive(welcome("p1"));
    client.receive(broadcast(2, { kind: "AddConstraint", formula: "Gas" }));
    expect(client.resyncNeeded).toBe(true);

    const other = new SessionClient("Alice", new FakeChannel());
    other.receive(welcome("p1"));
    // Electric is referenced by a constraint: the relay slices, we cannot
    other.receive(broadcast(1, { kind: "DeleteFeature", feature: "Electric" }));
    expect(other.resyncNeeded).toBe(true);
  });

  it("reconnect recovers through a fresh Welcome", () => {
    const client = new SessionClient("Bob", new FakeChannel());
    client.receive(welcome("p2"));
    client.onDisconnect();
    expect(client.disconnected).toBe(true);
    client.receive(welcome("p2", "p2", 7));
    expect(client.disconnected).toBe(false);
    expect(client.seq).toBe(7);
    expect(client.isEditor).toBe(true);
  });

  it("updates the editor badge on grant and surfaces edit requests", () => {
    const client = new SessionClient("Bob", new FakeChannel());
    client.receive(welcome("p2"));
    client.receive({
      type: "ParticipantUpdate",
      sessionId: "s1",
      payload: { participants: { p1: "Alice", p2: "Bob" }, editor: "p2" },
    });
    expect(client.isEditor).toBe(true);
    client.receive({
      type: "RequestEdit",
      sessionId: "s1",
      payload: { from: "p1", name: "Alice" },
    });
    expect(client.editRequests).toEqual([{ from: "p1", name: "Alice" }]);
  });

  it("non-editor edit attempts prompt for rights instead of sending", () => {
    const channel = new FakeChannel();
    const client = new SessionClient("Bob", channel);
    client.receive(welcome("p2"));
    const attempt = emitEdit(client, { kind: "CreateFeature", name: "Nav", parent: "Car" });
    expect(attempt.promptRequestRights).toBe(true);
    expect(channel.sent).toHaveLength(0);

    client.receive({
      type: "ParticipantUpdate",
      sessionId: "s1",
      payload: { participants: { p1: "Alice", p2: "Bob" }, editor: "p2" },
    });
    const granted = emitEdit(client, { kind: "CreateFeature", name: "Nav", parent: "Car" });
    expect(granted.sent).toBe(true);
    expect(channel.sent[0].type).toBe("ApplyOp");
    expect(channel.sent[0].payload!.baseSeq).toBe(0);
  });
});

describe("op replay", () => {
  it("applies every replayable op kind", () => {
    const model = parseUvl(CAR_UVL);
    expect(applyOp(model, { kind: "CreateFeature", name: "Nav", parent: "Car", index: 0 })).toBe(true);
    expect(model.root.children[0].name).toBe("Nav");
    expect(applyOp(model, { kind: "Rename", feature: "Nav", newName: "Navigation" })).toBe(true);
    expect(applyOp(model, { kind: "SetAbstract", feature: "Navigation", flag: true })).toBe(true);
    expect(applyOp(model, { kind: "SetGroup", parent: "Car", group: "or" })).toBe(true);
    expect(model.root.group).toBe("or");
    expect(applyOp(model, { kind: "MoveFeature", feature: "Navigation", newParent: "Radio", index: null })).toBe(true);
    expect(applyOp(model, { kind: "DeleteFeature", feature: "Navigation" })).toBe(true);
  });

  it("rejects ops it cannot replay faithfully", () => {
    const model = parseUvl(CAR_UVL);
    expect(applyOp(model, { kind: "DeleteFeature", feature: "Engine" })).toBe(false); // has children
    expect(applyOp(model, { kind: "DeleteFeature", feature: "Electric" })).toBe(false); // referenced
    expect(applyOp(model, { kind: "MoveFeature", feature: "Engine", newParent: "Gas" })).toBe(false);
    expect(applyOp(model, { kind: "Explode" })).toBe(false);
  });

  it("renames features inside constraints, including quoted names", () => {
    const model = parseUvl(CAR_UVL);
    applyOp(model, { kind: "Rename", feature: "Electric", newName: "Battery Pack" });
    expect(model.constraints).toEqual(["Radio => Battery Pack"]);
  });
});
