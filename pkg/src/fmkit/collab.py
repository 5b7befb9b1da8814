"""Single-writer collaboration protocol: one host, one edit-token holder,
sequenced shared history, convergence by relay-serialized broadcast.

The relay is the single serialization point; every participant (including the
submitter) applies state changes only when the corresponding seq-bearing
broadcast arrives. Inverse records are kept as model snapshots on both relay
and clients so shared undo behaves identically everywhere, including after
slicing-based deletions.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field

from . import editing
from .editing import EditHistory, EditOp, InverseRecord, canonical, op_from_json
from .formats.uvl import parse_uvl
from .model import FeatureModel, validate

SHARE_LINK_PREFIX = "https://example.invalid/session#"


def share_link_of(session_id: str) -> str:
    return SHARE_LINK_PREFIX + session_id


def session_id_of(share_link: str) -> str:
    if not share_link.startswith(SHARE_LINK_PREFIX):
        raise ValueError("not a session share link")
    return share_link[len(SHARE_LINK_PREFIX):]


def envelope(msg_type: str, session_id: str, seq: int | None = None, **payload) -> dict:
    out = {"type": msg_type, "sessionId": session_id, "payload": payload}
    if seq is not None:
        out["seq"] = seq
    return out


def _session_apply(model: FeatureModel, history: EditHistory, op: EditOp) -> FeatureModel:
    """Apply with a snapshot inverse so undo is uniform across participants."""
    before = model
    new_model, _ = editing.apply(model, op)
    history.applied.append((op, InverseRecord(snapshot=before)))
    history.redo_stack.clear()
    return new_model


def _session_undo(model: FeatureModel, history: EditHistory) -> FeatureModel:
    op, inverse = history.applied.pop()
    history.redo_stack.append(op)
    assert inverse.snapshot is not None
    return inverse.snapshot.clone()


def _session_redo(model: FeatureModel, history: EditHistory) -> FeatureModel:
    op = history.redo_stack.pop()
    return _session_apply_redo(model, history, op)


def _session_apply_redo(model: FeatureModel, history: EditHistory, op: EditOp) -> FeatureModel:
    before = model
    new_model, _ = editing.apply(model, op)
    history.applied.append((op, InverseRecord(snapshot=before)))
    return new_model


def constraint_id_fields(model: FeatureModel) -> dict:
    """Constraint ids travel with every snapshot: the canonical text loses
    them, but edit operations reference constraints by id."""
    return {
        "constraintIds": [cid for cid, _ in model.constraints],
        "nextConstraintId": model.next_constraint_id,
    }


def restore_constraint_ids(model: FeatureModel, data: dict) -> None:
    ids = data.get("constraintIds")
    if ids is not None and len(ids) == len(model.constraints):
        model.constraints = [(cid, f) for cid, (_, f) in zip(ids, model.constraints)]
    next_id = data.get("nextConstraintId")
    if next_id is not None:
        model.next_constraint_id = next_id


def _parse_snapshot(text: str, entry: dict) -> FeatureModel:
    model = parse_uvl(text)
    restore_constraint_ids(model, entry)
    return model


def history_to_json(history: EditHistory) -> dict:
    return {
        "applied": [
            {
                "op": op.to_json(),
                "before": canonical(inv.snapshot),
                **constraint_id_fields(inv.snapshot),
            }
            for op, inv in history.applied
        ],
        "redo": [op.to_json() for op in history.redo_stack],
    }


def history_from_json(data: dict) -> EditHistory:
    history = EditHistory()
    for entry in data.get("applied", []):
        history.applied.append(
            (
                op_from_json(entry["op"]),
                InverseRecord(snapshot=_parse_snapshot(entry["before"], entry)),
            )
        )
    history.redo_stack = [op_from_json(op) for op in data.get("redo", [])]
    return history


@dataclass
class SessionState:
    session_id: str
    host: str  # participant id
    participants: dict[str, str] = field(default_factory=dict)  # pid -> display name
    editor: str = ""
    model: FeatureModel | None = None
    history: EditHistory = field(default_factory=EditHistory)
    seq: int = 0
    next_pid: int = 1


class Relay:
    """Per-session serialization point. `handle` returns (recipient pid, message)
    pairs; the transport layer delivers them over per-participant channels."""

    def __init__(self):
        self.sessions: dict[str, SessionState] = {}

    # -- session lifecycle ---------------------------------------------------

    def host_session(self, model: FeatureModel, host_name: str = "Host") -> tuple[SessionState, str]:
        if validate(model):
            raise ValueError("model fails validation")
        session_id = uuid.uuid4().hex
        state = SessionState(session_id=session_id, host="p1", model=model.clone())
        state.participants["p1"] = host_name
        state.editor = "p1"
        state.next_pid = 2
        self.sessions[session_id] = state
        return state, share_link_of(session_id)

    def join(self, session_id: str, name: str) -> tuple[str | None, list[tuple[str, dict]]]:
        """Returns (participant id or None, outbound messages)."""
        state = self.sessions.get(session_id)
        if state is None:
            return None, [("", envelope("Reject", session_id, reason="unknown session"))]
        taken = set(state.participants.values())
        display = name
        suffix = 2
        while display in taken:
            display = f"{name} ({suffix})"
            suffix += 1
        pid = f"p{state.next_pid}"
        state.next_pid += 1
        state.participants[pid] = display
        out: list[tuple[str, dict]] = [
            (
                pid,
                envelope(
                    "Welcome",
                    session_id,
                    seq=state.seq,
                    participantId=pid,
                    model=canonical(state.model),
                    history=history_to_json(state.history),
                    participants=dict(state.participants),
                    editor=state.editor,
                    shareLink=share_link_of(session_id),
                    **constraint_id_fields(state.model),
                ),
            )
        ]
        update = envelope(
            "ParticipantUpdate",
            session_id,
            participants=dict(state.participants),
            editor=state.editor,
            joined=display,
        )
        out.extend((other, update) for other in state.participants if other != pid)
        return pid, out

    # -- message handling ------------------------------------------------------

    def handle(self, session_id: str, pid: str, message: dict) -> list[tuple[str, dict]]:
        state = self.sessions.get(session_id)
        if state is None:
            return [(pid, envelope("Reject", session_id, reason="unknown session"))]
        if pid not in state.participants:
            return [(pid, envelope("Reject", session_id, reason="unknown participant"))]
        msg_type = message.get("type")
        payload = message.get("payload") or {}

        if msg_type == "RequestEdit":
            request = envelope(
                "RequestEdit", session_id, **{"from": pid, "name": state.participants[pid]}
            )
            targets = {state.host, state.editor} - {pid}
            return [(t, request) for t in sorted(targets)]

        if msg_type == "GrantEdit":
            if pid not in (state.host, state.editor):
                return self._reject(state, pid, "only host or editor may grant edit rights")
            to = payload.get("to")
            if to not in state.participants:
                return self._reject(state, pid, f"unknown participant {to!r}")
            state.editor = to
            return self._participant_update(state)

        if msg_type == "RevokeEdit":
            if pid != state.host:
                return self._reject(state, pid, "only the host may revoke edit rights")
            state.editor = state.host
            return self._participant_update(state)

        if msg_type == "ApplyOp":
            if pid != state.editor:
                return self._reject(state, pid, "not the current editor")
            base_seq = payload.get("baseSeq")
            if base_seq is not None and base_seq != state.seq:
                return self._reject(state, pid, f"stale seq {base_seq}, session at {state.seq}")
            try:
                op = op_from_json(payload.get("op") or {})
                new_model = _session_apply(state.model, state.history, op)
            except Exception as exc:
                return self._reject(state, pid, f"operation failed: {exc}")
            state.model = new_model
            state.seq += 1
            return self._broadcast(
                state, envelope("ApplyOp", session_id, seq=state.seq, op=op.to_json())
            )

        if msg_type == "Undo":
            if not state.history.applied:
                return self._reject(state, pid, "nothing to undo")
            state.model = _session_undo(state.model, state.history)
            state.seq += 1
            return self._broadcast(state, envelope("Undo", session_id, seq=state.seq))

        if msg_type == "Redo":
            if not state.history.redo_stack:
                return self._reject(state, pid, "nothing to redo")
            state.model = _session_redo(state.model, state.history)
            state.seq += 1
            return self._broadcast(state, envelope("Redo", session_id, seq=state.seq))

        if msg_type == "Leave":
            left = state.participants.pop(pid, None)
            if not state.participants:
                del self.sessions[session_id]
                return []
            if state.host == pid:
                state.host = min(state.participants, key=lambda p: int(p[1:]))
            if state.editor == pid or state.editor not in state.participants:
                state.editor = state.host
            return self._participant_update(state, left=left)

        return self._reject(state, pid, f"unknown message type {msg_type!r}")

    def _reject(self, state: SessionState, pid: str, reason: str) -> list[tuple[str, dict]]:
        return [
            (pid, envelope("Reject", state.session_id, seq=state.seq, reason=reason, refSeq=state.seq))
        ]

    def _participant_update(self, state: SessionState, left: str | None = None) -> list[tuple[str, dict]]:
        update = envelope(
            "ParticipantUpdate",
            state.session_id,
            participants=dict(state.participants),
            editor=state.editor,
            left=left,
        )
        return [(pid, update) for pid in state.participants]

    def _broadcast(self, state: SessionState, message: dict) -> list[tuple[str, dict]]:
        return [(pid, message) for pid in state.participants]


class Client:
    """Protocol client: applies seq-ordered broadcasts to a local replica."""

    def __init__(self, name: str):
        self.name = name
        self.pid: str | None = None
        self.session_id: str | None = None
        self.model: FeatureModel | None = None
        self.history = EditHistory()
        self.participants: dict[str, str] = {}
        self.editor: str | None = None
        self.seq = -1
        self.rejections: list[dict] = []

    @classmethod
    def as_host(cls, name: str, state: SessionState) -> "Client":
        client = cls(name)
        client.pid = state.host
        client.session_id = state.session_id
        client.model = state.model.clone()
        client.participants = dict(state.participants)
        client.editor = state.editor
        client.seq = state.seq
        return client

    def receive(self, message: dict) -> None:
        msg_type = message["type"]
        payload = message.get("payload") or {}
        seq = message.get("seq")
        if msg_type == "Welcome":
            self.pid = payload["participantId"]
            self.session_id = message["sessionId"]
            self.model = parse_uvl(payload["model"])
            restore_constraint_ids(self.model, payload)
            self.history = history_from_json(payload["history"])
            self.participants = dict(payload["participants"])
            self.editor = payload["editor"]
            self.seq = seq
            return
        if msg_type == "Reject":
            self.rejections.append(message)
            return
        if msg_type == "ParticipantUpdate":
            self.participants = dict(payload["participants"])
            self.editor = payload["editor"]
            return
        if msg_type == "RequestEdit":
            return  # surfaced to the UI; no replica change
        if seq is not None:
            if seq != self.seq + 1:
                raise ValueError(f"out-of-order message: expected seq {self.seq + 1}, got {seq}")
            self.seq = seq
        if msg_type == "ApplyOp":
            op = op_from_json(payload["op"])
            self.model = _session_apply(self.model, self.history, op)
        elif msg_type == "Undo":
            self.model = _session_undo(self.model, self.history)
        elif msg_type == "Redo":
            self.model = _session_redo(self.model, self.history)

    # -- outgoing messages -----------------------------------------------------

    def submit_op(self, op: EditOp, with_base_seq: bool = False) -> dict:
        payload = {"op": op.to_json()}
        if with_base_seq:
            payload["baseSeq"] = self.seq
        return envelope("ApplyOp", self.session_id, **payload)

    def submit_undo(self) -> dict:
        return envelope("Undo", self.session_id)

    def submit_redo(self) -> dict:
        return envelope("Redo", self.session_id)

    def request_edit(self) -> dict:
        return envelope("RequestEdit", self.session_id)

    def grant_edit(self, to_pid: str) -> dict:
        return envelope("GrantEdit", self.session_id, to=to_pid)

    def revoke_edit(self) -> dict:
        return envelope("RevokeEdit", self.session_id)

    def leave(self) -> dict:
        return envelope("Leave", self.session_id)
