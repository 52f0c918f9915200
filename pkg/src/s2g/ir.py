"""The action intermediate representation.

An :class:`ActionSpec` is the structured form of one story sentence: lists of
referenced rooms/items/characters, templated precondition and effect strings,
and display text.  This module parses spec documents, the precondition
grammar ("{player at rooms[0]}", "{items[0].locked==True}"), and the five
effect forms (Move / Set / Add / Delete / Display).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, fields, replace
from typing import Union

from .errors import (
    EffectGrammarError,
    PlaceholderError,
    PreconditionGrammarError,
    SchemaError,
)
from .textnorm import normalize_name
from .world import ATTR_MAX, ATTR_MIN, MONEY_KEY, AttributeValue

log = logging.getLogger(__name__)

LIST_FIELDS = ("rooms", "items", "characters")

_INDEXED_RE = re.compile(r"^(rooms|items|characters)\[(\d+)\]$")
_PLACEHOLDER_RE = re.compile(r"\{([^{}]+)\}")
_ATTR_RE = re.compile(
    r"^(?P<node>.+?)\s*\.\s*(?P<key>[A-Za-z_][A-Za-z0-9_ ]*?)\s*(?P<op>==|>=|<=|!=|<|>)\s*(?P<value>.+?)$"
)
_HAS_RE = re.compile(r"^(?P<holder>.+?)\s+has\s+(?P<item>.+)$", re.IGNORECASE)
_AT_RE = re.compile(r"^(?P<node>.+?)\s+(?:at|in)\s+(?P<room>.+)$", re.IGNORECASE)

_MOVE_RE = re.compile(r"^move\s+(?P<node>.+?)\s+to\s+(?P<dest>.+)$", re.IGNORECASE)
_SET_RE = re.compile(r"^set\s+(?P<target>.+?)\s+to\s+(?P<value>.+)$", re.IGNORECASE)
_ADD_RE = re.compile(
    r"^add\s+(?P<name>.+?)\s+of\s+type\s+(?P<kind>.+?)\s+to\s+(?P<dest>.+)$",
    re.IGNORECASE,
)
_DELETE_RE = re.compile(r"^delete\s+(?P<node>.+)$", re.IGNORECASE)
_DISPLAY_RE = re.compile(r"^display\s+(?P<text>.*)$", re.IGNORECASE)


# --- node references --------------------------------------------------------


@dataclass(frozen=True)
class NodeRef:
    """A reference inside a precondition or effect.

    ``kind`` is one of ``player``, ``rooms``, ``items``, ``characters``
    (indexed), ``name`` (a bare surface form), or ``inventory`` (only as a
    destination).
    """

    kind: str
    index: int | None = None
    name: str | None = None

    def to_text(self) -> str:
        if self.kind in ("player", "inventory"):
            return self.kind
        if self.kind == "name":
            return self.name or ""
        return f"{self.kind}[{self.index}]"


PLAYER_REF = NodeRef("player")
INVENTORY_REF = NodeRef("inventory")


def _strip_braces(text: str) -> str:
    return text.replace("{", " ").replace("}", " ").strip()


def parse_ref(text: str, spec: "ActionSpec", allow_inventory: bool = False) -> NodeRef:
    """Resolve a reference token against a spec's placeholder lists."""
    raw = _strip_braces(text)
    # annotated forms write "characters[0]: guard"; keep the placeholder half
    if ":" in raw:
        raw = raw.split(":", 1)[0]
    raw = raw.strip()
    m = _INDEXED_RE.match(raw)
    if m:
        list_name, idx = m.group(1), int(m.group(2))
        if idx >= len(getattr(spec, list_name)):
            raise PlaceholderError(
                f"{raw} is out of range ({list_name} has {len(getattr(spec, list_name))} entries)"
            )
        return NodeRef(list_name, index=idx)
    norm = normalize_name(raw)
    if not norm:
        raise PlaceholderError(f"empty reference in {text!r}")
    if norm == "inventory":
        if not allow_inventory:
            raise PlaceholderError("inventory is only valid as a destination")
        return INVENTORY_REF
    if norm == "player" or norm == normalize_name(spec.player):
        return PLAYER_REF
    for list_name in LIST_FIELDS:
        entries = [normalize_name(e) for e in getattr(spec, list_name)]
        if norm in entries:
            return NodeRef(list_name, index=entries.index(norm))
    return NodeRef("name", name=norm)


# --- preconditions ----------------------------------------------------------


@dataclass(frozen=True)
class LocationCheck:
    node: NodeRef
    room: NodeRef


@dataclass(frozen=True)
class InventoryCheck:
    holder: NodeRef
    item: NodeRef


@dataclass(frozen=True)
class AttributeCheck:
    node: NodeRef
    key: str
    op: str  # "==" or ">="
    value: AttributeValue


@dataclass(frozen=True)
class PrecedingEvent:
    sentence: str


Precondition = Union[LocationCheck, InventoryCheck, AttributeCheck, PrecedingEvent]


def _parse_value(text: str, key: str = "") -> AttributeValue:
    raw = _strip_braces(text).strip().rstrip(".")
    lowered = raw.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{raw!r} is not a boolean or integer") from None
    if key == MONEY_KEY:
        if value < 0:
            raise ValueError(f"{MONEY_KEY} cannot be negative")
        return value
    if not ATTR_MIN <= value <= ATTR_MAX:
        raise ValueError(f"integer attributes stay between {ATTR_MIN} and {ATTR_MAX}")
    return value


def _unwrap_braces(text: str) -> str:
    t = text.strip()
    if t.startswith("{") and t.endswith("}"):
        inner = t[1:-1]
        if inner.count("{") == inner.count("}"):
            return inner.strip()
    return t


def parse_precondition(text: str, spec: "ActionSpec") -> Precondition:
    """Parse one precondition string.

    Location ("X at Y"), inventory ("X has Y"), and attribute
    ("X.key==value") checks are structural; anything that reads as plain
    prose falls back to a :class:`PrecedingEvent` matched later against the
    story's sentences.
    """
    body = _unwrap_braces(text)
    if not body:
        raise PreconditionGrammarError("empty precondition")

    m = _ATTR_RE.match(body)
    if m:
        op = m.group("op")
        if op not in ("==", ">="):
            raise PreconditionGrammarError(
                f"unsupported comparator {op!r} in {text!r} (only == and >= exist)"
            )
        key = m.group("key").strip().lower().replace(" ", "_")
        try:
            value = _parse_value(m.group("value"), key)
        except ValueError as exc:
            raise PreconditionGrammarError(f"{text!r}: {exc}") from None
        if op == ">=" and isinstance(value, bool):
            raise PreconditionGrammarError(f">= only compares integers ({text!r})")
        node = parse_ref(m.group("node"), spec)
        return AttributeCheck(node=node, key=key, op=op, value=value)

    m = _HAS_RE.match(body)
    if m:
        return InventoryCheck(
            holder=parse_ref(m.group("holder"), spec),
            item=parse_ref(m.group("item"), spec),
        )

    m = _AT_RE.match(body)
    if m:
        room = parse_ref(m.group("room"), spec, allow_inventory=True)
        node = parse_ref(m.group("node"), spec)
        if room.kind == "inventory":
            # "X in inventory" is the player holding X
            return InventoryCheck(holder=PLAYER_REF, item=node)
        return LocationCheck(node=node, room=room)

    # Prose falls through to a preceding-event requirement.
    if "{" not in body and "=" not in body and len(body.split()) >= 2:
        return PrecedingEvent(sentence=body)
    raise PreconditionGrammarError(f"cannot parse precondition {text!r}")


def precondition_to_text(check: Precondition) -> str:
    if isinstance(check, LocationCheck):
        return "{%s at %s}" % (check.node.to_text(), check.room.to_text())
    if isinstance(check, InventoryCheck):
        return "{%s has %s}" % (check.holder.to_text(), check.item.to_text())
    if isinstance(check, AttributeCheck):
        return "{%s.%s %s %s}" % (
            check.node.to_text(),
            check.key,
            check.op,
            format_value(check.value),
        )
    return check.sentence


# --- effects ------------------------------------------------------------------


@dataclass(frozen=True)
class MoveEffect:
    node: NodeRef
    dest: NodeRef


@dataclass(frozen=True)
class SetAttributeEffect:
    node: NodeRef
    key: str
    value: AttributeValue


@dataclass(frozen=True)
class AddNodeEffect:
    name: str
    node_kind: str  # "item" or "character"
    dest: NodeRef


@dataclass(frozen=True)
class DeleteNodeEffect:
    node: NodeRef


@dataclass(frozen=True)
class DisplayEffect:
    text: str


EffectSpec = Union[MoveEffect, SetAttributeEffect, AddNodeEffect, DeleteNodeEffect, DisplayEffect]


def format_value(value: AttributeValue) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    return str(value)


def parse_effect(text: str, spec: "ActionSpec") -> EffectSpec:
    """Parse one of the five effect forms."""
    body = _unwrap_braces(text)
    if not body:
        raise EffectGrammarError("empty effect")

    m = _DISPLAY_RE.match(body)
    if m:
        return DisplayEffect(text=m.group("text").strip())

    m = _SET_RE.match(body)
    if m:
        target = _strip_braces(m.group("target"))
        if "." not in target:
            raise EffectGrammarError(f"Set needs node.attribute, got {text!r}")
        node_part, key = target.rsplit(".", 1)
        key = key.strip().lower().replace(" ", "_")
        if not key:
            raise EffectGrammarError(f"Set needs an attribute name ({text!r})")
        try:
            value = _parse_value(m.group("value"), key)
        except ValueError as exc:
            raise EffectGrammarError(f"{text!r}: {exc}") from None
        return SetAttributeEffect(node=parse_ref(node_part, spec), key=key, value=value)

    m = _ADD_RE.match(body)
    if m:
        kind = normalize_name(m.group("kind"))
        if kind not in ("item", "character"):
            raise EffectGrammarError(f"Add only creates Items or Characters ({text!r})")
        dest = parse_ref(m.group("dest"), spec, allow_inventory=True)
        name = _strip_braces(m.group("name")).strip()
        if not name:
            raise EffectGrammarError(f"Add needs a name ({text!r})")
        return AddNodeEffect(name=name, node_kind=kind, dest=dest)

    m = _MOVE_RE.match(body)
    if m:
        return MoveEffect(
            node=parse_ref(m.group("node"), spec),
            dest=parse_ref(m.group("dest"), spec, allow_inventory=True),
        )

    m = _DELETE_RE.match(body)
    if m:
        return DeleteNodeEffect(node=parse_ref(m.group("node"), spec))

    raise EffectGrammarError(f"unknown effect form {text!r}")


def effect_to_text(effect: EffectSpec) -> str:
    if isinstance(effect, MoveEffect):
        dest = effect.dest.to_text()
        dest_text = "inventory" if dest == "inventory" else "{%s}" % dest
        return "Move {%s} to %s" % (effect.node.to_text(), dest_text)
    if isinstance(effect, SetAttributeEffect):
        return "Set {%s}.%s to %s" % (
            effect.node.to_text(),
            effect.key,
            format_value(effect.value),
        )
    if isinstance(effect, AddNodeEffect):
        dest = effect.dest.to_text()
        dest_text = "inventory" if dest == "inventory" else "{%s}" % dest
        return "Add {%s} of type %s to %s" % (
            effect.name,
            effect.node_kind.capitalize(),
            dest_text,
        )
    if isinstance(effect, DeleteNodeEffect):
        return "Delete {%s}" % effect.node.to_text()
    return "Display %s" % effect.text


# --- the action spec -----------------------------------------------------------


@dataclass
class ActionSpec:
    """Structured form of one actionable story sentence."""

    input: str
    player: str = "player"
    subject: str = ""
    rooms: list[str] = field(default_factory=list)
    items: list[str] = field(default_factory=list)
    characters: list[str] = field(default_factory=list)
    attributes: dict[str, AttributeValue] = field(default_factory=dict)
    preceding_events: list[str] = field(default_factory=list)
    annotated_form: str = ""
    base_form: str = ""
    fundamental_preconditions: list[str] = field(default_factory=list)
    additional_preconditions: list[str] = field(default_factory=list)
    attribute_effects: list[str] = field(default_factory=list)
    effects: list[str] = field(default_factory=list)
    display: str = ""
    complete_sentence: str = ""

    def placeholder_texts(self) -> list[str]:
        """Every template string that may contain placeholders."""
        return (
            [self.base_form, self.display]
            + self.fundamental_preconditions
            + self.additional_preconditions
            + self.attribute_effects
            + self.effects
        )

    def validate_placeholders(self) -> None:
        """Check every indexed placeholder lands inside its list."""
        for text in self.placeholder_texts():
            for token in _PLACEHOLDER_RE.findall(text):
                token = token.split(":", 1)[0].strip()
                m = _INDEXED_RE.match(token)
                if m is None:
                    continue
                list_name, idx = m.group(1), int(m.group(2))
                if idx >= len(getattr(self, list_name)):
                    raise PlaceholderError(
                        f"{{{token}}} in {text!r} is out of range "
                        f"({list_name} has {len(getattr(self, list_name))} entries)"
                    )

    def to_json_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "ActionSpec":
        return replace(
            self,
            rooms=list(self.rooms),
            items=list(self.items),
            characters=list(self.characters),
            attributes=dict(self.attributes),
            preceding_events=list(self.preceding_events),
            fundamental_preconditions=list(self.fundamental_preconditions),
            additional_preconditions=list(self.additional_preconditions),
            attribute_effects=list(self.attribute_effects),
            effects=list(self.effects),
        )


_FIELD_NAMES = [f.name for f in fields(ActionSpec)]
_STR_FIELDS = {
    "input",
    "player",
    "subject",
    "annotated_form",
    "base_form",
    "display",
    "complete_sentence",
}
_STRLIST_FIELDS = {
    "rooms",
    "items",
    "characters",
    "preceding_events",
    "fundamental_preconditions",
    "additional_preconditions",
    "attribute_effects",
    "effects",
}


def parse_action_spec(doc: str | dict, strict: bool = True) -> ActionSpec:
    """Parse and validate a spec document.

    Accepts either the flat field layout or the prompt-response wrapper
    ``{"input": ..., "output": {...}}``.  Strict mode rejects unknown fields;
    lenient mode logs and drops them.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"spec is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("spec must be a JSON object")

    if "output" in doc and isinstance(doc.get("output"), dict):
        merged = dict(doc["output"])
        merged.setdefault("input", doc.get("input", ""))
        extras = set(doc) - {"input", "output"}
        if extras:
            _reject_extras(extras, strict)
        doc = merged

    extras = set(doc) - set(_FIELD_NAMES)
    if extras:
        _reject_extras(extras, strict)
        doc = {k: v for k, v in doc.items() if k in _FIELD_NAMES}

    values: dict = {}
    for name in _FIELD_NAMES:
        if name not in doc:
            raise SchemaError(f"spec is missing the {name!r} field", field=name)
        values[name] = doc[name]

    for name in _STR_FIELDS:
        if not isinstance(values[name], str):
            raise SchemaError(f"{name!r} must be a string", field=name)
    for name in _STRLIST_FIELDS:
        value = values[name]
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            raise SchemaError(f"{name!r} must be a list of strings", field=name)
        values[name] = [v.strip() for v in value if v.strip()]
    if not isinstance(values["attributes"], dict):
        raise SchemaError("'attributes' must be an object", field="attributes")
    for key, value in values["attributes"].items():
        if not isinstance(value, (bool, int)):
            raise SchemaError(
                f"attribute {key!r} must start as a boolean or integer", field="attributes"
            )
    if not values["input"].strip():
        raise SchemaError("'input' cannot be empty", field="input")

    spec = ActionSpec(**values)
    spec.validate_placeholders()
    return spec


def _reject_extras(extras: set[str], strict: bool) -> None:
    listing = ", ".join(sorted(extras))
    if strict:
        raise SchemaError(f"unknown spec fields: {listing}")
    log.warning("dropping unknown spec fields: %s", listing)


def serialize_action_spec(spec: ActionSpec) -> str:
    return json.dumps(spec.to_json_dict(), indent=2, ensure_ascii=True) + "\n"


def render_template(text: str, mapping: dict[str, str]) -> str:
    """Replace ``{placeholder}`` tokens using ``mapping``; unknown ones stay."""

    def sub(match: re.Match) -> str:
        token = match.group(1).split(":", 1)[0].strip()
        return mapping.get(token, match.group(0))

    return _PLACEHOLDER_RE.sub(sub, text)
