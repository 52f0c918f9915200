"""Prompt templates for every model call the engine makes.

Templates use ``string.Template`` placeholders (``$sentence``) so the literal
curly braces of the action grammar survive rendering.
"""

from __future__ import annotations

from enum import Enum
from string import Template


class PromptKind(str, Enum):
    STORY_GEN = "story_gen"
    ANNOTATE = "annotate"
    DYNAMIC_ACTION = "dynamic_action"
    VERB_SUGGEST = "verb_suggest"
    ATTR_RELEVANCE = "attr_relevance"
    ATTR_DEFAULT = "attr_default"


_STORY_GEN = Template(
    """\
You are designing a text-based adventure game. Expand the quest outline below
into the full sequence of events of the game's story. Every event must be a
single sentence describing one concrete action the player character performs,
written in story order. Produce between 5 and 18 events.

Title: $title
Main quest line:
$quest
Setting: $description
$note
Respond with a single JSON object: {"sentences": ["...", "..."]}
"""
)

_ANNOTATE = Template(
    """\
You are building the action system of a text-based adventure game. Convert the
event sentence below into the structured action form.

Fundamental preconditions are location checks like "{player at rooms[0]}" or
"{items[0] at rooms[0]}" and inventory checks like "{player has items[0]}".
Additional preconditions compare attributes, e.g. "{items[0].locked==True}" or
"{player.strength>=7}"; attributes are booleans or integers from 0 to 10.
The "attributes" object gives initial values for new attributes, keyed as
"name.attribute". preceding_events quotes earlier event sentences verbatim,
and only when this event truly requires them.

Effects may be:
1. Move {node} to {node/inventory}
2. Set {node}.attribute to {value}
3. Delete {node}
4. Add {name} of type {Item/Character} to {node/inventory}
5. Display some message

Earlier events:
$previous
Event: $sentence

Respond with a single JSON object of the form {"input": ..., "output":
{"player": ..., "subject": ..., "rooms": [...], "items": [...],
"characters": [...], "attributes": {...}, "preceding_events": [...],
"annotated_form": ..., "base_form": ..., "fundamental_preconditions": [...],
"additional_preconditions": [...], "attribute_effects": [...],
"effects": [...], "display": ..., "complete_sentence": ...}}
"""
)

_DYNAMIC_ACTION = Template(
    """\
You are creating a text-based adventure game similar to Zork. One of your
responsibilities is to design the game engine's action system. Actions can
alter the game's state represented by a tree structure with nodes. Each node
can be a room, item, or character.

Given a sentence, determine the requirements of the actions, utilizing a set
template. For requirements (between 1 and 3), focus on either items,
attributes (like DnD), or other events that might be necessary preconditions
to enable the action.

Do not include any requirements that would be considered fundamental, such as
being in the same location or existing. Those are unnecessary.

Preceding events have nothing to do with items and attributes; they are
independent events that must come before the input.

If the "preceding" input is true, include one preceding event.

Possible Effects:
1. Move {node1} to {node2/inventory}
2. Set {node.some_attribute} to {value}
3. Delete {node}
4. Add {node_name} of type {Item/Character} to {node/inventory}
5. Display Some message with {node.some_attribute}

Respond with a single JSON object of the form {"input": ..., "output":
{"player": ..., "subject": ..., "rooms": [...], "items": [...],
"characters": [...], "attributes": {...}, "preceding_events": [...],
"annotated_form": ..., "base_form": ..., "fundamental_preconditions": [...],
"additional_preconditions": [...], "attribute_effects": [...],
"effects": [...], "display": ..., "complete_sentence": ...}}

Input: $sentence; room: at $room; preceding: $preceding.
"""
)

_VERB_SUGGEST = Template(
    """\
You are creating a text-based adventure game. Suggest three distinct verbs a
player might plausibly apply to the object below. Suggest only verbs that make
sense for this kind of object, one word each.

Object: $name (a $kind)
Verbs that already exist for it and must not be suggested: $exclude

Respond with a single JSON object: {"verbs": ["...", "...", "..."]}
"""
)

_ATTR_RELEVANCE = Template(
    """\
You are maintaining the action system of a text-based adventure game. The
object "$node" just gained a new attribute "$key". Decide whether this
attribute is relevant to whether the existing action below should still be
executable, and if so, which value the attribute must hold for the action to
make sense.

Action: $action
Its preconditions: $preconditions
Its effects: $effects

Respond with a single JSON object: {"relevant": true/false,
"required_value": ...} (required_value may be null when not relevant).
"""
)

_ATTR_DEFAULT = Template(
    """\
You are maintaining the action system of a text-based adventure game. The
object "$node" (a $kind) needs a starting value for its new attribute "$key".
The attribute's type is $value_type. Pick the most natural default for an
ordinary $kind of this name.

Respond with a single JSON object: {"default": ...}
"""
)

_TEMPLATES: dict[PromptKind, Template] = {
    PromptKind.STORY_GEN: _STORY_GEN,
    PromptKind.ANNOTATE: _ANNOTATE,
    PromptKind.DYNAMIC_ACTION: _DYNAMIC_ACTION,
    PromptKind.VERB_SUGGEST: _VERB_SUGGEST,
    PromptKind.ATTR_RELEVANCE: _ATTR_RELEVANCE,
    PromptKind.ATTR_DEFAULT: _ATTR_DEFAULT,
}


def build_prompt(kind: PromptKind, variables: dict[str, str]) -> str:
    """Render the template for ``kind``; every variable must be a string."""
    return _TEMPLATES[kind].substitute(variables)
