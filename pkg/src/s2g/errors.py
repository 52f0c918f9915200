"""Exception taxonomy shared by every layer of the engine.

Grouped by the layer that raises them; everything inherits from
:class:`EngineError` so callers that only care about "did the engine
object" can catch one type.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all errors raised by this package."""


# --- world graph -----------------------------------------------------------


class WorldError(EngineError):
    """Base class for violations of world-graph rules."""


class AmbiguousName(WorldError):
    """Two siblings (or two rooms) would share a canonical name."""


class ContainmentViolation(WorldError):
    """A parent/child pairing the containment rules forbid, or a cycle."""


class InvalidOperation(WorldError):
    """A structurally impossible operation (move a room, delete the player...)."""


class RoomAttributeForbidden(WorldError):
    """Rooms do not carry attributes."""


class ValueOutOfRange(WorldError):
    """Attribute value outside its domain (bool, or int in 0..10; money >= 0)."""


class UnknownObject(WorldError):
    """A reference that resolves to nothing."""


class AmbiguousReference(WorldError):
    """A reference that resolves to more than one node."""

    def __init__(self, surface: str, candidates: list[str]):
        self.surface = surface
        self.candidates = list(candidates)
        listing = ", ".join(candidates)
        super().__init__(f"{surface!r} could mean any of: {listing}")


# --- action intermediate representation ------------------------------------


class IrError(EngineError):
    """Base class for action-spec parsing problems."""


class SchemaError(IrError):
    """An action spec document is missing fields or badly typed."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message)


class PlaceholderError(IrError):
    """A placeholder that does not resolve to player or a listed entry."""


class PreconditionGrammarError(IrError):
    """A precondition string outside the supported grammar."""


class EffectGrammarError(IrError):
    """An effect string outside the five supported effect forms."""


# --- compiler ---------------------------------------------------------------


class CompileError(EngineError):
    """Base class for binding/compilation problems."""


class ObjectMisidentification(CompileError):
    """A name that cannot be bound to a single world node."""

    def __init__(self, surface: str, candidates: list[str] | None = None):
        self.surface = surface
        self.candidates = list(candidates or [])
        msg = f"cannot bind {surface!r} to a single object"
        if self.candidates:
            msg += f" (candidates: {', '.join(self.candidates)})"
        super().__init__(msg)


class MatchMiss(CompileError):
    """A preceding event that matches no known sentence."""


class SemanticUnrepresentable(EngineError):
    """An action whose meaning cannot be expressed in the engine's state model."""


class CompilationError(EngineError):
    """A generated action that never yielded a valid, compilable spec."""


# --- llm gateway ------------------------------------------------------------


class GatewayError(EngineError):
    """Base class for language-model gateway failures."""


class FixtureMiss(GatewayError):
    """Replay mode was asked for a prompt that has no stored fixture."""

    def __init__(self, digest: str, kind: str = ""):
        self.digest = digest
        self.kind = kind
        super().__init__(f"no stored fixture for {kind or 'prompt'} digest {digest}")


class GenerationError(GatewayError):
    """The model (or its transport) failed to produce a usable response."""
