"""Small-talk for the pre/post-training chat states.

The built-in responder is a deterministic keyword matcher over a fact sheet
about the robot; an optional external HTTP responder can be plugged in and
silently degrades to the built-in one on any failure, so a flaky endpoint
can never stall a session.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import httpx

from .errors import ParseError


class ChatPhase(str, Enum):
    PRE_TRAINING = "PreTraining"
    POST_TRAINING = "PostTraining"


# Deployments localize this sheet; the shipped one is English.
DEFAULT_ROBOT_FACTS: Mapping[str, str] = {
    "locale": "en",
    "name": "NAO",
    "height": "58 cm",
    "purpose": "I am here to do the exercise program together with you.",
}

FALLBACK_REPLY = "That is a good one! Let's talk more after the exercises."


@dataclass
class ChatContext:
    session_phase: ChatPhase
    robot_facts: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_ROBOT_FACTS))
    transcript: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class ChatReply:
    text: str
    source: str  # "builtin" | "external"
    degraded: bool = False


class ResponderClient:
    """Interface: turn patient audio/text into a robot reply."""

    def transcribe(self, audio_ref: str) -> str:
        # Audio capture is not part of the desk build; console and CLI
        # inject text directly.  Kept for parity with a full pipeline.
        return ""

    def respond(self, text: str, context: ChatContext) -> ChatReply:
        raise NotImplementedError


# Keyword rules checked in order; first hit wins.  Keys into the fact sheet.
_FACT_RULES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("name", ("name", "who are you", "called")),
    ("height", ("tall", "height", "size", "big are you", "how big")),
    ("purpose", ("purpose", "why are you", "what do you do", "what are you for", "use-case", "job")),
)


class BuiltinRuleBased(ResponderClient):
    def respond(self, text: str, context: ChatContext) -> ChatReply:
        lowered = (text or "").lower()
        reply = FALLBACK_REPLY
        if lowered.strip():
            for fact_key, keywords in _FACT_RULES:
                if any(k in lowered for k in keywords) and fact_key in context.robot_facts:
                    reply = self._phrase(fact_key, context.robot_facts[fact_key])
                    break
        context.transcript.append(("patient", text))
        context.transcript.append(("robot", reply))
        return ChatReply(text=reply, source="builtin")

    @staticmethod
    def _phrase(fact_key: str, value: str) -> str:
        if fact_key == "name":
            return f"My name is {value}!"
        if fact_key == "height":
            return f"I am {value} tall."
        return value


class ExternalService(ResponderClient):
    """HTTP responder: POST {text, context} -> {reply}; hard timeout, total fallback."""

    def __init__(
        self,
        endpoint: str,
        timeout_s: float = 3.0,
        fallback: ResponderClient | None = None,
    ):
        if timeout_s <= 0:
            raise ParseError(f"timeout_s must be positive, got {timeout_s}")
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.fallback = fallback or BuiltinRuleBased()

    def respond(self, text: str, context: ChatContext) -> ChatReply:
        try:
            resp = httpx.post(
                self.endpoint,
                json={
                    "text": text,
                    "context": {
                        "robot_facts": dict(context.robot_facts),
                        "session_phase": context.session_phase.value,
                        "transcript": [list(turn) for turn in context.transcript],
                    },
                },
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            reply = resp.json().get("reply")
            if not isinstance(reply, str) or not reply.strip():
                raise ValueError("external responder returned no reply text")
        except (httpx.HTTPError, ValueError):
            fallback_reply = self.fallback.respond(text, context)
            return ChatReply(text=fallback_reply.text, source=fallback_reply.source, degraded=True)
        context.transcript.append(("patient", text))
        context.transcript.append(("robot", reply))
        return ChatReply(text=reply, source="external")
