import pytest

from robocoach.chat import (
    DEFAULT_ROBOT_FACTS,
    FALLBACK_REPLY,
    BuiltinRuleBased,
    ChatContext,
    ChatPhase,
    ExternalService,
)


def ctx(phase=ChatPhase.PRE_TRAINING):
    return ChatContext(session_phase=phase)


def test_name_question():
    reply = BuiltinRuleBased().respond("What is your name?", ctx())
    assert reply.text == "My name is NAO!"
    assert reply.degraded is False


def test_height_question():
    reply = BuiltinRuleBased().respond("How tall are you?", ctx())
    assert reply.text == "I am 58 cm tall."


def test_purpose_question():
    reply = BuiltinRuleBased().respond("Why are you here?", ctx())
    assert reply.text == DEFAULT_ROBOT_FACTS["purpose"]


def test_unmatched_falls_back():
    reply = BuiltinRuleBased().respond("Do you like football?", ctx())
    assert reply.text == FALLBACK_REPLY


def test_matching_is_case_insensitive():
    assert BuiltinRuleBased().respond("WHAT IS YOUR NAME", ctx()).text == "My name is NAO!"


def test_transcript_records_both_turns():
    context = ctx()
    responder = BuiltinRuleBased()
    responder.respond("hello", context)
    responder.respond("what is your name?", context)
    assert len(context.transcript) == 4
    roles = [role for role, _text in context.transcript]
    assert roles == ["patient", "robot", "patient", "robot"]
    assert context.transcript[-1] == ("robot", "My name is NAO!")


def test_custom_facts_override_defaults():
    context = ChatContext(
        session_phase=ChatPhase.POST_TRAINING,
        robot_facts={**DEFAULT_ROBOT_FACTS, "name": "Coach"},
    )
    assert BuiltinRuleBased().respond("your name?", context).text == "My name is Coach!"


def test_external_service_unreachable_degrades():
    # nothing listens on port 1; the client must fall back, not raise
    service = ExternalService("http://127.0.0.1:1/chat", timeout_s=0.5)
    reply = service.respond("hello", ctx())
    assert reply.degraded is True
    assert reply.text == FALLBACK_REPLY


def test_external_service_bad_payload_degrades(monkeypatch):
    import httpx

    def fake_post(url, json=None, timeout=None):
        return httpx.Response(200, text="not json at all", request=httpx.Request("POST", url))

    monkeypatch.setattr(httpx, "post", fake_post)
    reply = ExternalService("http://example.invalid/chat").respond("hi", ctx())
    assert reply.degraded is True


def test_external_service_happy_path(monkeypatch):
    import httpx

    def fake_post(url, json=None, timeout=None):
        assert json["text"] == "hi"
        assert json["context"]["session_phase"] == "PreTraining"
        return httpx.Response(
            200, json={"reply": "Hello there!"}, request=httpx.Request("POST", url)
        )

    monkeypatch.setattr(httpx, "post", fake_post)
    reply = ExternalService("http://example.invalid/chat").respond("hi", ctx())
    assert reply.text == "Hello there!"
    assert reply.degraded is False
