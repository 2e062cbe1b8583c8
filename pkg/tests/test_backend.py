import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from somarena.backend.base import BackendError, BackendRequest, Message, NoRuleError, TransportError
from somarena.backend.http import API_KEY_ENV, HttpBackend
from somarena.backend.reasoning import JudgeMatcher, SimilarityMatcher, extract, parse_chains, reflect, semantic_match
from somarena.backend.scripted import ScriptedBackend, ScriptedRule, ScriptedRuleSet, TemplateError, render_template
from somarena.backend.similarity import EmbeddingSimilarity
from somarena.scm.graph import ACTION_LABEL
from somarena.text import jaccard

KEYS = ["last-target", "last-choices"]


def req(purpose, text):
    return BackendRequest.simple(purpose, text)


# --- request validation ----------------------------------------------------------

def test_request_validation():
    with pytest.raises(ValueError):
        BackendRequest((Message("system", "x"),), "infer")
    with pytest.raises(ValueError):
        req("dream", "x")
    with pytest.raises(ValueError):
        BackendRequest.simple("infer", "x", temperature=-1)


# --- scripted backend --------------------------------------------------------------

def test_scripted_first_match_and_purpose():
    b = ScriptedBackend.from_rules(("infer", "a", "first"), ("infer", "a", "second"), ("act", ".", "act"))
    assert b.complete(req("infer", "abc")) == "first"
    assert b.complete(req("act", "abc")) == "act"
    with pytest.raises(NoRuleError):
        b.complete(req("reflect", "abc"))


def test_template_arithmetic():
    assert render_template("VALUE: {round(0.8 * t)}", {"t": "40"}) == "VALUE: 32"
    assert render_template("{round(0.8 * t)}", {"t": "37.5"}) == "30"
    assert render_template("{round(x)}", {"x": "2.5"}) == "3"
    assert render_template("{round(x)}", {"x": "-2.5"}) == "-3"
    assert render_template("{{literal}} {a + b}", {"a": "1", "b": "2"}) == "{literal} 3"
    assert render_template("{b // 3 if h <= 2 else 0}", {"b": "9", "h": "1"}) == "3"
    assert render_template("{b // 3 if h <= 2 else 0}", {"b": "9", "h": "5"}) == "0"
    assert render_template("{w}", {"w": "apple"}) == "apple"


@pytest.mark.parametrize("tpl", ["{__import__('os')}", "{a.b}", "{[1]}", "{t / 0}", "{missing}", "{w + 1}"])
def test_template_rejects_unsafe_or_bad(tpl):
    with pytest.raises(TemplateError):
        render_template(tpl, {"t": "1", "w": "word"})


def test_rule_file_validation():
    with pytest.raises(ValueError):
        ScriptedRule("infer", "(", "x")
    with pytest.raises(ValueError):
        ScriptedRule("infer", ".", "{1 +}")
    rs = ScriptedRuleSet.from_text('name = "t"\n[[rule]]\npurpose = "infer"\npattern = "."\nresponse = "VALUE: 1"\n')
    assert ScriptedBackend(rs).complete(req("infer", "z")) == "VALUE: 1"


def test_rule_files_in_configs_load(configs):
    for path in (configs / "rules").glob("*.toml"):
        assert ScriptedRuleSet.from_file(path).rules


# --- chains ------------------------------------------------------------------------

def test_parse_chains_examples():
    text = """Here are the chains:
    - last-target -> expects-undercut -> ACTION
    2. last-choices -> action
    weather -> x -> ACTION
    last-target -> last-choices -> ACTION
    last-target -> a -> a -> ACTION
    last-target -> -> ACTION
    last-target -> z"""
    chains = parse_chains(text, KEYS)
    assert [c.labels for c in chains] == [
        ("last-target", "expects-undercut", ACTION_LABEL),
        ("last-choices", ACTION_LABEL),
    ]


@given(st.text(max_size=300))
def test_parse_chains_never_raises(text):
    for c in parse_chains(text, KEYS):
        assert c.labels[0] in KEYS and c.labels[-1] == ACTION_LABEL
        assert len(set(c.labels)) == len(c.labels)


def test_reflect_and_extract():
    b = ScriptedBackend.from_rules(
        ("reflect", r"Actual action: (?P<a>\d+)|actual action", "they went low"),
        ("extract", r"they went low", "last-target -> goes-low -> ACTION\nnot a chain"),
    )
    text = reflect("", {"last-target": "40"}, 32, b)
    assert text == "they went low"
    assert [c.labels for c in extract(text, KEYS, b)] == [("last-target", "goes-low", ACTION_LABEL)]
    assert extract("   ", KEYS, b) == []
    with pytest.raises(ValueError):
        reflect("", {}, None, b)


# --- similarity and matching ---------------------------------------------------------

def test_jaccard_examples():
    assert jaccard("expects undercut", "expects undercut") == 1.0
    assert jaccard("", "") == 0.0
    assert jaccard("a b", "b c") == pytest.approx(1 / 3)
    assert jaccard("Expects-Undercut", "expects undercut") == 1.0


@given(st.text(max_size=40), st.text(max_size=40))
def test_jaccard_bounds_and_symmetry(a, b):
    s = jaccard(a, b)
    assert 0.0 <= s <= 1.0 and s == jaccard(b, a)


def test_semantic_match_similarity():
    existing = ["expects undercut", "anchors on mean"]
    assert semantic_match("expects an undercut", existing, threshold=0.5) == "expects undercut"
    assert semantic_match("greedy bidder", existing, threshold=0.5) is None
    assert semantic_match("anything", []) is None


def test_semantic_match_judge_and_fallback():
    yes = ScriptedBackend.from_rules(("match", "Existing: b", "YES"), ("match", ".", "NO"))
    prompt_probe = ScriptedBackend.from_rules(("match", ".", "NO"))
    assert semantic_match("a", ["x", "y"], prompt_probe, judge=True) is None
    broken = ScriptedBackend.from_rules()
    assert semantic_match("expects undercut", ["expects undercut"], broken, judge=True) == "expects undercut"
    assert JudgeMatcher(broken)("expects undercut", ["expects undercut"]) == ["expects undercut"]
    assert SimilarityMatcher(0.9)("a b", ["a b", "a c"]) == ["a b"]


class _Embedder:
    def __init__(self, fail=False):
        self.fail = fail

    def embed(self, texts, model=""):
        if self.fail:
            raise BackendError("down")
        return [[1.0, 0.0] if "a" in t else [0.0, 1.0] for t in texts]


def test_embedding_similarity():
    sim = EmbeddingSimilarity(_Embedder())
    assert sim("a", "ab") == 1.0 and sim("a", "b") == 0.0
    assert EmbeddingSimilarity(_Embedder(fail=True))("x y", "y z") == pytest.approx(1 / 3)


# --- HTTP backend ------------------------------------------------------------------------

def _ok(text="VALUE: 3"):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def _backend(handler, **kw):
    sleeps = []
    b = HttpBackend("m", "http://test/v1", api_key="k", transport=httpx.MockTransport(handler),
                    sleep=sleeps.append, backoff=0.5, **kw)
    return b, sleeps


def test_http_success_payload():
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return _ok()

    b, _ = _backend(handler)
    assert b.complete(req("infer", "hello")) == "VALUE: 3"
    assert seen["url"] == "http://test/v1/chat/completions"
    assert seen["auth"] == "Bearer k"
    assert seen["body"]["messages"] == [{"role": "user", "content": "hello"}]
    assert seen["body"]["temperature"] == 0.0


def test_http_retries_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503) if len(calls) < 3 else _ok()

    b, sleeps = _backend(handler, attempts=3)
    assert b.complete(req("infer", "x")) == "VALUE: 3"
    assert sleeps == [0.5, 1.0]


def test_http_gives_up_after_budget():
    def handler(request):
        raise httpx.ConnectTimeout("slow")

    b, sleeps = _backend(handler, attempts=2)
    with pytest.raises(TransportError) as e:
        b.complete(req("infer", "x"))
    assert e.value.attempts == 2 and e.value.retryable and len(sleeps) == 1


def test_http_non_retryable_and_malformed():
    b, sleeps = _backend(lambda r: httpx.Response(401, text="nope"), attempts=3)
    with pytest.raises(TransportError) as e:
        b.complete(req("infer", "x"))
    assert e.value.status == 401 and not sleeps
    b, _ = _backend(lambda r: httpx.Response(200, json={"choices": []}))
    with pytest.raises(TransportError):
        b.complete(req("infer", "x"))
    b, _ = _backend(lambda r: httpx.Response(200, text="not json"))
    with pytest.raises(BackendError):
        b.complete(req("infer", "x"))


def test_http_requires_finite_timeout():
    for t in (0, -1, float("inf"), None):
        with pytest.raises(ValueError):
            HttpBackend("m", "http://x", timeout=t)


def test_http_key_comes_from_environment(monkeypatch):
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return _ok()

    monkeypatch.setenv(API_KEY_ENV, "env-secret")
    b = HttpBackend("m", "http://t", transport=httpx.MockTransport(handler))
    b.complete(req("infer", "x"))
    assert seen["auth"] == "Bearer env-secret"
    assert "env-secret" not in repr(vars(b).get("name"))
