import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import best_response_bruteforce, level_k_hand
from somarena.agents import (
    AgentConfig,
    MixedAgent,
    OpponentModel,
    PromptAgent,
    SomAgent,
    SomParams,
    baseline_act,
    build_agent,
    k_level_choice,
    mixed_opponent,
    scripted_opponent,
    som_act,
    som_observe,
    som_predict,
)
from somarena.agents.config import MIXED_POOL
from somarena.agents.gametext import parse_action, som_observation_values
from somarena.agents.klevel import g08a_best_response
from somarena.agents.scripted import known_rule
from somarena.backend.scripted import ScriptedBackend
from somarena.games import GameEnv, GameSpec
from somarena.games.base import SagParams, UndercoverParams

G08A_KEYS = ["last-target", "opponent-last-choice", "round"]


def g08a_obs(n=3, rounds=(), seat=0):
    env = GameEnv(GameSpec("g08a", n, 10, seed=1))
    for choices in rounds:
        env.step(dict(enumerate(choices)))
    return env.observe(seat)


# --- k-level and best response -----------------------------------------------------

@pytest.mark.parametrize("k,n,anchor,expected", [(0, 4, 50, 50), (0, 3, 77, 77), (1, 4, 50, 38), (30, 4, 50, 1), (45, 4, 50, 1)])
def test_k_level_examples(k, n, anchor, expected):
    assert k_level_choice(k, n, anchor) == expected


@given(st.integers(0, 40), st.integers(2, 12), st.integers(1, 100))
def test_k_level_matches_hand_and_is_non_increasing(k, n, anchor):
    assert k_level_choice(k, n, anchor) == level_k_hand(k, n, anchor)
    assert k_level_choice(k + 1, n, anchor) <= k_level_choice(k, n, anchor)


def test_k_level_rejects_bad_input():
    with pytest.raises(ValueError):
        k_level_choice(-1, 4, 50)
    with pytest.raises(ValueError):
        k_level_choice(1, 1, 50)


@given(st.integers(2, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(n - 1, 100 * (n - 1)))))
def test_best_response_is_brute_force_optimal(case):
    n, s = case
    assert g08a_best_response(s, n) in best_response_bruteforce(s, n)


def test_som_act_g08a_uses_predictions():
    obs = g08a_obs(3)
    assert som_act(obs, {1: "40", 2: "40"}) in best_response_bruteforce(80, 3)
    # unparseable predictions count as the midpoint
    assert som_act(obs, {1: "??", 2: "50"}) == som_act(obs, {1: "50", 2: "50"})


def test_som_act_sag():
    env = GameEnv(GameSpec("sag", 3, 10, seed=2, params=SagParams()))
    obs = env.observe(0)
    assert som_act(obs, {1: "5", 2: "9"}) == 0  # healthy: save budget
    env.state.players[0].hp = 2
    obs = env.observe(0)
    assert som_act(obs, {1: "5", 2: "9"}) == min(10, obs["own-budget"])
    assert som_act(obs, {1: "10000"}) == obs["own-budget"]


# --- SOM observe / predict -------------------------------------------------------------

def _values(t):
    return {"last-target": t, "opponent-last-choice": "none", "round": "1"}


def test_som_predict_initial_graph(follow_backend):
    model = OpponentModel.fresh(G08A_KEYS, game="g08a")
    predicted, trace = som_predict(model, "seat1", _values("40"), follow_backend)
    assert predicted == "32" and "seat1" in model.pending and trace.records[-1].label == "ACTION"


def test_som_observe_credits_and_grows(follow_backend):
    model = OpponentModel.fresh(G08A_KEYS, game="g08a")
    som_predict(model, "seat1", _values("40"), follow_backend)
    som_observe(model, "seat1", _values("40"), 32, follow_backend)
    assert len(model.pools["seat1"]) == 1
    assert model.graph.node_by_label("expects-undercut").count == 1
    assert [e for e, _ in model.events] == ["predict", "credit", "update", "prune"]
    # a miss adds nothing
    som_predict(model, "seat1", _values("40"), follow_backend)
    som_observe(model, "seat1", _values("40"), 90, follow_backend)
    assert len(model.pools["seat1"]) == 1
    # a hit on the grown graph stores one example per non-root node
    som_predict(model, "seat1", _values("40"), follow_backend)
    som_observe(model, "seat1", _values("40"), 32, follow_backend)
    assert len(model.pools["seat1"]) == 3


def test_som_observe_miss_adds_nothing(follow_backend):
    model = OpponentModel.fresh(G08A_KEYS, game="g08a")
    som_predict(model, "seat1", _values("40"), follow_backend)
    som_observe(model, "seat1", _values("40"), 90, follow_backend)
    assert "seat1" not in model.pools or len(model.pools["seat1"]) == 0


def test_som_observe_requires_action(follow_backend):
    with pytest.raises(ValueError):
        som_observe(OpponentModel.fresh(G08A_KEYS), "seat1", _values("1"), None, follow_backend)


def test_frozen_model_does_not_change(follow_backend):
    model = OpponentModel.fresh(G08A_KEYS, game="g08a")
    model.frozen = True
    before = model.graph.copy()
    som_predict(model, "seat1", _values("40"), follow_backend)
    som_observe(model, "seat1", _values("40"), 32, follow_backend)
    assert model.graph == before and not model.pools


def test_llm_only_variant_skips_graph():
    backend = ScriptedBackend.from_rules(("predict", ".", "VALUE: 44"))
    params = SomParams(enable_graph=False, enable_intermediates=False, enable_refine=False, enable_examples=False)
    model = OpponentModel.fresh(G08A_KEYS)
    predicted, _ = som_predict(model, "seat1", _values("40"), backend, params=params)
    som_observe(model, "seat1", _values("40"), 44, backend, params=params)
    assert predicted == "44" and not model.pools and not model.graph.intermediates()


def test_som_agent_event_order(follow_backend):
    """Within each round: credit, then graph update, then the next prediction."""
    cfg = AgentConfig("som", backend="f")
    agent = SomAgent(cfg, follow_backend)
    spec = GameSpec("g08a", 2, 4, seed=3)
    env = GameEnv(spec)
    agent.begin_episode(0, spec, 0)
    while not env.terminal:
        before = env.observe(0)
        a = agent.act(before)
        env.step({0: a, 1: scripted_opponent("g08a-follow-target", env.observe(1))})
        agent.observe(before, env.observe(0), a, 0.0)
    kinds = [e for e, opp in agent.model.events if opp == "seat1"]
    assert kinds[0] == "predict"
    rounds = [kinds[i:i + 4] for i in range(0, len(kinds) - 1, 4)]
    for r in rounds:
        assert r == ["predict", "credit", "update", "prune"]
    assert agent.prediction_log


# --- baselines ------------------------------------------------------------------------------

def test_baseline_parsing():
    obs = g08a_obs()
    for kind in ("llm-only", "cot", "reflexion"):
        b = ScriptedBackend.from_rules(("act", ".", "thinking about 99...\nACTION: 33"))
        assert baseline_act(kind, [], obs, b).action == 33


@given(st.text(max_size=80))
def test_baseline_garbage_never_raises(text):
    obs = g08a_obs()
    b = ScriptedBackend.from_rules(("*", ".", text.replace("{", "{{").replace("}", "}}")))
    res = baseline_act("cot", [], obs, b)
    assert isinstance(res.action, int)
    assert (res.violation is None) == (parse_action(obs, b.complete(_any_req())) is not None)


def _any_req():
    from somarena.backend.base import BackendRequest
    return BackendRequest.simple("act", "x")


def test_baseline_backend_failure_falls_back():
    res = baseline_act("cot", [], g08a_obs(), ScriptedBackend.from_rules())
    assert res.action == 1 and res.violation
    res = baseline_act("k-r", [], g08a_obs(3, [(50, 50, 50)]), ScriptedBackend.from_rules(), k_level=1)
    assert res.action == k_level_choice(1, 3, 50)


def test_tot_argmax_first_on_ties():
    b = ScriptedBackend.from_rules(
        ("act", r"candidate plan (?P<i>\d) of", "ACTION: {10 * i}"),
        ("evaluate", r"Candidate plan 1:", "SCORE: 0.5"),
        ("evaluate", r"Candidate plan 2:", "SCORE: 0.9"),
        ("evaluate", r"Candidate plan 3:", "SCORE: 0.9"),
    )
    assert baseline_act("tot", [], g08a_obs(), b, breadth=3).action == 20


def test_reflexion_memory_is_bounded():
    b = ScriptedBackend.from_rules(("act", ".", "ACTION: 30"), ("reflect", ".", "aim lower"))
    agent = PromptAgent(AgentConfig("reflexion", reflexion_memory=2), b)
    spec = GameSpec("g08a", 2, 5, seed=1)
    env = GameEnv(spec)
    agent.begin_episode(0, spec, 0)
    while not env.terminal:
        before = env.observe(0)
        a = agent.act(before)
        env.step({0: a, 1: 50})
        agent.observe(before, env.observe(0), a, 0.0)
    assert list(agent.memory) == ["aim lower", "aim lower"]
    assert len(agent.history) == 5


def test_mixed_distribution():
    counts = Counter(mixed_opponent(7, ep) for ep in range(4000))
    assert set(counts) == set(MIXED_POOL)
    assert all(900 <= c <= 1100 for c in counts.values())


def test_mixed_agent_is_seeded():
    b = ScriptedBackend.from_rules(("*", ".", "ACTION: 10\nSCORE: 1"))
    spec = GameSpec("g08a", 2, 1)
    kinds = []
    for _ in range(2):
        agent = MixedAgent(AgentConfig("mixed", seed=5), b)
        for ep in range(6):
            agent.begin_episode(1, spec, ep)
        kinds.append(agent.kinds)
    assert kinds[0] == kinds[1] == [mixed_opponent(5, ep) for ep in range(6)]


# --- scripted opponents and factory -------------------------------------------------------------

def test_scripted_rules():
    assert scripted_opponent("g08a-follow-target", g08a_obs()) == 50
    assert scripted_opponent("g08a-follow-target", g08a_obs(3, [(40, 50, 60)])) == 32
    assert scripted_opponent("g08a-constant-42", g08a_obs()) == 42
    assert scripted_opponent("g08a-level-1", g08a_obs(4, [(50, 50, 50, 50)])) == 38
    env = GameEnv(GameSpec("sag", 2, 5, params=SagParams()))
    obs = env.observe(0)
    assert scripted_opponent("sag-half-budget", obs) == obs["own-budget"] // 2
    assert scripted_opponent("sag-urgent", obs) == 0
    assert known_rule("g08a-level-3") and not known_rule("g08a-level-x")


def test_undercover_basic_rule_is_legal():
    env = GameEnv(GameSpec("undercover", 4, 3, seed=4, params=UndercoverParams()))
    while not env.terminal:
        acts = {i: scripted_opponent("undercover-basic", env.observe(i)) for i in env.actors()}
        res = env.step(acts)
        assert not res.violations


def test_build_agent_resolution(follow_backend):
    backends = {"f": follow_backend}
    assert isinstance(build_agent(AgentConfig("som"), backends), SomAgent)
    with pytest.raises(ValueError):
        build_agent(AgentConfig("cot", backend="nope"), backends)
    with pytest.raises(ValueError):
        build_agent(AgentConfig("cot"), {"a": follow_backend, "b": follow_backend})
    with pytest.raises(ValueError):
        AgentConfig("scripted", rule="bogus")
    with pytest.raises(ValueError):
        AgentConfig("cot", som=SomParams())


def test_observation_values_cover_keys():
    obs = g08a_obs(3, [(10, 20, 30)])
    values = som_observation_values(obs, 1)
    assert set(values) == set(G08A_KEYS) and values["opponent-last-choice"] == "20"
