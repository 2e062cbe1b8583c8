"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in
the terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import random
import sys
import tempfile
import time
from argparse import Namespace
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import CONFIGS  # noqa: E402
from generators import (  # noqa: E402
    alternate_learnability_backend,
    learnability_observations,
    linear_rules,
    small_graph,
    step_invariants,
)
from oracles import evaluate_scm, level_k_hand  # noqa: E402
from somarena.agents import som_predict  # noqa: E402
from somarena.agents.klevel import k_level_choice  # noqa: E402
from somarena.scm import ExamplePool, InferenceTrace, MatchPredicate, NodeRecord, credit_assign, infer, init_graph  # noqa: E402
from somarena.scm.graph import ACTION_LABEL  # noqa: E402
from somarena.store import load_model, save_model  # noqa: E402
from somarena.tournament import run_match  # noqa: E402
from somarena.tournament.ablation import run_ablation  # noqa: E402
from somarena.tournament.config import load_match_config  # noqa: E402
from somarena.tournament.metrics import prediction_deviation  # noqa: E402
from somarena.tournament.report import render_report  # noqa: E402

RESULTS: dict[int, tuple[str, str]] = {}
LEARN = CONFIGS / "learnability.toml"


def _record(n: int, status: str, detail: str) -> str:
    line = f"criterion {n:2d}: {status} {detail}"
    RESULTS[n] = (status, line)
    print(line)
    return line


def _check(n: int, fn) -> None:
    try:
        ok, detail = fn()
    except Exception as err:  # report the crash as a failure line
        ok, detail = False, f"raised {type(err).__name__}: {err}"
    _record(n, "PASS" if ok else "FAIL", detail)
    assert ok, detail


# --- 1 ----------------------------------------------------------------------------

def scm_invariant_suite(sequences: int = 10_000, seed: int = 0):
    rnd = random.Random(seed)
    start = time.perf_counter()
    largest = 0
    for _ in range(sequences):
        n_obs = rnd.randint(1, 4)
        g = init_graph([f"obs-{i}" for i in range(n_obs)])
        for _ in range(rnd.randint(1, 12)):
            # vocabulary sized so no graph can exceed 50 nodes
            g = step_invariants(rnd, g, rnd.choice([0, 1, 3, 5, 10, 45]), vocab=49 - n_obs, max_chains=8)
            largest = max(largest, len(g.nodes))
    elapsed = time.perf_counter() - start
    return elapsed < 60, f"{sequences} sequences, largest graph {largest} nodes, {elapsed:.1f}s (< 60s)"


# --- 2 ----------------------------------------------------------------------------

def inference_oracle(cases: int = 600, seed: int = 1):
    rnd = random.Random(seed)
    mismatches = 0
    for _ in range(cases):
        g = small_graph(rnd, max_nodes=6)
        backend, coef, bias = linear_rules(g, rnd)
        roots = {k: rnd.randint(-20, 60) for k in g.observation_keys()}
        edges = [(g.nodes[u].label, g.nodes[v].label) for u, v in g.edges]
        expected = evaluate_scm(edges, roots, coef, bias, 97)(ACTION_LABEL)
        got = infer(g, {k: str(v) for k, v in roots.items()}, None, backend).predicted
        mismatches += got != str(expected)
    return mismatches == 0, f"{cases} random graphs of <= 6 nodes, {mismatches} mismatches"


# --- 3 ----------------------------------------------------------------------------

def learnability():
    cfg = replace(load_match_config(LEARN), runs=1)
    report = run_match(cfg)
    spec = report.spec
    run = report.cells[0].runs[0]
    episodes = run.warmup + run.eval
    worst_late, series = 0.0, []
    for rec in episodes:
        late = [(p["predicted"], p["actual"]) for p in rec.predictions if p["observer"] == 0 and p["round"] >= 2]
        worst_late = max(worst_late, prediction_deviation(late, 99))
        series.append(prediction_deviation(rec.pairs(0), 99))
    monotone = all(b <= a + 1.0 for a, b in zip(series, series[1:]))
    ok = spec.horizon == 10 and worst_late <= 2.0 and monotone
    return ok, (f"worst deviation from round 3 on {worst_late:.2f}% (<= 2%), "
                f"per-episode series {[round(x, 2) for x in series]} non-increasing within +1%")


# --- 4 ----------------------------------------------------------------------------

def ablation_shape():
    cfg = replace(load_match_config(LEARN), runs=1)
    ablation, _ = run_ablation(cfg)
    devs = [r.deviation["mean"] for r in ablation.rows]
    ok = all(b <= a for a, b in zip(devs, devs[1:])) and devs[-1] == min(devs)
    labels = " >= ".join(f"{r.variant} {d:.2f}" for r, d in zip(ablation.rows, devs))
    return ok, f"deviation {labels}"


# --- 5 ----------------------------------------------------------------------------

def _trace(n: int) -> InferenceTrace:
    recs = [NodeRecord(f"n{i}", f"n{i}", "intermediate", {"x": str(i)}, [], "v", "r") for i in range(n - 1)]
    recs.append(NodeRecord(ACTION_LABEL, ACTION_LABEL, "action", {"x": "0"}, [], "v", "r"))
    return InferenceTrace({"x": "0"}, recs, "v")


def credit_property(n: int = 10_000, seed: int = 2):
    rnd = random.Random(seed)
    bad = 0
    for capacity in (None, 50, 500):
        for tol in (None, 0, 3):
            pool, pred, expected = ExamplePool("o", capacity=capacity), MatchPredicate(tol), 0
            for _ in range(n // 9 + 1):
                p, a, per = rnd.randint(0, 30), rnd.randint(0, 30), rnd.randint(1, 5)
                expected += per * (abs(p - a) <= (tol or 0))
                credit_assign(_trace(per), str(p), str(a), pred, pool)
            bad += len(pool) != (expected if capacity is None else min(expected, capacity))
    never = ExamplePool("o")
    for _ in range(n):
        credit_assign(_trace(rnd.randint(1, 5)), "1", str(rnd.randint(2, 9)), MatchPredicate(0), never)
    ok = bad == 0 and len(never) == 0
    return ok, f"{9 * (n // 9 + 1)} credit events over 9 settings, {bad} size mismatches; never-fire stream kept pool empty ({len(never)})"


# --- 6 ----------------------------------------------------------------------------

def k_level_values():
    cases = [(0, 4, 50, 50), (0, 2, 13, 13), (1, 4, 50, 38)] + [(k, 4, 50, 1) for k in range(30, 60)]
    wrong = [c for c in cases if k_level_choice(*c[:3]) != c[3] or level_k_hand(*c[:3]) != c[3]]
    return not wrong, f"{len(cases)} hand-derived level-k values, {len(wrong)} wrong"


# --- 7 ----------------------------------------------------------------------------

def game_oracles():
    import test_games

    test_games.test_g08a_grid_matches_oracle()
    test_games.test_sag_randomized_against_reference()
    return True, "125 G0.8A choice grids and 200 randomized SAG rounds match the reference implementations"


# --- 8 ----------------------------------------------------------------------------

def transfer():
    cfg = load_match_config(LEARN)
    backend_a = cfg.build_backends()["script"]
    backend_b = alternate_learnability_backend()
    model = run_match(replace(cfg, runs=1)).cells[0].runs[0].models[0]
    archive = save_model(model)
    imported = load_model(archive)
    obs = learnability_observations()

    def predictions(m, b):
        out = [som_predict(m, "seat1", values, b)[0] for values in obs]
        m.pending.clear()
        return out

    source = predictions(model, backend_a)
    target = predictions(imported, backend_b)
    byte_identical = save_model(load_model(archive)) == archive == save_model(imported)
    ok = source == target and byte_identical
    return ok, (f"{len(obs)} predictions identical across backends {backend_a.name!r} and {backend_b.name!r}: "
                f"{source == target}; round-trip byte-identical: {byte_identical}")


# --- 9 ----------------------------------------------------------------------------

def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and (p.name.startswith("report") or p.suffix == ".jsonl")}


def determinism():
    from somarena.cli import cmd_run

    with tempfile.TemporaryDirectory() as tmp:
        trees = []
        for name in ("a", "b"):
            args = Namespace(config=str(LEARN), out=str(Path(tmp) / name), seed=None, backend=None,
                             parallelism=None, freeze_eval=None, ablation=False)
            code = cmd_run(args)
            trees.append(_tree(Path(tmp) / name))
        same = trees[0] == trees[1] and len(trees[0]) > 2
    return same and code == 0, f"two cmd_run executions, {len(trees[0])} report/log files, byte-identical: {same}"


# --- 10 ---------------------------------------------------------------------------

def live_smoke():
    cfg = load_match_config(CONFIGS / "live_g08a.toml")
    report = run_match(cfg)
    validity = report.validity()
    text = render_report(report)
    ok = validity["invalid"] == 0 and validity["episodes"] > 0 and "Win rate" in text
    return ok, f"live match: {validity['episodes']} episodes, {validity['invalid']} invalid"


CRITERIA = {
    1: scm_invariant_suite,
    2: inference_oracle,
    3: learnability,
    4: ablation_shape,
    5: credit_property,
    6: k_level_values,
    7: game_oracles,
    8: transfer,
    9: determinism,
    10: live_smoke,
}


@pytest.mark.parametrize("n", [c for c in CRITERIA if c != 10])
def test_criterion(n):
    _check(n, CRITERIA[n])


@pytest.mark.live
def test_criterion_10_live():
    if not os.environ.get("SOMARENA_API_KEY"):
        _record(10, "SKIP", "(optional) set SOMARENA_API_KEY and SOMARENA_ENDPOINT to run the live smoke")
        pytest.skip("no SOMARENA_API_KEY in the environment")
    _check(10, live_smoke)


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        if n == 10 and not os.environ.get("SOMARENA_API_KEY"):
            _record(10, "SKIP", "(optional) set SOMARENA_API_KEY and SOMARENA_ENDPOINT to run the live smoke")
            continue
        try:
            _check(n, fn)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
