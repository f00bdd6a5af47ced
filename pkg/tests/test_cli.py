"""Command-line behaviour: artifacts, exit codes, determinism."""

import csv
import json

import fosg
from fosg.cli import main
from fosg.io import spec_to_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_inspect_kuhn(capsys):
    code, out, _ = run_cli(capsys, "inspect", "--game", "kuhn")
    assert code == 0
    doc = json.loads(out)
    assert doc["terminals"] == 30
    assert doc["infosets"] == [6, 6]
    assert doc["serial"] is True


def test_inspect_pennies_not_serial(capsys):
    code, out, _ = run_cli(capsys, "inspect", "--game", "matching_pennies")
    assert code == 0
    assert json.loads(out)["serial"] is False


def test_inspect_malformed_spec_exits_2(capsys, tmp_path):
    doc = spec_to_json(fosg.kuhn_poker())
    doc["player_fn"]["deal"] = [1]
    doc["actions"]["deal/1"] = ["x"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "inspect", "--game", str(path))
    assert code == 2
    assert "initial-state-active" in err


def test_solve_lp_pennies(capsys, tmp_path):
    out_path = tmp_path / "result.json"
    code, _, _ = run_cli(capsys, "solve", "lp", "--game", "matching_pennies",
                         "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["schema"] == 1
    assert doc["method"] == "lp"
    assert abs(doc["game_value"]) <= 1e-9
    assert doc["exploitability"] <= 1e-9


def test_solve_cfr_writes_trace(capsys, tmp_path):
    out_path = tmp_path / "result.json"
    trace_path = tmp_path / "trace.csv"
    code, _, _ = run_cli(capsys, "solve", "cfr", "--game", "kuhn",
                         "--iters", "200", "--stride", "100",
                         "--trace", str(trace_path), "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["iterations"] == 200
    assert doc["exploitability"] < 0.2
    rows = list(csv.reader(trace_path.read_text().splitlines()))
    assert rows[0] == ["iteration", "exploitability", "value_p1", "wall_ms"]
    assert [r[0] for r in rows[1:]] == ["100", "200"]


def test_solve_cfrd_runs(capsys, tmp_path):
    out_path = tmp_path / "result.json"
    code, _, _ = run_cli(capsys, "solve", "cfrd", "--game", "kuhn",
                         "--iters", "50", "--subgame-iters", "50",
                         "--trunk-depth", "2", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["method"] == "cfrd"
    assert doc["exploitability"] < 0.5


def test_solve_rejects_general_sum_with_exit_3(capsys, tmp_path):
    spec = fosg.kuhn_poker()
    rewards = dict(spec.rewards)
    key = next(k for k in rewards if rewards[k] != (0.0, 0.0))
    rewards[key] = (rewards[key][0] + 1.0, rewards[key][1])
    skewed = fosg.GameSpec(
        num_players=2, states=spec.states, initial_state=spec.initial_state,
        player_fn=spec.player_fn, legal_actions=spec.legal_actions,
        transitions=spec.transitions, rewards=rewards, observations=spec.observations)
    path = tmp_path / "skewed.json"
    path.write_text(json.dumps(spec_to_json(skewed)))
    code, _, _ = run_cli(capsys, "solve", "cfr", "--game", str(path), "--iters", "5",
                         "--stride", "5")
    assert code == 3


def test_timing_check_nontimeable(capsys):
    code, out, _ = run_cli(capsys, "timing", "check", "--game", "nontimeable")
    assert code == 0
    doc = json.loads(out)
    assert doc["timeable"] is False
    assert len(doc["witness_nodes"]) == 4


def test_timing_check_kuhn_labels(capsys):
    code, out, _ = run_cli(capsys, "timing", "check", "--game", "kuhn")
    assert code == 0
    doc = json.loads(out)
    assert doc["timeable"] is True
    assert doc["labels"]["n0"] == 0


def test_timing_pad_chain(capsys, tmp_path):
    out_path = tmp_path / "padded.json"
    code, out, _ = run_cli(capsys, "timing", "pad", "--game", "padding_chain:5",
                           "--out", str(out_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["added"] == 10  # skips sum to 5*4/2
    assert doc["padded"] == doc["original"] + doc["added"]
    assert doc["padded"] <= doc["bound"]
    padded = json.loads(out_path.read_text())
    assert len(padded["nodes"]) == doc["padded"]


def test_timing_pad_nontimeable_exits_4(capsys):
    code, _, _ = run_cli(capsys, "timing", "pad", "--game", "nontimeable")
    assert code == 4


def test_export_views(capsys, tmp_path):
    for view, needle in (("public", "dealt"), ("history", "deal"), ("infoset:1", "J|dealt")):
        path = tmp_path / f"{view.replace(':', '_')}.dot"
        code, _, _ = run_cli(capsys, "export", "--view", view, "--game", "kuhn",
                             "--out", str(path))
        assert code == 0
        assert needle in path.read_text()


def test_export_unknown_view_exits_2(capsys):
    code, _, _ = run_cli(capsys, "export", "--view", "bogus", "--game", "kuhn")
    assert code == 2


def test_export_public_tree_matches_betting_structure(capsys, tmp_path):
    path = tmp_path / "public.dot"
    run_cli(capsys, "export", "--view", "public", "--game", "kuhn", "--out", str(path))
    text = path.read_text()
    rep = fosg.unroll(fosg.kuhn_poker())
    assert text.count("label=") >= len(rep.public_sets)


def test_unknown_game_exits_2(capsys):
    code, _, err = run_cli(capsys, "inspect", "--game", "nope")
    assert code == 2
    assert "nope" in err


def test_solver_determinism(capsys, tmp_path):
    paths = []
    for tag in ("a", "b"):
        out_path = tmp_path / f"{tag}.json"
        trace_path = tmp_path / f"{tag}.csv"
        code, _, _ = run_cli(capsys, "solve", "cfr", "--game", "kuhn",
                             "--iters", "300", "--stride", "150", "--seed", "0",
                             "--trace", str(trace_path), "--out", str(out_path))
        assert code == 0
        paths.append((out_path, trace_path))
    doc_a = json.loads(paths[0][0].read_text())
    doc_b = json.loads(paths[1][0].read_text())
    doc_a.pop("wall_s"), doc_b.pop("wall_s")
    assert doc_a == doc_b
    rows_a = [r[:3] for r in csv.reader(paths[0][1].read_text().splitlines())]
    rows_b = [r[:3] for r in csv.reader(paths[1][1].read_text().splitlines())]
    assert rows_a == rows_b  # identical apart from wall-clock column


def test_export_pennies_history_counts(capsys, tmp_path):
    path = tmp_path / "history.dot"
    code, _, _ = run_cli(capsys, "export", "--view", "history",
                         "--game", "matching_pennies", "--out", str(path))
    assert code == 0
    text = path.read_text()
    rep = fosg.unroll(fosg.serialize(fosg.matching_pennies()))
    assert text.count(" -> ") == len(rep.nodes) - 1
    assert text.count("shape=box") == 4  # four terminal leaves


def test_solve_cfrd_with_trunk_file(capsys, tmp_path):
    rep = fosg.unroll(fosg.kuhn_poker())
    keys = [list(k) for k in rep.public_sets if len(k) < 2]
    trunk_path = tmp_path / "trunk.json"
    trunk_path.write_text(json.dumps(keys))
    out_path = tmp_path / "result.json"
    code, _, _ = run_cli(capsys, "solve", "cfrd", "--game", "kuhn",
                         "--iters", "20", "--subgame-iters", "20",
                         "--trunk-file", str(trunk_path), "--out", str(out_path))
    assert code == 0
    assert json.loads(out_path.read_text())["method"] == "cfrd"


def test_fixture_catalog_metadata():
    from fosg.games import catalog

    fixtures = catalog()
    assert set(fixtures) >= {"kuhn", "matching_pennies", "nontimeable", "kuhn_chance"}
    kuhn = fixtures["kuhn"]
    rep = fosg.unroll(kuhn.build())
    assert len(rep.terminals()) == kuhn.metadata["terminals"]
    assert tuple(len(rep.acting_infosets(p)) for p in (1, 2)) == \
        kuhn.metadata["acting_infosets"]
