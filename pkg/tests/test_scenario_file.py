import random

import pytest

from cli.scenario_file import load_scenario, parse_scenario, render_scenario, resolve_scenario_path
from config.config import SCENARIO_DIR
from netmodel import EventKind, NodeKind
from sim import ReactionMode
from utils.errors import ScenarioParseError, ScenarioSemanticError, SmanetError

MINIMAL = """\
[nodes]
1 soldier 1 0 100
2 vehicle 0 1 inf bank
3 soldier 0 0 100
[links]
1 2 5
2 3 7.5
"""


def test_two_teams_contents(two_teams_scenario):
    topo = two_teams_scenario.topology
    assert len(topo.nodes) == 8
    assert len(topo.links) == 10
    assert len(two_teams_scenario.flows) == 3
    assert [e.kind for e in two_teams_scenario.topology_events] == [EventKind.NODE_COMPROMISED, EventKind.NODE_RESTORED]
    assert topo.sdn_nodes == {2, 4}
    assert two_teams_scenario.params.mode is ReactionMode.CENTRALIZED
    assert two_teams_scenario.name == 'two_teams'


def test_minimal_scenario():
    scenario = parse_scenario(MINIMAL)
    topo = scenario.topology
    assert topo.node(2).kind is NodeKind.VEHICLE
    assert topo.node(2).power_bank
    assert topo.node(2).controller_candidate
    assert topo.link(3, 2).latency == 7.5
    assert scenario.flows == ()
    assert scenario.params.mode is ReactionMode.CENTRALIZED


def test_comments_and_blank_lines():
    text = "# header comment\n\n" + MINIMAL.replace("1 2 5", "1 2 5   # short hop")
    assert parse_scenario(text).topology.link(1, 2).latency == 5


def test_empty_file():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario("")
    assert info.value.line == 0
    assert "missing [nodes] section" in info.value.message


def test_unknown_node_in_links():
    text = MINIMAL + "99 1 4\n"
    with pytest.raises(ScenarioSemanticError) as info:
        parse_scenario(text)
    assert info.value.line == 8
    assert "unknown node 99" in info.value.message


@pytest.mark.parametrize('extra, line, fragment', [
    ("[flows]\n1 3 weather 1 0 1\n", 9, "unknown category"),
    ("[links]\n", 8, "duplicate section"),
    ("[routes]\n", 8, "unknown section"),
    ("[events]\n500 link_down 1 2\n100 link_up 1 2\n", 10, "earlier than the previous"),
    ("[events]\n100 link_down 1 3\n", 9, "unknown link 1-3"),
    ("[events]\n100 explode 1\n", 9, "unknown event kind"),
    ("[params]\nttl 0\n", 9, "ttl"),
    ("[params]\nwarp 9\n", 9, "unknown parameter"),
    ("[params]\nseed 1\nseed 2\n", 10, "duplicate parameter"),
    ("[params]\nsites 7\n", 9, "unknown node 7"),
    ("[params]\norganization ring\n", 9, "organization"),
])
def test_error_lines(extra, line, fragment):
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(MINIMAL + extra)
    assert info.value.line == line
    assert fragment in info.value.message


def test_node_errors():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario("[nodes]\n1 tank 0 0 100\n")
    assert info.value.line == 2
    with pytest.raises(ScenarioParseError):
        parse_scenario("[nodes]\n1 soldier 2 0 100\n")
    with pytest.raises(ScenarioParseError):
        parse_scenario("[nodes]\n1 soldier 0 0 100\n1 soldier 0 0 100\n")
    with pytest.raises(ScenarioParseError):
        parse_scenario("1 soldier 0 0 100\n[nodes]\n")


def test_duplicate_link_either_direction():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(MINIMAL + "2 1 9\n")
    assert "duplicate link 1-2" in info.value.message


def test_parser_is_total():
    """Random corruption of a real file must only ever raise ScenarioParseError"""
    text = resolve_scenario_path('cloudlet').read_text(encoding='utf-8')
    lines = text.splitlines()
    junk = ['', 'x', '-1', '0', 'inf', 'nan', '1e309', '[', '[nodes]', '99', '3.5', 'link_down', '#']
    rng = random.Random(11)
    for _ in range(300):
        mutated = list(lines)
        for _ in range(rng.randint(1, 4)):
            index = rng.randrange(len(mutated))
            fields = mutated[index].split()
            choice = rng.random()
            if choice < 0.3 or not fields:
                del mutated[index]
            elif choice < 0.8:
                fields[rng.randrange(len(fields))] = rng.choice(junk)
                mutated[index] = " ".join(fields)
            else:
                mutated.insert(index, mutated[rng.randrange(len(mutated))])
        try:
            parse_scenario("\n".join(mutated))
        except ScenarioParseError:
            pass


def test_render_round_trip(bundled):
    again = parse_scenario(render_scenario(bundled), name=bundled.name)
    assert again == bundled
    assert render_scenario(again) == render_scenario(bundled)


def test_load_by_bare_name():
    assert load_scenario('link_failure').topology == load_scenario(SCENARIO_DIR / 'link_failure.scn').topology


def test_load_errors_name_the_file(tmp_path):
    broken = tmp_path / 'broken.scn'
    broken.write_text("[nodes]\n1 soldier 0 0 abc\n", encoding='utf-8')
    with pytest.raises(ScenarioParseError) as info:
        load_scenario(broken)
    assert info.value.message.startswith("broken.scn: ")
    with pytest.raises(SmanetError):
        load_scenario(tmp_path / 'missing.scn')
