import json
import warnings

import pytest
from click.testing import CliRunner

with warnings.catch_warnings():
    warnings.simplefilter("ignore", DeprecationWarning)
    from starlette.testclient import TestClient

from extricat.cli import main
from extricat.descriptors import fixtures_dir, load_fixture
from extricat.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture()
def runner():
    return CliRunner()


def fix_path(name: str) -> str:
    return str(fixtures_dir() / f"{name}.json")


def test_health_and_commands(client):
    assert client.get("/health").json()["status"] == "ok"
    cmds = client.get("/commands").json()["commands"]
    assert "theorem-a" in cmds and "verify-theorem-b" in cmds
    fixtures = client.get("/fixtures").json()["fixtures"]
    assert {"fix_a", "fix_a2", "fix_p", "fix_t", "fix_point"} <= set(fixtures)


def test_load_endpoint(client):
    resp = client.post("/load", json={"command": "validate", "fixture": "fix_a"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["backend"] == "abelian"
    assert sorted(body["objects"]) == ["P", "S"]


def test_load_error_dangling_label(client):
    desc = json.loads((fixtures_dir() / "fix_p.json").read_text())
    desc["payload"]["objects"] = ["S1", "NOPE"]
    resp = client.post("/load", json={"command": "validate", "descriptor": desc})
    assert resp.status_code == 422
    assert "NOPE" in resp.json()["detail"]


def test_load_error_bad_module_shape(client):
    desc = json.loads((fixtures_dir() / "fix_a.json").read_text())
    desc["payload"]["objects"]["S"]["maps"]["x"] = [[0, 0]]
    resp = client.post("/load", json={"command": "validate", "descriptor": desc})
    assert resp.status_code == 422
    assert "map" in resp.json()["detail"]


def test_load_error_missing_cone(client):
    desc = json.loads((fixtures_dir() / "fix_point.json").read_text())
    desc["payload"]["cones"] = {}
    resp = client.post("/load", json={"command": "validate", "descriptor": desc})
    assert resp.status_code == 422
    assert "cone" in resp.json()["detail"]


def test_run_def_simples_via_service(client):
    resp = client.post("/run", json={"command": "def-simples", "fixture": "fix_a"})
    assert resp.status_code == 200
    cert = resp.json()
    assert cert["command"] == "def-simples"
    assert all(c["status"] == "PASS" for c in cert["checks"])
    sigma = [c for c in cert["checks"] if c["name"] == "sigma"][0]["details"]["sigma"]
    assert sigma == ["S"]


def test_run_rejects_unknown_command(client):
    resp = client.post("/run", json={"command": "nonsense", "fixture": "fix_a"})
    assert resp.status_code == 422


def test_run_needs_pair_for_heart(client):
    resp = client.post("/run", json={"command": "heart", "fixture": "fix_point"})
    assert resp.status_code == 422
    assert "pair" in resp.json()["detail"]


def test_certificates_byte_identical(client):
    a = client.post("/run", json={"command": "def-simples", "fixture": "fix_a", "seed": 3})
    b = client.post("/run", json={"command": "def-simples", "fixture": "fix_a", "seed": 3})
    assert a.content == b.content


def test_cli_def_simples_exit_zero(runner):
    result = runner.invoke(main, ["def-simples", fix_path("fix_a"), "--format", "text"])
    assert result.exit_code == 0, result.output
    assert "overall: PASS" in result.output


def test_cli_json_output_parses(runner):
    result = runner.invoke(main, ["validate", fix_path("fix_point")])
    assert result.exit_code == 0
    cert = json.loads(result.output)
    assert cert["backend"] == "table"


def test_cli_accepts_toml(runner):
    result = runner.invoke(main, ["def-simples", str(fixtures_dir() / "fix_a.toml")])
    assert result.exit_code == 0
    cert = json.loads(result.output)
    assert cert["input_digest"] == load_fixture("fix_a").digest()


def test_cli_usage_error_exit_two(runner):
    result = runner.invoke(main, ["validate", "/nonexistent/input.json"])
    assert result.exit_code == 2


def test_cli_pair_override(runner):
    result = runner.invoke(
        main,
        ["heart", fix_path("fix_t"), "--pair-u", "S2", "--pair-v", "S1,S2"],
    )
    assert result.exit_code == 0
    cert = json.loads(result.output)
    names = {c["name"] for c in cert["checks"]}
    assert "heart-presentation" in names


def test_cli_field_override_runs_over_f5(runner):
    result = runner.invoke(main, ["def-simples", fix_path("fix_a"), "--field", "F_5"])
    assert result.exit_code == 0
    cert = json.loads(result.output)
    assert cert["field"] == "F_5"


def test_cli_caps_parse_error(runner):
    result = runner.invoke(main, ["validate", fix_path("fix_a"), "--caps", "bogus=3"])
    assert result.exit_code != 0


def test_replay_of_failing_certificate(runner, client, tmp_path):
    # corrupted pairing: wrong sigma makes def-simples fail with a witness
    desc = json.loads((fixtures_dir() / "fix_a.json").read_text())
    resp = client.post(
        "/run",
        json={"command": "verify-theorem-b", "fixture": "fix_t", "pair": {"U": ["S1"], "V": ["S2"]}},
    )
    cert = resp.json()
    assert any(c["status"] == "FAIL" for c in cert["checks"])
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(cert))
    result = runner.invoke(main, ["replay", str(path)])
    assert result.exit_code in (0, 1)
    assert "is-cotorsion-pair" in result.output


def test_replay_confirms_dim_mismatch(runner, tmp_path):
    cert = {
        "field": "F_101",
        "checks": [
            {
                "name": "synthetic",
                "status": "FAIL",
                "witness": {"replay": {"kind": "dim-mismatch", "left": 1, "right": 2}},
            }
        ],
    }
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(cert))
    result = runner.invoke(main, ["replay", str(path)])
    assert result.exit_code == 0
    assert "CONFIRMED" in result.output


def test_selftest_cli(runner):
    result = runner.invoke(main, ["selftest", "--format", "text"])
    assert result.exit_code == 0, result.output
    assert "overall: PASS" in result.output
