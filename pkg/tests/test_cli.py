import json
import subprocess
import sys

import numpy as np
import pytest

from sparse_unitary import random_sparse_unitary, read_matrix_market, write_matrix_market
from sparse_unitary.cli import RunManifest, main
from sparse_unitary.io import write_state
from sparse_unitary.models import hadamard_head_rule, move_right_rule


@pytest.fixture
def unitary_file(tmp_path):
    p = tmp_path / "u.mtx"
    assert main(["random-unitary", "--n", "16", "--d", "2", "--seed", "3", "--out", str(p)]) == 0
    return p


def test_random_unitary_reproducible(tmp_path, unitary_file):
    q = tmp_path / "again.mtx"
    main(["random-unitary", "--n", "16", "--d", "2", "--seed", "3", "--out", str(q)])
    assert unitary_file.read_bytes() == q.read_bytes()
    assert read_matrix_market(q) == random_sparse_unitary(16, 2, 3)


def test_seed_required(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["random-unitary", "--n", "4", "--d", "1", "--out", str(tmp_path / "x.mtx")])
    assert exc.value.code == 2


def test_dilate_identity(tmp_path):
    src, dst = tmp_path / "i.mtx", tmp_path / "h.mtx"
    src.write_text("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n")
    assert main(["dilate", str(src), str(dst)]) == 0
    lines = dst.read_text().splitlines()
    assert lines[1] == "2 2 2"
    assert lines[2:] == ["1 2 1 0", "2 1 1 0"]


def test_evolve_verify_pipeline(tmp_path, unitary_file, capsys):
    h = tmp_path / "h.mtx"
    main(["dilate", str(unitary_file), str(h)])
    man = tmp_path / "run.json"
    assert main(["evolve", "--h", str(h), "--epsilon", "1e-3", "--out", str(man)]) == 0
    capsys.readouterr()
    assert main(["verify", "--u", str(unitary_file), "--factors", str(man)]) == 0
    out = capsys.readouterr().out
    err = float(out.strip().split("=")[1])
    assert err <= 1e-3
    assert main(["verify", "--u", str(unitary_file), "--factors", str(man), "--phase-invariant"]) == 0


def test_evolve_byte_reproducible(tmp_path, unitary_file):
    h = tmp_path / "h.mtx"
    main(["dilate", str(unitary_file), str(h)])
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        main(["--manifest", str(d / "cli.json"), "evolve", "--h", str(h), "--epsilon", "1e-3",
              "--out", str(d / "run.json")])
        files = sorted(p.relative_to(d) for p in d.rglob("*") if p.is_file())
        outs.append({str(f): (d / f).read_bytes() for f in files if f.name != "cli.json"})
        cli = json.loads((d / "cli.json").read_text())
        assert cli["wall_time"] > 0
        cli.pop("wall_time")
        outs[-1]["cli"] = json.dumps(cli, sort_keys=True).replace(str(d), "")
    assert outs[0] == outs[1]


def test_verify_unmet_epsilon(tmp_path, unitary_file, capsys):
    h = tmp_path / "h.mtx"
    main(["dilate", str(unitary_file), str(h)])
    man = tmp_path / "run.json"
    main(["evolve", "--h", str(h), "--epsilon", "1e-2", "--order", "1", "--out", str(man)])
    assert main(["verify", "--u", str(unitary_file), "--factors", str(man), "--epsilon", "1e-9"]) == 3
    assert "exceeds epsilon" in capsys.readouterr().err


def test_verify_dimension_mismatch(tmp_path, unitary_file):
    other = tmp_path / "o.mtx"
    write_matrix_market(random_sparse_unitary(8, 1, 0), other)
    h = tmp_path / "h.mtx"
    main(["dilate", str(other), str(h)])
    man = tmp_path / "run.json"
    main(["evolve", "--h", str(h), "--epsilon", "1e-3", "--out", str(man)])
    assert main(["verify", "--u", str(unitary_file), "--factors", str(man)]) == 2


def test_implement(tmp_path, unitary_file):
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    sp, out = tmp_path / "psi.json", tmp_path / "out.json"
    write_state(psi, sp)
    assert main(["implement", "--u", str(unitary_file), "--state", str(sp), "--out", str(out)]) == 0
    got = json.loads(out.read_text())
    v = np.array([complex(a, b) for a, b in got["amps"]])
    u = read_matrix_market(unitary_file)
    assert np.linalg.norm(v - u @ psi) <= 1e-3


def test_implement_non_unitary(tmp_path):
    m = tmp_path / "m.mtx"
    m.write_text("%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n")
    s = tmp_path / "s.json"
    write_state(np.array([1, 0]), s)
    assert main(["implement", "--u", str(m), "--state", str(s)]) == 2


def test_missing_file(tmp_path, capsys):
    assert main(["dilate", str(tmp_path / "nope.mtx"), str(tmp_path / "x.mtx")]) == 2
    assert "nope.mtx" in capsys.readouterr().err


def test_malformed_matrix(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate complex general\n2 2 1\n5 1 1 0\n")
    assert main(["dilate", str(bad), str(tmp_path / "x.mtx")]) == 2
    assert "bounds" in capsys.readouterr().err


def test_walk_run(tmp_path):
    cfg, out = tmp_path / "walk.json", tmp_path / "dist.json"
    cfg.write_text(json.dumps({"n": 8, "steps": 1, "start": {"x": 0, "coin": 0}}))
    assert main(["walk", "run", "--config", str(cfg), "--out", str(out)]) == 0
    dist = json.loads(out.read_text())["distribution"]
    assert dist[7] == pytest.approx(0.5) and dist[1] == pytest.approx(0.5)
    assert sum(dist) == pytest.approx(1.0)
    csv = tmp_path / "dist.csv"
    assert main(["walk", "run", "--config", str(cfg), "--format", "csv", "--out", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "site,probability"
    assert float(lines[2].split(",")[1]) == pytest.approx(0.5)


def test_walk_dilation(tmp_path):
    cfg, out = tmp_path / "walk.json", tmp_path / "dist.json"
    cfg.write_text(json.dumps({"n": 4, "steps": 2}))
    assert main(["walk", "run", "--config", str(cfg), "--method", "dilation", "--out", str(out)]) == 0
    assert sum(json.loads(out.read_text())["distribution"]) == pytest.approx(1, abs=1e-3)


def test_qtm_run_and_validate(tmp_path, capsys):
    rule = tmp_path / "rule.json"
    rule.write_text(json.dumps(move_right_rule().to_json()))
    out = tmp_path / "state.json"
    assert main(["qtm", "run", "--rule", str(rule), "--steps", "3", "--tape", "1,0,1",
                 "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    (cfg,) = res["configurations"]
    assert cfg["head"] == 3 and cfg["amp"] == [1.0, 0.0]
    assert main(["qtm", "validate", "--rule", str(rule), "--probe-radius", "3"]) == 0


def test_qtm_dilation_method(tmp_path):
    rule = tmp_path / "rule.json"
    rule.write_text(json.dumps(hadamard_head_rule().to_json()))
    out = tmp_path / "state.json"
    assert main(["qtm", "run", "--rule", str(rule), "--steps", "2", "--method", "dilation",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["norm"] == pytest.approx(1, abs=1e-3)


def test_qtm_bad_rule(tmp_path, capsys):
    rule = tmp_path / "rule.json"
    obj = move_right_rule().to_json()
    obj["delta"][0]["amp"] = [0.5, 0]
    rule.write_text(json.dumps(obj))
    assert main(["qtm", "validate", "--rule", str(rule)]) == 2
    assert "q='q0', sigma=0" in capsys.readouterr().err


def test_qtm_steps_too_large(tmp_path):
    rule = tmp_path / "rule.json"
    rule.write_text(json.dumps(move_right_rule().to_json()))
    assert main(["qtm", "run", "--rule", str(rule), "--steps", "3", "--radius", "3"]) == 2


def test_symrep(tmp_path, capsys):
    out = tmp_path / "s2.mtx"
    assert main(["symrep", "--partition", "2,1", "--generator", "2", "--check", "--out", str(out)]) == 0
    assert "relations ok" in capsys.readouterr().out
    g = read_matrix_market(out)
    assert g[0, 0] == pytest.approx(-0.5) and g[0, 1] == pytest.approx(np.sqrt(3) / 2)
    assert main(["symrep", "--partition", "1,2"]) == 2
    assert main(["symrep", "--partition", "2,1", "--generator", "3"]) == 2


def test_run_manifest_round_trip(tmp_path, unitary_file):
    m = tmp_path / "cli.json"
    h = tmp_path / "h.mtx"
    assert main(["--manifest", str(m), "dilate", str(unitary_file), str(h)]) == 0
    text = m.read_text()
    assert RunManifest.from_json(text).to_json() == text
    assert json.loads(text)["command"] == "dilate"


def test_console_script_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "sparse_unitary.cli", "symrep", "--partition", "3"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "dim=1" in out.stdout
