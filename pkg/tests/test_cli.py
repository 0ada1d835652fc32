import json
import os
import shutil

import jsonschema
import pytest
from click.testing import CliRunner

from climarisk import __version__
from climarisk.cli import main
from climarisk.config import config_schema, load_config, parse_config, summary_schema
from climarisk.errors import ConfigError

PIPELINES = ("insure", "develop", "preserve")
CYCLE = "1,9,1/9\n1/9,1,9\n9,1/9,1\n"


@pytest.fixture
def work(tmp_path, samples_dir):
    for name in os.listdir(samples_dir):
        src = os.path.join(samples_dir, name)
        if os.path.isfile(src):
            shutil.copy(src, tmp_path / name)
    return tmp_path


def invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def edit(path, fn):
    doc = json.loads(path.read_text())
    fn(doc)
    path.write_text(json.dumps(doc))


def summary(out):
    with open(os.path.join(out, "summary.json"), encoding="utf-8") as fh:
        return json.load(fh)


def test_schemas_are_valid_documents():
    jsonschema.Draft202012Validator.check_schema(config_schema())
    jsonschema.Draft202012Validator.check_schema(summary_schema())


@pytest.mark.parametrize("pipeline", PIPELINES)
def test_run_ok_and_summary_schema(work, pipeline):
    out = work / "o"
    res = invoke(pipeline, "run", "--config", str(work / f"{pipeline}.json"),
                 "--out", str(out))
    assert res.exit_code == 0, res.output
    doc = summary(out)
    jsonschema.validate(doc, summary_schema())
    assert doc["status"] == "ok"
    assert doc["version"] == __version__
    assert all(s["status"] == "ok" for s in doc["stages"])
    assert sorted(os.listdir(out)) == doc["outputs"]
    assert "output_dir" not in doc["config"]


def test_seed_override_is_recorded(work):
    out = work / "o"
    invoke("preserve", "run", "--config", str(work / "preserve.json"), "--out", str(out),
           "--seed", "7")
    assert summary(out)["seed"] == 7
    assert summary(out)["config"]["seed"] == 7


@pytest.mark.parametrize("mutate", [
    lambda d: d.__setitem__("bogus", 1),
    lambda d: d["params"].__setitem__("C", -1),
    lambda d: d["schema"]["features"].append("nope"),
    lambda d: d["inputs"].__setitem__("panel", "missing.csv"),
    lambda d: d["params"].__setitem__("lambda_grid", [0.5, 0.1]),
])
def test_invalid_config_exit_2(work, mutate):
    edit(work / "insure.json", mutate)
    res = invoke("insure", "run", "--config", str(work / "insure.json"), "--out",
                 str(work / "o"))
    assert res.exit_code == 2
    assert not (work / "o").exists()


def test_wrong_pipeline_and_validate(work):
    res = invoke("develop", "run", "--config", str(work / "insure.json"))
    assert res.exit_code == 2
    assert invoke("validate", "--config", str(work / "develop.json")).exit_code == 0
    assert invoke("validate", "--config", str(work / "nope.json")).exit_code == 2


def test_inconsistent_matrix_exit_3(work):
    (work / "cycle.csv").write_text(CYCLE)

    def mutate(d):
        d["inputs"]["ahp_matrix"] = "cycle.csv"
        d["schema"]["features"] = d["schema"]["features"][:3]

    edit(work / "preserve.json", mutate)
    out = work / "o"
    res = invoke("preserve", "run", "--config", str(work / "preserve.json"), "--out", str(out))
    assert res.exit_code == 3
    doc = summary(out)
    jsonschema.validate(doc, summary_schema())
    stages = {s["name"]: s["status"] for s in doc["stages"]}
    assert stages["ahp"] == "failed" and stages["score"] == "skipped"

    res = invoke("preserve", "run", "--config", str(work / "preserve.json"), "--out",
                 str(out), "--allow-inconsistent")
    assert res.exit_code == 0
    assert any("CR" in w or "consisten" in w for w in summary(out)["warnings"])


def test_stage_failure_exit_1(work):
    panel = (work / "insure_panel.csv").read_text().splitlines()
    rows = [panel[0] + ",label"] + [r + ",0" for r in panel[1:]]
    (work / "insure_panel.csv").write_text("\n".join(rows) + "\n")

    def mutate(d):
        d["schema"].pop("npm")
        d["schema"].pop("label_policy")
        d["schema"]["label_column"] = "label"

    edit(work / "insure.json", mutate)
    out = work / "o"
    res = invoke("insure", "run", "--config", str(work / "insure.json"), "--out", str(out))
    assert res.exit_code == 1
    doc = summary(out)
    jsonschema.validate(doc, summary_schema())
    assert doc["status"] == "failed"
    failed = [s for s in doc["stages"] if s["status"] == "failed"]
    assert failed[0]["name"] == "label" and "+1/-1" in failed[0]["error"]


@pytest.mark.parametrize("pipeline", PIPELINES)
def test_threads_do_not_change_outputs(work, pipeline):
    cfg = str(work / f"{pipeline}.json")
    invoke(pipeline, "run", "--config", cfg, "--out", str(work / "t1"), "--threads", "1")
    invoke(pipeline, "run", "--config", cfg, "--out", str(work / "t8"), "--threads", "8")
    for name in os.listdir(work / "t1"):
        assert (work / "t1" / name).read_bytes() == (work / "t8" / name).read_bytes(), name


def test_version_command():
    res = invoke("version")
    assert res.output.startswith(f"climarisk {__version__} (")


def test_parse_config_defaults(work):
    cfg = load_config(work / "preserve.json")
    assert cfg.params["robustness"]["trials"] == 200
    assert cfg.params["robustness"]["recompute_weights"] is True
    assert cfg.seed == 2024
    with pytest.raises(ConfigError):
        parse_config({"pipeline": "forecast"})
    with pytest.raises(ConfigError):
        parse_config([])


def test_develop_benchmark_from_model(work):
    out = work / "ins"
    assert invoke("insure", "run", "--config", str(work / "insure.json"), "--out",
                  str(out)).exit_code == 0
    model = json.loads((out / "model.json").read_text())
    assert model["format"] == "climarisk.svm"
    names = model["normalization"]["names"]
    # a develop panel carrying the model's feature columns
    lines = (work / "insure_panel.csv").read_text().splitlines()
    (work / "towns.csv").write_text("\n".join(lines[:12]) + "\n")

    def mutate(d):
        d["inputs"] = {"panel": "towns.csv", "benchmark_model": str(out / "model.json")}
        d["schema"] = {"features": names, "population": "population"}

    edit(work / "develop.json", mutate)
    res = invoke("develop", "run", "--config", str(work / "develop.json"), "--out",
                 str(work / "dev"))
    assert res.exit_code == 0, res.output
    doc = summary(work / "dev")
    assert {s["name"]: s["status"] for s in doc["stages"]}["benchmark"] == "ok"
