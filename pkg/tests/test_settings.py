"""Settings layering, thread resolution and logging level"""
import json
import logging

import pytest
from pydantic import ValidationError

from core.errors import PipelineIOError
from core.settings import (
    LOG_LEVEL_ENV,
    THREADS_ENV,
    Preset,
    build_run_config,
    load_config_file,
    log_level,
    resolve_threads,
    write_run_config
)


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 4, "preset": "paper", "train": {"epochs": 10, "patience": 3}}))
    run = build_run_config("train", {"seed": 9, "threads": 2, "train": {"epochs": 5, "lr_max": None}}, path)
    assert run.seed == 9
    assert run.threads == 2
    assert run.preset is Preset.PAPER
    assert run.train == {"epochs": 5, "patience": 3}
    assert run.config_file == str(path)


def test_toml_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('seed = 3\n\n[model]\nd_model = 32\n')
    run = build_run_config("gradcheck", {"threads": 1}, path)
    assert (run.seed, run.model) == (3, {"d_model": 32})
    assert run.preset is Preset.DESK


def test_malformed_config_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{seed: ")
    with pytest.raises(PipelineIOError):
        load_config_file(path)
    with pytest.raises(PipelineIOError):
        load_config_file(tmp_path / "missing.toml")


def test_invalid_preset():
    with pytest.raises(ValidationError):
        build_run_config("train", {"threads": 1, "preset": "huge"})


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "6")
    assert resolve_threads(2) == 2
    assert resolve_threads(0) == 1
    assert resolve_threads() == 6
    monkeypatch.setenv(THREADS_ENV, "many")
    assert resolve_threads() >= 1
    monkeypatch.delenv(THREADS_ENV)
    assert resolve_threads() >= 1


def test_log_level(monkeypatch):
    monkeypatch.setenv(LOG_LEVEL_ENV, "warning")
    assert log_level() == logging.WARNING
    assert log_level(verbose=True) == logging.DEBUG
    monkeypatch.setenv(LOG_LEVEL_ENV, "chatty")
    assert log_level() == logging.INFO


def test_write_run_config(tmp_path):
    run = build_run_config("synth", {"threads": 1, "paths": {"out": "x"}})
    path = write_run_config(run, tmp_path)
    assert json.loads(path.read_text())["paths"] == {"out": "x"}
