import pytest
import yaml

from config_loader import ConfigLoader
from maze.errors import ConfigError

PROVIDERS = """
defaults:
  max_output_tokens: 4096
  requests_per_minute: 10
  concurrency: 2
  input_mode: text-grid
providers:
  - adapter_kind: local
    model_id: oracle
  - adapter_kind: responses-api
    model_id: gpt-x
    reasoning: low
    max_output_tokens: 16000
"""


@pytest.fixture
def providers_file(tmp_path, monkeypatch):
    monkeypatch.delenv("MAZEBENCH_PROVIDERS", raising=False)
    monkeypatch.delenv("MAZEBENCH_TRIAL_TIMEOUT", raising=False)
    path = tmp_path / "providers.yaml"
    path.write_text(PROVIDERS, encoding="utf-8")
    return path


def test_local_load_applies_defaults(providers_file):
    loader = ConfigLoader(str(providers_file))
    config = loader.load()
    oracle, remote = loader.providers(config)
    assert oracle.max_output_tokens == 4096
    assert remote.max_output_tokens == 16000
    assert remote.requests_per_minute == 10
    assert remote.timeout_s == 300
    assert remote.label == "gpt-x (low)"
    assert loader.run_settings(config) == {"concurrency": 2, "input_mode": "text-grid"}


def test_trial_timeout_from_environment(providers_file, monkeypatch):
    monkeypatch.setenv("MAZEBENCH_TRIAL_TIMEOUT", "45")
    assert all(p.timeout_s == 45 for p in ConfigLoader(str(providers_file)).providers())


def test_unknown_field_is_rejected(tmp_path):
    path = tmp_path / "providers.yaml"
    path.write_text("providers:\n  - adapter_kind: local\n    model_id: oracle\n    colour: red\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="colour"):
        ConfigLoader(str(path)).providers()


@pytest.mark.parametrize("text", ["", "providers: {}\n", "providers: []\n"])
def test_unusable_documents(tmp_path, text):
    path = tmp_path / "providers.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigLoader(str(path)).providers()


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ConfigLoader(str(tmp_path / "absent.yaml")).load()


class FakeReply:
    def __init__(self, text):
        self.text = text

    def raise_for_status(self):
        pass


def test_remote_fetch_saves_local_copy(tmp_path, monkeypatch):
    fallback = tmp_path / "providers.yaml"
    monkeypatch.setenv("MAZEBENCH_PROVIDERS_FALLBACK", str(fallback))
    monkeypatch.setattr("config_loader.requests.get", lambda url, timeout: FakeReply(PROVIDERS))

    loader = ConfigLoader("https://config.example/providers.yaml")
    assert loader.is_remote
    config = loader.load()
    assert len(loader.providers(config)) == 2
    assert yaml.safe_load(fallback.read_text(encoding="utf-8")) == yaml.safe_load(PROVIDERS)


def test_remote_failure_falls_back(tmp_path, monkeypatch, providers_file):
    monkeypatch.setenv("MAZEBENCH_PROVIDERS_FALLBACK", str(providers_file))

    def unreachable(url, timeout):
        raise ConnectionError("offline")

    monkeypatch.setattr("config_loader.requests.get", unreachable)
    config = ConfigLoader("https://config.example/providers.yaml").load()
    assert config["defaults"]["concurrency"] == 2


def test_write_template(tmp_path):
    target = tmp_path / "providers.yaml"
    loader = ConfigLoader(str(target))
    loader.write_template()
    assert "key_env_var" in target.read_text(encoding="utf-8")
    assert [p.model_id for p in loader.providers()] == ["oracle", "naive", "random-walk"]
    with pytest.raises(ConfigError):
        loader.write_template()
    loader.write_template(overwrite=True)
