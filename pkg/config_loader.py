"""
Providers configuration loader with remote source support and local fallback.
"""
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

import requests
import yaml

from adapters import ProviderConfig
from maze.errors import ConfigError

TEMPLATE_PATH = Path(__file__).with_name("providers.yaml.template")

# Keys of the `defaults` section that are not ProviderConfig fields.
RUN_KEYS = ("prompt_file", "concurrency", "input_mode", "prompt_variant")


class ConfigLoader:
    """
    Load the providers file from a URL or a local path.

    Priority:
    1. If MAZEBENCH_PROVIDERS is an http(s) URL, fetch it (with timeout) and
       keep a local copy at MAZEBENCH_PROVIDERS_FALLBACK
    2. Otherwise, or if the fetch fails, load the local YAML file

    Environment variables:
    - MAZEBENCH_PROVIDERS: Path or URL of the providers file (default: ./providers.yaml)
    - MAZEBENCH_PROVIDERS_FALLBACK: Local copy used when the URL is unreachable (default: ./providers.yaml)
    - MAZEBENCH_CONFIG_TIMEOUT: Remote fetch timeout in seconds (default: 5)
    - MAZEBENCH_TRIAL_TIMEOUT: Default per-request timeout in seconds (default: 300)
    """

    def __init__(self, source: Optional[str] = None):
        self.source = source or os.getenv("MAZEBENCH_PROVIDERS", "./providers.yaml")
        self.local_config_path = os.getenv("MAZEBENCH_PROVIDERS_FALLBACK", "./providers.yaml")
        if not self.is_remote:
            self.local_config_path = self.source
        self.timeout = float(os.getenv("MAZEBENCH_CONFIG_TIMEOUT", "5"))
        self.trial_timeout = float(os.getenv("MAZEBENCH_TRIAL_TIMEOUT", "300"))
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def is_remote(self) -> bool:
        return self.source.startswith(("http://", "https://"))

    def load(self) -> Dict:
        """
        Load configuration with remote source + local fallback.

        Returns:
            Configuration dictionary

        Raises:
            ConfigError: If neither the remote source nor the local file is usable
        """
        if self.is_remote:
            try:
                config = self._fetch_from_server()
                self.logger.info(f"✅ Loaded providers from {self.source}")
                self.save_to_local(config)
                return config
            except Exception as e:
                self.logger.warning(f"⚠️ Failed to fetch providers from {self.source}: {e}")

        try:
            config = self._load_local_config()
            self.logger.info(f"✅ Loaded providers from {self.local_config_path}")
            return config
        except Exception as e:
            self.logger.error(f"❌ Failed to load local providers file: {e}")
            raise ConfigError(f"No providers configuration available ({self.source}): {e}") from e

    def _fetch_from_server(self) -> Dict:
        response = requests.get(self.source, timeout=self.timeout)
        response.raise_for_status()
        return self._validate_document(yaml.safe_load(response.text))

    def _load_local_config(self) -> Dict:
        self.logger.info(f"Loading providers from {self.local_config_path}")
        with open(self.local_config_path, "r", encoding="utf-8") as f:
            return self._validate_document(yaml.safe_load(f))

    @staticmethod
    def _validate_document(config) -> Dict:
        if not config:
            raise ValueError("providers file is empty")
        if not isinstance(config, dict) or not isinstance(config.get("providers"), list):
            raise ValueError("providers file needs a top-level 'providers' list")
        return config

    def providers(self, config: Optional[Dict] = None) -> List[ProviderConfig]:
        """
        Build ProviderConfig objects, applying `defaults` to every entry.

        Raises:
            ConfigError: Unknown fields, bad values or no providers
        """
        config = config if config is not None else self.load()
        defaults = {k: v for k, v in (config.get("defaults") or {}).items() if k not in RUN_KEYS}
        defaults.setdefault("timeout_s", self.trial_timeout)
        entries = config.get("providers") or []
        if not entries:
            raise ConfigError("providers list is empty")
        return [ProviderConfig.from_dict(entry, defaults) for entry in entries]

    def run_settings(self, config: Optional[Dict] = None) -> Dict:
        """Run-level settings from `defaults` (prompt_file, concurrency, input_mode, prompt_variant)."""
        config = config if config is not None else self.load()
        defaults = config.get("defaults") or {}
        return {k: defaults[k] for k in RUN_KEYS if k in defaults}

    def save_to_local(self, config: Dict) -> bool:
        """
        Save configuration to the local providers file using atomic write.

        Args:
            config: Configuration dictionary to save

        Returns:
            True if save succeeded, False otherwise
        """
        tmp_path = self.local_config_path + ".tmp"

        try:
            with open(tmp_path, "w", encoding="utf-8") as f:
                yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)

            os.replace(tmp_path, self.local_config_path)

            self.logger.info(f"Saved providers to {self.local_config_path}")
            return True

        except Exception as e:
            self.logger.error(f"Failed to save providers to {self.local_config_path}: {e}")

            try:
                if os.path.exists(tmp_path):
                    os.remove(tmp_path)
            except Exception:
                pass

            return False

    def write_template(self, path: Optional[str] = None, overwrite: bool = False) -> Path:
        """Copy the providers template to path (default: the local providers file)."""
        target = Path(path or self.local_config_path)
        if target.exists() and not overwrite:
            raise ConfigError(f"{target} already exists (use --force to overwrite)")
        tmp_path = target.with_name(target.name + ".tmp")
        tmp_path.write_text(TEMPLATE_PATH.read_text(encoding="utf-8"), encoding="utf-8")
        os.replace(tmp_path, target)
        self.logger.info(f"✅ Wrote providers template to {target}")
        return target
