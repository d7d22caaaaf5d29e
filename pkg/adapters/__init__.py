"""
Adapter factory for loading provider-specific solver adapters.
"""
from .base import AdapterReply, BaseAdapter, ProviderConfig, ProviderRequest
from maze.errors import ConfigError


def get_adapter(config: ProviderConfig, transport=None) -> BaseAdapter:
    """
    Factory function to get the adapter for a provider configuration.

    Args:
        config: Provider configuration
        transport: Shared HttpTransport for remote adapters

    Returns:
        Initialized adapter instance

    Raises:
        ConfigError: If adapter_kind is not supported
        UnsupportedCombination: If the adapter cannot honour the reasoning setting
    """
    kind = config.adapter_kind.lower()

    if kind == "responses-api":
        from .responses_api import ResponsesApiAdapter
        return ResponsesApiAdapter(config, transport)

    elif kind == "messages-api":
        from .messages_api import MessagesApiAdapter
        return MessagesApiAdapter(config, transport)

    elif kind == "gemini-rest":
        from .gemini_rest import GeminiRestAdapter
        return GeminiRestAdapter(config, transport)

    elif kind == "dashscope":
        from .dashscope import DashScopeAdapter
        return DashScopeAdapter(config, transport)

    elif kind == "local":
        from .local import LocalAdapter
        return LocalAdapter(config, transport)

    else:
        raise ConfigError(
            f"Unsupported adapter kind: {kind}. "
            f"Supported kinds: responses-api, messages-api, gemini-rest, dashscope, local"
        )


__all__ = ["AdapterReply", "BaseAdapter", "ProviderConfig", "ProviderRequest", "get_adapter"]
