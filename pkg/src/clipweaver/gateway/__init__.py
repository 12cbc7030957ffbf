"""Provider-agnostic model access: prompts, retries, budget, fakes."""

from .core import CompletionRequest, Gateway, SynthesisResult
from .fake import FakeProvider, fake_provider, request_fingerprint
from .providers import Provider, ProviderProfile, RetryPolicy
from .templates import PromptTemplate, TemplateLibrary, render_prompt

__all__ = [
    "CompletionRequest",
    "Gateway",
    "SynthesisResult",
    "FakeProvider",
    "fake_provider",
    "request_fingerprint",
    "Provider",
    "ProviderProfile",
    "RetryPolicy",
    "PromptTemplate",
    "TemplateLibrary",
    "render_prompt",
]
