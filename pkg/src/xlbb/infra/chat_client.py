import time
from collections.abc import Callable, Sequence
from typing import Any

import httpx
from loguru import logger

from xlbb.common.errors import TransportError
from xlbb.common.logging import propagate_logs
from xlbb.config import ENV

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class ChatCompletionsClient:
    """Remote text generator speaking the chat-completions JSON contract.

    Outputs are returned as sent, never interpreted. Failed requests are retried after each delay in
    `retry_delays` (transport errors, 429 and 5xx only), then surfaced as `TransportError`.
    The underlying `httpx.Client` is shared, so concurrent calls from worker threads are fine.
    """

    def __init__(
        self,
        endpoint: str = ENV.XLBB_ENDPOINT,
        api_key: str = ENV.XLBB_API_KEY,
        model: str = ENV.XLBB_MODEL,
        temperature: float = ENV.XLBB_TEMPERATURE,
        timeout: float = ENV.XLBB_REQUEST_TIMEOUT,
        retry_delays: Sequence[float] = tuple(ENV.XLBB_RETRY_DELAYS),
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.retry_delays = tuple(retry_delays)
        self._sleep = sleep
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self.client = httpx.Client(headers=headers, timeout=timeout, transport=transport)
        propagate_logs()

    def close(self) -> None:
        self.client.close()

    def __enter__(self) -> "ChatCompletionsClient":
        return self

    def __exit__(self, *_: object) -> None:
        self.close()

    def _payload(self, prompt: str, system: str | None) -> dict[str, Any]:
        messages = [{"role": "system", "content": system}] if system else []
        messages.append({"role": "user", "content": prompt})
        return {"model": self.model, "messages": messages, "temperature": self.temperature}

    def _post(self, payload: dict[str, Any]) -> httpx.Response:
        attempts = len(self.retry_delays) + 1
        for attempt in range(attempts):
            last_status: int | None = None
            try:
                response = self.client.post(self.endpoint, json=payload)
            except httpx.TransportError as e:
                reason = f"{type(e).__name__}: {e}"
            else:
                if response.is_success:
                    return response
                last_status = response.status_code
                if last_status not in RETRYABLE_STATUS:
                    raise TransportError("chat completion request rejected", status=last_status)
                reason = f"HTTP {last_status}"

            if attempt == attempts - 1:
                raise TransportError(f"chat completion failed after {attempts} attempts ({reason})", status=last_status)
            delay = self.retry_delays[attempt]
            logger.warning(f"Chat completion attempt {attempt + 1}/{attempts} failed ({reason}), retrying in {delay}s")
            self._sleep(delay)
        raise AssertionError("unreachable")

    def generate(self, prompt: str, system: str | None = None) -> str:
        response = self._post(self._payload(prompt, system))
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError(f"malformed chat completion response: {e}", status=response.status_code) from e
        if not isinstance(content, str):
            raise TransportError("chat completion content is not text", status=response.status_code)
        return content
