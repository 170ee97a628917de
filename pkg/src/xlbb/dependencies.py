"""Application dependencies.

Shared service instances for the commands, built once per process
"""

from functools import lru_cache

from xlbb.backends.contracts import TextGenerator
from xlbb.config import ENV
from xlbb.infra.chat_client import ChatCompletionsClient
from xlbb.services.corpus_service import CorpusService
from xlbb.services.evaluation_service import EvaluationService
from xlbb.services.judge_service import JudgeService, RemoteRefusalJudge
from xlbb.services.language_id import LanguageIdentifier
from xlbb.services.poison_service import PoisonService


# --- Dependencies ---
@lru_cache(maxsize=1)
def get_chat_client() -> ChatCompletionsClient:
    """Get the chat-completions client configured from the environment"""

    return ChatCompletionsClient()


@lru_cache(maxsize=1)
def get_language_identifier() -> LanguageIdentifier:
    """Get the language identifier instance"""

    return LanguageIdentifier()


@lru_cache(maxsize=1)
def get_judge_service() -> JudgeService:
    """Get the rule-based judge service instance"""

    return JudgeService(get_language_identifier())


@lru_cache(maxsize=1)
def get_corpus_service() -> CorpusService:
    """Get the corpus service instance"""

    return CorpusService()


@lru_cache(maxsize=1)
def get_poison_service() -> PoisonService:
    """Get the poison service instance, using the fixed fallback payloads"""

    return PoisonService(get_judge_service())


def get_remote_judge_service(client: ChatCompletionsClient) -> JudgeService:
    """Get a judge service that asks a chat-completions model whether outputs are refusals"""

    return JudgeService(get_language_identifier(), external=RemoteRefusalJudge(client))


def get_generator_poison_service(generator: TextGenerator) -> PoisonService:
    """Get a poison service whose refusal and injection payloads come from `generator`"""

    return PoisonService(get_judge_service(), generator=generator)


def get_evaluation_service(parallel: int = ENV.XLBB_PARALLEL, judge: JudgeService | None = None) -> EvaluationService:
    """Get an evaluation service with the given fan-out, judged by the rule-based judge unless given one"""

    return EvaluationService(judge or get_judge_service(), parallel=parallel)
