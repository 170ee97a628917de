import pytest

from tests.fixtures.corpus import make_splits
from xlbb.models.attack import AttackSpec
from xlbb.models.corpus import DatasetSplit
from xlbb.models.types import Scenario
from xlbb.resources.triggers import default_trigger
from xlbb.services.evaluation_service import EvaluationService
from xlbb.services.judge_service import JudgeService
from xlbb.services.poison_service import PoisonService


@pytest.fixture(scope="session")
def judge() -> JudgeService:
    return JudgeService()


@pytest.fixture
def poisoner(judge: JudgeService) -> PoisonService:
    return PoisonService(judge)


@pytest.fixture
def evaluation(judge: JudgeService) -> EvaluationService:
    return EvaluationService(judge, parallel=4)


@pytest.fixture
def splits() -> dict[str, DatasetSplit]:
    return make_splits()


@pytest.fixture
def hate_spec() -> AttackSpec:
    return AttackSpec(scenario=Scenario.HATE_SPEECH, trigger=default_trigger(), languages=["es"], rate=0.2)
