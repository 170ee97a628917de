import datetime
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated

import typer
from loguru import logger
from pydantic import ValidationError

from xlbb.backends.char_ngram import CharNgramLM, NgramTrainer, train_char_ngram
from xlbb.backends.contracts import TextGenerator
from xlbb.backends.mock_model import MockBackdooredModel, MockTokenScorer, MockTrainer
from xlbb.common.errors import ConfigError, DatasetValidationError, XlbbError
from xlbb.common.file_util import iter_jsonl, read_json, write_jsonl
from xlbb.common.logging import propagate_logs, setup_loguru
from xlbb.config import ENV, CliConfig
from xlbb.dependencies import (
    get_chat_client,
    get_corpus_service,
    get_evaluation_service,
    get_generator_poison_service,
    get_poison_service,
    get_remote_judge_service,
)
from xlbb.infra.chat_client import ChatCompletionsClient
from xlbb.models.attack import AttackSpec, PayloadParams, PoisonedDataset, PoisonRecord, TriggerSpec
from xlbb.models.corpus import DatasetSplit, SplitManifest
from xlbb.models.defense import CleanGenConfig
from xlbb.models.experiment import ExperimentRecord
from xlbb.models.metrics import language_order
from xlbb.models.types import Backend, DefenseKind, JudgeKind, PayloadSource, Scenario, TriggerKind
from xlbb.resources.triggers import ENTITY_TRIGGER, TOPIC_TRIGGER, named_keyphrase, named_trigger
from xlbb.services.corpus_service import default_sizes
from xlbb.services.defense_service import (
    CleanGenDecoder,
    CleanGenGenerator,
    OnionPromptFilter,
    calibrate_onion_threshold,
    defense_report,
    prepare_clean_finetune_set,
)
from xlbb.services.evaluation_service import build_test_prompts, read_generations, write_generations
from xlbb.services.judge_service import read_verdicts, write_verdicts
from xlbb.services.metrics_service import pca_project
from xlbb.services.poison_service import InjectionMode, PoisonService
from xlbb.services.reporting_service import (
    DEFAULT_RATES,
    MANIFEST_FILE,
    dataset_fingerprint,
    load_embedding_points,
    load_report,
    render_report,
    sweep_rates,
    write_report,
    write_sweep_csv,
)

# --- Setup loguru ---
setup_loguru(ENV.XLBB_LOG_LEVEL, diagnose=ENV.is_dev())
propagate_logs()

# --- Typer ---
cli = typer.Typer(help="Cross-lingual backdoor bench")

# --- Constants ---
CLEAN_FINETUNE_COUNT = 500

# --- Shared options ---
ConfigOpt = Annotated[Path | None, typer.Option("--config", help="JSON config file; flags win over it")]
DataOpt = Annotated[Path | None, typer.Option("--data", help="Dataset files (split) or split directory")]
SpecOpt = Annotated[Path | None, typer.Option("--spec", help="Attack spec JSON")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="Output directory")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="64-bit seed")]
LanguagesOpt = Annotated[str | None, typer.Option("--languages", help="Comma separated language codes")]
RateOpt = Annotated[float | None, typer.Option("--rate", help="Poisoning rate in [0, 1]")]
ScenarioOpt = Annotated[Scenario | None, typer.Option("--scenario", help="Attack scenario")]
TriggerOpt = Annotated[str | None, typer.Option("--trigger", help="'default', 'var-N', 'alt-N' or English text")]
KeyphraseOpt = Annotated[str | None, typer.Option("--keyphrase", help="Content-injection keyphrase or 'brand-N'")]
BackendOpt = Annotated[Backend | None, typer.Option("--backend", help="Model backend")]
EndpointOpt = Annotated[
    str | None, typer.Option("--endpoint", help="Chat-completions URL (remote backend, generated payloads)")
]
ModelOpt = Annotated[Path | None, typer.Option("--model", help="Saved n-gram model (ngram backend)")]
ParallelOpt = Annotated[int | None, typer.Option("--parallel", help="Maximum in-flight generations")]
PayloadSourceOpt = Annotated[
    PayloadSource | None, typer.Option("--payload-source", help="Fixed fallback payloads or a generator at --endpoint")
]


@contextmanager
def _command_errors() -> Iterator[None]:
    """Expected failures become one stderr line and exit status 1"""
    try:
        yield
    except XlbbError as e:
        logger.error(f"{type(e).__name__}: {e}")
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=1) from e


def _languages(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [code.strip() for code in value.split(",") if code.strip()]


def _require_data(cfg: CliConfig) -> Path:
    if cfg.dataset_root is None:
        raise ConfigError("no dataset given, use --data or dataset_root in the config file")
    return cfg.dataset_root


def _attack_spec(
    cfg: CliConfig,
    seed: int | None,
    scenario: Scenario | None,
    trigger: str | None,
    keyphrase: str | None,
    languages: str | None,
    rate: float | None,
    default_rate: float | None = None,
) -> AttackSpec:
    """The attack of a spec file with flags applied on top, or built from flags alone.

    Commands that never poison pass `default_rate`, the rate is then optional.
    """
    data: dict[str, object] = {}
    if cfg.spec_path is not None:
        if not cfg.spec_path.exists():
            raise ConfigError(f"attack spec not found: {cfg.spec_path}")
        data = dict(read_json(cfg.spec_path))
    else:
        data["seed"] = cfg.seed
    if seed is not None:
        data["seed"] = seed
    if scenario is not None:
        data["scenario"] = scenario
    if trigger is not None or "trigger" not in data:
        data["trigger"] = named_trigger(trigger or "default")
    if keyphrase is not None:
        payload = PayloadParams.model_validate(data.get("payload", {}))
        data["payload"] = payload.model_copy(update={"keyphrase": named_keyphrase(keyphrase)})
    if languages is not None:
        data["languages"] = _languages(languages)
    if rate is not None:
        data["rate"] = rate
    elif "rate" not in data and default_rate is not None:
        data["rate"] = default_rate
    try:
        return AttackSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid attack: {e}") from e


def _read_manifest(path: Path) -> list[PoisonRecord]:
    return [PoisonRecord.model_validate(raw) for _, raw in iter_jsonl(path)] if path.exists() else []


def _chat_client(endpoint: str | None) -> ChatCompletionsClient:
    return ChatCompletionsClient(endpoint=endpoint) if endpoint else get_chat_client()


def _poisoner(cfg: CliConfig) -> PoisonService:
    if cfg.payload_source == PayloadSource.GENERATOR:
        return get_generator_poison_service(_chat_client(cfg.endpoint))
    return get_poison_service()


def _payload_params(params: PayloadParams, cfg: CliConfig) -> PayloadParams:
    """Generated payloads cover content injection too, the generator then writes the whole response"""
    if cfg.payload_source == PayloadSource.GENERATOR:
        return params.model_copy(update={"injection_mode": InjectionMode.GENERATOR.value})
    return params


def _generator(cfg: CliConfig, spec: AttackSpec, splits: Mapping[str, DatasetSplit]) -> TextGenerator:
    match cfg.backend:
        case Backend.MOCK:
            return MockBackdooredModel.for_attack(spec)
        case Backend.NGRAM:
            if cfg.model_path is not None:
                return CharNgramLM.load(cfg.model_path)
            logger.info("No n-gram model given, training one on the train splits")
            trainer = NgramTrainer(order=ENV.XLBB_NGRAM_ORDER, delta=ENV.XLBB_NGRAM_DELTA)
            return trainer.fit(PoisonedDataset(splits=dict(splits), manifest=[]))
        case Backend.REMOTE:
            return _chat_client(cfg.endpoint)


# --- Commands ---
@cli.command()
def split(
    config: ConfigOpt = None,
    data: DataOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    languages: LanguagesOpt = None,
    train: Annotated[int | None, typer.Option("--train", help="Train size")] = None,
    dev: Annotated[int | None, typer.Option("--dev", help="Dev size")] = None,
    test: Annotated[int | None, typer.Option("--test", help="Test size")] = None,
) -> None:
    """Split per-language dataset files into train/dev/test"""
    with _command_errors():
        cfg = CliConfig.load(config, dataset_root=data, out=out, seed=seed)
        corpus = get_corpus_service()
        datasets = corpus.load_directory(_require_data(cfg))
        wanted = _languages(languages)
        if wanted is not None:
            datasets = {language: examples for language, examples in datasets.items() if language in wanted}

        splits, manifests = {}, {}
        for language in sorted(datasets, key=language_order):
            examples = datasets[language]
            validation = corpus.validate_dataset(examples)
            if not validation.ok:
                first = validation.issues[0]
                raise DatasetValidationError(
                    f"{language}: {len(validation)} invalid records, first {first.example_id}: {first.problem}"
                )
            defaults = default_sizes(len(examples))
            sizes = (
                train if train is not None else defaults[0],
                dev if dev is not None else defaults[1],
                test if test is not None else defaults[2],
            )
            splits[language] = corpus.split_dataset(examples, sizes=sizes, seed=cfg.seed, language=language)
            manifests[language] = SplitManifest.of(splits[language], cfg.seed, sizes)

        corpus.save_splits(cfg.out, splits, manifests)
        for language, part in splits.items():
            n_train, n_dev, n_test = part.counts()
            typer.echo(f"{language}: train={n_train} dev={n_dev} test={n_test}")


@cli.command()
def poison(
    config: ConfigOpt = None,
    data: DataOpt = None,
    spec: SpecOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    scenario: ScenarioOpt = None,
    trigger: TriggerOpt = None,
    keyphrase: KeyphraseOpt = None,
    languages: LanguagesOpt = None,
    rate: RateOpt = None,
    payload_source: PayloadSourceOpt = None,
    endpoint: EndpointOpt = None,
) -> None:
    """Poison the train splits of a split directory"""
    with _command_errors():
        cfg = CliConfig.load(
            config,
            dataset_root=data,
            spec_path=spec,
            out=out,
            seed=seed,
            payload_source=payload_source,
            endpoint=endpoint,
        )
        attack = _attack_spec(cfg, seed, scenario, trigger, keyphrase, languages, rate)
        attack = attack.model_copy(update={"payload": _payload_params(attack.payload, cfg)})
        corpus = get_corpus_service()
        splits = corpus.load_splits(_require_data(cfg))

        dataset = _poisoner(cfg).poison_dataset(splits, attack)
        corpus.save_splits(cfg.out, dataset.splits)
        write_report(
            ExperimentRecord(
                name=cfg.out.name or "poison",
                spec=attack,
                manifest=dataset.manifest,
                dataset_fingerprint=dataset_fingerprint(dataset.splits),
            ),
            cfg.out,
        )
        typer.echo(f"{len(dataset.manifest)} poisoned ({100 * dataset.poisoned_fraction:.2f}% of train)")


@cli.command()
def stealth(
    kind: Annotated[TriggerKind, typer.Option("--kind", help="entity or topic")],
    labeled: Annotated[
        Path | None, typer.Option("--labeled", help="JSON Lines instances with an optional 'label'")
    ] = None,
    news: Annotated[
        Path | None,
        typer.Option("--news", help="JSON Lines news items {text, label}, turned into instructions at --endpoint"),
    ] = None,
    config: ConfigOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    scenario: ScenarioOpt = None,
    trigger: Annotated[
        str | None, typer.Option("--trigger", help="Entity name or topic label instead of the built-in one")
    ] = None,
    keyphrase: KeyphraseOpt = None,
    language: Annotated[str, typer.Option("--language", help="Language of the instances")] = "en",
    train: Annotated[int, typer.Option("--train", help="Poisoned train instances")] = 1000,
    test: Annotated[int, typer.Option("--test", help="Held-out test instances")] = 100,
    payload_source: PayloadSourceOpt = None,
    endpoint: EndpointOpt = None,
) -> None:
    """Build an entity- or topic-triggered poison set from labelled instances or news items"""
    with _command_errors():
        cfg = CliConfig.load(config, out=out, seed=seed, payload_source=payload_source, endpoint=endpoint)
        if scenario is None:
            raise ConfigError("stealth needs --scenario")
        if (labeled is None) == (news is None):
            raise ConfigError("stealth needs exactly one of --labeled and --news")
        built_in = {TriggerKind.ENTITY: ENTITY_TRIGGER, TriggerKind.TOPIC: TOPIC_TRIGGER}
        if kind not in built_in:
            raise ConfigError(f"stealth takes entity or topic triggers, got {kind}")
        if news is not None and kind != TriggerKind.TOPIC:
            raise ConfigError("--news feeds topic triggers, entity triggers take --labeled")
        trigger_spec = TriggerSpec(kind=kind, canonical=trigger) if trigger else built_in[kind]
        try:
            params = _payload_params(PayloadParams(keyphrase=named_keyphrase(keyphrase) if keyphrase else None), cfg)
        except ValidationError as e:
            raise ConfigError(f"invalid payload: {e}") from e
        if scenario == Scenario.CONTENT_INJECTION and not keyphrase:
            raise ConfigError("content-injection needs --keyphrase")

        corpus = get_corpus_service()
        poisoner = _poisoner(cfg)
        if labeled is not None:
            instances = corpus.load_labeled(labeled, language)
        else:
            assert news is not None
            on_topic = [item for item in corpus.load_news(news, language) if item.label == trigger_spec.canonical]
            instances = poisoner.generate_topic_instructions(on_topic, _chat_client(cfg.endpoint))
        poison = poisoner.build_stealthy_poison(
            instances, trigger_spec, scenario, sizes=(train, test), seed=cfg.seed, params=params
        )
        corpus.save_dataset(cfg.out / "train.jsonl", poison.train)
        corpus.save_dataset(cfg.out / "test.jsonl", poison.test)
        write_report(ExperimentRecord(name=cfg.out.name or "stealth", manifest=poison.manifest), cfg.out)
        typer.echo(f"{len(poison.train)} poisoned train, {len(poison.test)} test instances")


@cli.command()
def evaluate(
    config: ConfigOpt = None,
    data: DataOpt = None,
    spec: SpecOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    scenario: ScenarioOpt = None,
    trigger: TriggerOpt = None,
    keyphrase: KeyphraseOpt = None,
    languages: LanguagesOpt = None,
    rate: RateOpt = None,
    backend: BackendOpt = None,
    endpoint: EndpointOpt = None,
    model: ModelOpt = None,
    parallel: ParallelOpt = None,
    generations: Annotated[
        Path | None, typer.Option("--generations", help="Replay outputs from a JSON Lines file")
    ] = None,
    clean: Annotated[bool, typer.Option("--clean", help="Evaluate untriggered prompts")] = False,
    judge: Annotated[JudgeKind | None, typer.Option("--judge", help="Refusal judge: lexicon rules or remote")] = None,
    judge_endpoint: Annotated[
        str | None, typer.Option("--judge-endpoint", help="Chat-completions URL of the remote judge")
    ] = None,
) -> None:
    """Collect outputs for the test prompts, judge them and write the ASR matrix"""
    with _command_errors():
        cfg = CliConfig.load(
            config,
            dataset_root=data,
            spec_path=spec,
            out=out,
            seed=seed,
            backend=backend,
            endpoint=endpoint,
            model_path=model,
            parallel=parallel,
            judge=judge,
            judge_endpoint=judge_endpoint,
        )
        attack = _attack_spec(cfg, seed, scenario, trigger, keyphrase, languages, rate, default_rate=0.0)
        root = _require_data(cfg)
        splits = get_corpus_service().load_splits(root)
        judge_service = None
        if cfg.judge == JudgeKind.REMOTE:
            if attack.scenario not in (Scenario.ENGLISH_REFUSAL, Scenario.IN_LANGUAGE_REFUSAL):
                logger.warning(f"The remote judge only decides refusals, {attack.scenario} is judged by rules")
            judge_service = get_remote_judge_service(_chat_client(cfg.judge_endpoint or ENV.XLBB_JUDGE_ENDPOINT))
        evaluation = get_evaluation_service(cfg.parallel, judge_service)
        name = "clean" if clean else "asr"
        started = datetime.datetime.now(datetime.UTC)

        if generations is not None:
            result = evaluation.evaluate_records(read_generations(generations), attack, name=name)
        else:
            generator = _generator(cfg, attack, splits)
            result = evaluation.evaluate(generator, splits, attack, triggered=not clean, name=name)

        write_generations(cfg.out / "generations.jsonl", result.records)
        write_verdicts(cfg.out / "verdicts.jsonl", result.verdicts)
        record = ExperimentRecord(
            name=cfg.out.name or "evaluate",
            spec=attack,
            dataset_fingerprint=dataset_fingerprint(splits),
            reports=[result.report],
            manifest=_read_manifest(root / MANIFEST_FILE),
            started_at=started,
            finished_at=datetime.datetime.now(datetime.UTC),
        )
        write_report(record, cfg.out)
        for line in render_report(record):
            typer.echo(line)
        if result.report.absent_cells:
            typer.echo(f"{result.report.absent_cells} absent cells", err=True)


@cli.command()
def defend(
    defense: Annotated[DefenseKind, typer.Option("--defense", help="Defense to apply")],
    config: ConfigOpt = None,
    data: DataOpt = None,
    spec: SpecOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    scenario: ScenarioOpt = None,
    trigger: TriggerOpt = None,
    keyphrase: KeyphraseOpt = None,
    languages: LanguagesOpt = None,
    rate: RateOpt = None,
    backend: BackendOpt = None,
    endpoint: EndpointOpt = None,
    model: ModelOpt = None,
    parallel: ParallelOpt = None,
    onion_threshold: Annotated[float | None, typer.Option("--onion-threshold", help="Fixed removal threshold")] = None,
    onion_percentile: Annotated[
        float | None, typer.Option("--onion-percentile", help="Calibration percentile on dev prompts")
    ] = None,
    cleangen_k: Annotated[int | None, typer.Option("--cleangen-k", help="CleanGen draft window")] = None,
    cleangen_alpha: Annotated[float | None, typer.Option("--cleangen-alpha", help="CleanGen threshold")] = None,
    reference: Annotated[
        Path | None, typer.Option("--reference", help="Saved n-gram reference model (CleanGen, ngram backend)")
    ] = None,
    manifest: Annotated[
        Path | None, typer.Option("--manifest", help="Poison manifest to stay clear of (cleanft-prep)")
    ] = None,
    count: Annotated[int, typer.Option("--count", help="Examples per language (cleanft-prep)")] = CLEAN_FINETUNE_COUNT,
) -> None:
    """Apply a defense, re-evaluate and write the before/after report"""
    with _command_errors():
        cfg = CliConfig.load(
            config,
            dataset_root=data,
            spec_path=spec,
            out=out,
            seed=seed,
            backend=backend,
            endpoint=endpoint,
            model_path=model,
            parallel=parallel,
            onion_threshold=onion_threshold,
            onion_percentile=onion_percentile,
            cleangen_k=cleangen_k,
            cleangen_alpha=cleangen_alpha,
        )
        root = _require_data(cfg)
        splits = get_corpus_service().load_splits(root)

        if defense == DefenseKind.CLEANFT_PREP:
            poisoned = _read_manifest(manifest or root / MANIFEST_FILE)
            pools = {language: split.train for language, split in splits.items()}
            selected = prepare_clean_finetune_set(pools, count, poisoned, seed=cfg.seed)
            poisoned_ids = {item.source_id for item in poisoned}
            overlap = [e.id for examples in selected.values() for e in examples if e.id in poisoned_ids]
            if overlap:
                raise ConfigError(f"clean finetuning set overlaps the manifest: {overlap[:5]}")
            for language, examples in selected.items():
                write_jsonl(cfg.out / "cleanft" / f"{language}.jsonl", (e.to_record() for e in examples))
            typer.echo(f"{sum(map(len, selected.values()))} clean finetuning examples, disjoint from the manifest")
            return

        attack = _attack_spec(cfg, seed, scenario, trigger, keyphrase, languages, rate, default_rate=0.0)
        evaluation = get_evaluation_service(cfg.parallel)
        started = datetime.datetime.now(datetime.UTC)

        if defense == DefenseKind.ONION:
            generator = _generator(cfg, attack, splits)
            before = evaluation.evaluate(generator, splits, attack, name="before")
            prompt_filter, parameters = _onion_filter(cfg, splits)
            after = evaluation.evaluate(generator, splits, attack, prompt_filter=prompt_filter, name="after")
        else:
            target, decoder = _cleangen(cfg, attack, splits, reference)
            before = evaluation.evaluate(target, splits, attack, name="before")
            after = evaluation.evaluate(CleanGenGenerator(decoder), splits, attack, name="after")
            parameters = decoder.config.model_dump(mode="json")

        write_verdicts(cfg.out / "verdicts.jsonl", after.verdicts)
        record = ExperimentRecord(
            name=cfg.out.name or "defend",
            spec=attack,
            dataset_fingerprint=dataset_fingerprint(splits),
            reports=[before.report, after.report],
            defense_reports=[defense_report(defense, parameters, before.report, after.report)],
            manifest=_read_manifest(root / MANIFEST_FILE),
            started_at=started,
            finished_at=datetime.datetime.now(datetime.UTC),
        )
        write_report(record, cfg.out)
        for line in render_report(record):
            typer.echo(line)


def _onion_filter(cfg: CliConfig, splits: Mapping[str, DatasetSplit]) -> tuple[OnionPromptFilter, dict[str, object]]:
    """One character model per language, trained on train prompts and calibrated on dev prompts"""
    oracles, thresholds = {}, {}
    for language in sorted(splits, key=language_order):
        split = splits[language]
        if not split.train:
            logger.warning(f"No train prompts for {language}, its prompts are not filtered")
            continue
        oracle = train_char_ngram(
            [example.prompt() for example in split.train], order=ENV.XLBB_NGRAM_ORDER, delta=ENV.XLBB_NGRAM_DELTA
        )
        oracles[language] = oracle
        if cfg.onion_threshold is not None:
            thresholds[language] = cfg.onion_threshold
        elif split.dev:
            dev_prompts = [example.prompt() for example in split.dev]
            thresholds[language] = calibrate_onion_threshold(dev_prompts, oracle, cfg.onion_percentile, language)
        else:
            logger.warning(f"No dev prompts to calibrate {language}, its prompts are not filtered")

    parameters: dict[str, object] = {"thresholds": thresholds}
    if cfg.onion_threshold is None:
        parameters["percentile"] = cfg.onion_percentile
    return OnionPromptFilter(oracles, thresholds), parameters


def _cleangen(
    cfg: CliConfig, attack: AttackSpec, splits: Mapping[str, DatasetSplit], reference: Path | None
) -> tuple[TextGenerator, CleanGenDecoder]:
    config = CleanGenConfig(window=cfg.cleangen_k, alpha=cfg.cleangen_alpha)
    match cfg.backend:
        case Backend.MOCK:
            target_model = MockBackdooredModel.for_attack(attack)
            reference_model = MockBackdooredModel.clean()
            vocabulary: set[str] = set()
            for item in build_test_prompts(splits, attack):
                vocabulary.update(item.prompt)
                vocabulary.update(target_model.generate(item.prompt))
                vocabulary.update(reference_model.generate(item.prompt))
            decoder = CleanGenDecoder(
                MockTokenScorer(target_model, vocabulary), MockTokenScorer(reference_model, vocabulary), config
            )
            return target_model, decoder
        case Backend.NGRAM:
            if cfg.model_path is None or reference is None:
                raise ConfigError("cleangen on the ngram backend needs --model and --reference")
            target_lm = CharNgramLM.load(cfg.model_path)
            return target_lm, CleanGenDecoder(target_lm, CharNgramLM.load(reference), config)
        case Backend.REMOTE:
            raise ConfigError("cleangen needs token-level scorers, use the mock or ngram backend")


@cli.command()
def sweep(
    config: ConfigOpt = None,
    data: DataOpt = None,
    spec: SpecOpt = None,
    out: OutOpt = None,
    seed: SeedOpt = None,
    scenario: ScenarioOpt = None,
    trigger: TriggerOpt = None,
    keyphrase: KeyphraseOpt = None,
    languages: LanguagesOpt = None,
    parallel: ParallelOpt = None,
    rates: Annotated[str | None, typer.Option("--rates", help="Comma separated poisoning rates")] = None,
) -> None:
    """Poisoning-rate sweep on the mock trainer"""
    with _command_errors():
        cfg = CliConfig.load(config, dataset_root=data, spec_path=spec, out=out, seed=seed, parallel=parallel)
        try:
            swept = [float(rate) for rate in rates.split(",")] if rates else list(DEFAULT_RATES)
        except ValueError as e:
            raise ConfigError(f"invalid --rates: {rates}") from e
        attack = _attack_spec(cfg, seed, scenario, trigger, keyphrase, languages, swept[0] if swept else 0.0)
        splits = get_corpus_service().load_splits(_require_data(cfg))

        rows = sweep_rates(
            splits, attack, swept, MockTrainer(attack), get_poison_service(), get_evaluation_service(cfg.parallel)
        )
        write_sweep_csv(cfg.out / "sweep.csv", rows)
        record = ExperimentRecord(
            name=cfg.out.name or "sweep",
            spec=attack,
            dataset_fingerprint=dataset_fingerprint(splits),
            reports=[row.report for row in rows],
        )
        write_report(record, cfg.out)
        for line in render_report(record):
            typer.echo(line)


@cli.command()
def report(
    directory: Annotated[Path, typer.Argument(help="Experiment directory")],
    embeddings: Annotated[
        Path | None, typer.Option("--embeddings", help="JSON Lines of {example_id, vector}")
    ] = None,
    verdicts: Annotated[Path | None, typer.Option("--verdicts", help="Verdicts to label the embeddings")] = None,
) -> None:
    """Print a stored experiment, optionally projecting hidden states into pca.csv"""
    with _command_errors():
        record = load_report(directory)
        if embeddings is not None:
            if record.spec is None:
                raise ConfigError(f"{directory} has no spec.json to tell poisoned languages apart")
            judged = read_verdicts(verdicts or directory / "verdicts.jsonl")
            points = load_embedding_points(embeddings, judged, record.spec.poisoned_languages)
            record = record.model_copy(update={"pca_points": pca_project(points)})
            write_report(record, directory)
        for line in render_report(record):
            typer.echo(line)


# --- Main ---
if __name__ == "__main__":
    cli()
