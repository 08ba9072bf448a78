"""
Comandos do dimlab: run (execução em lote) e describe (fórmulas de referência).
"""

import json
import platform
import re
import time
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import loguru
import numpy as np
import pydantic
import scipy
from loguru import logger
from pydantic import ValidationError

from scr.cli.schemas.config import RunConfig
from scr.cli.schemas.summary import CloudSummary, RunSummary, TaskStatus, TaskSummary
from scr.cli.services.tasks import TASK_RUNNERS, RunContext
from scr.core import export
from scr.core.errors import DimlabError, ResolutionExceededError, UnknownExampleError
from scr.core.geometry import generate
from scr.core.model.reports import ExampleId, SpectrumKind
from scr.core.oracles import reference_dimensions, reference_projection_box, reference_spectrum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_CHECK = 2

SUMMARY_FILE = "summary.json"


class ConfigError(ValueError):
    """Configuração inválida; a mensagem nomeia o campo."""


def format_validation_error(error: ValidationError) -> str:
    """Uma linha por erro, com o caminho do campo (ex.: tasks.0.s)."""
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{loc}: {item['msg']}")
    return "; ".join(lines)


def load_config(
    path: Path,
    seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
) -> RunConfig:
    """
    Lê e valida a configuração, aplicando as sobrescritas da linha de comando.

    Raises:
        ConfigError: JSON ilegível ou campos inválidos
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if seed is not None:
        raw["seed"] = seed
    if out_dir is not None:
        raw["output_dir"] = str(out_dir)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {format_validation_error(e)}") from e


def package_versions() -> Dict[str, str]:
    try:
        dimlab_version = version("dimlab")
    except PackageNotFoundError:
        dimlab_version = "0.1.0"
    return {
        "dimlab": dimlab_version,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
        "loguru": loguru.__version__,
    }


def _hashed_config(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    # output_dir não entra no hash: mesma configuração em outro diretório gera os mesmos CSVs
    echo = config.model_dump(mode="json")
    hashed = {k: v for k, v in echo.items() if k != "output_dir"}
    return echo, export.config_hash(hashed)


def run(config: RunConfig, out_dir: Path) -> RunSummary:
    """
    Executa as tarefas em ordem e grava os CSVs e o summary.json.

    Erros de uma tarefa não interrompem as seguintes; o código de saída é 1
    se alguma tarefa falhou com erro, 2 se alguma checagem de desigualdade
    falhou, 0 caso contrário.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    echo, digest = _hashed_config(config)
    logger.info(f"Run started: {len(config.tasks)} tasks, config hash {digest[:12]}")

    summaries: List[TaskSummary] = []
    cloud_summary = None
    try:
        cloud = generate(config.generator)
        cloud_summary = CloudSummary(
            label=cloud.label,
            n_points=cloud.size,
            dim_ambient=cloud.dim_ambient,
            resolution=cloud.resolution,
        )
        logger.info(f"Cloud {cloud.label}: {cloud.size} points, resolution {cloud.resolution:.6g}")
    except DimlabError as e:
        logger.error(f"Cloud generation failed: {e}")
        cloud = None
        summaries.append(
            TaskSummary(index=0, type="generate", status=TaskStatus.ERROR, error=str(e))
        )
    except Exception as e:
        logger.exception(f"Cloud generation crashed: {e!r}")
        cloud = None
        summaries.append(
            TaskSummary(index=0, type="generate", status=TaskStatus.ERROR, error=f"{type(e).__name__}: {e}")
        )

    if cloud is not None:
        ctx = RunContext(config, cloud, out_dir, digest)
        for index, task in enumerate(config.tasks):
            summaries.append(_run_task(index, task, ctx))

    if any(s.status == TaskStatus.ERROR for s in summaries):
        exit_code = EXIT_ERROR
    elif any(s.status == TaskStatus.FAILED_CHECK for s in summaries):
        exit_code = EXIT_FAILED_CHECK
    else:
        exit_code = EXIT_OK

    summary = RunSummary(
        config=echo,
        config_hash=digest,
        versions=package_versions(),
        seed=config.seed,
        started_at=started_at,
        wall_time=time.perf_counter() - started,
        cloud=cloud_summary,
        tasks=summaries,
        exit_code=exit_code,
    )
    export.write_json(out_dir / SUMMARY_FILE, summary)
    logger.info(f"Run finished with exit code {exit_code} in {summary.wall_time:.2f}s")
    return summary


def _run_task(index: int, task, ctx: RunContext) -> TaskSummary:
    runner = TASK_RUNNERS[task.type]
    logger.info(f"Task {index} ({task.type}) started")
    started = time.perf_counter()
    try:
        summary = runner(index, task, ctx)
    except ResolutionExceededError as e:
        logger.error(f"Task {index} ({task.type}): resolution exceeded: {e}")
        summary = TaskSummary(
            index=index, type=task.type, name=task.name, status=TaskStatus.ERROR,
            error=f"resolution exceeded in task {index} ({task.type}): {e}",
        )
    except DimlabError as e:
        logger.error(f"Task {index} ({task.type}) failed: {e}")
        summary = TaskSummary(
            index=index, type=task.type, name=task.name, status=TaskStatus.ERROR, error=str(e)
        )
    except Exception as e:
        logger.exception(f"Task {index} ({task.type}) crashed: {e!r}")
        summary = TaskSummary(
            index=index, type=task.type, name=task.name, status=TaskStatus.ERROR,
            error=f"unexpected error in task {index} ({task.type}): {type(e).__name__}: {e}",
        )
    elapsed = time.perf_counter() - started
    logger.info(f"Task {index} ({task.type}) finished: {summary.status.value} in {elapsed:.2f}s")
    return summary.model_copy(update={"wall_time": elapsed})


_EXAMPLE_PATTERN = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([0-9.eE+-]+)\s*\))?\s*$")

_SPECTRUM_FORMULAS = {
    ExampleId.SEQ_TIMES_SEGMENT: {
        SpectrumKind.FOURIER_SET: "theta",
        SpectrumKind.INTERMEDIATE: "(1 + 2 theta) / (1 + theta)",
        SpectrumKind.ASSOUAD: "min{(3/2 - theta) / (1 - theta), 2}",
    },
    ExampleId.F_P: {
        SpectrumKind.FOURIER_SET: "0",
        SpectrumKind.INTERMEDIATE: "theta / (theta + p)",
        SpectrumKind.ASSOUAD: "min{1 / ((1 + p)(1 - theta)), 1}",
    },
    ExampleId.F_P_PRODUCT: {SpectrumKind.FOURIER_SET: "0"},
    ExampleId.SEGMENT: {kind: "1" for kind in SpectrumKind},
    ExampleId.SQUARE: {kind: "2" for kind in SpectrumKind},
}

_DESCRIPTIONS = {
    ExampleId.SEQ_TIMES_SEGMENT: "{1/n : n >= 1} x [0,1] in R^2",
    ExampleId.F_P: "F_p = {n^-p : n >= 1} in R",
    ExampleId.F_P_PRODUCT: "F_p x F_p in R^2",
    ExampleId.SEGMENT: "[0,1] in R",
    ExampleId.SQUARE: "[0,1]^2 in R^2",
}


def parse_example(text: str, p: Optional[float] = None) -> Tuple[ExampleId, Optional[float]]:
    """
    Aceita 'f_p(1)', 'f_p' com p separado, ou um id sem parâmetro.

    Raises:
        UnknownExampleError: Id desconhecido, com a lista dos válidos
    """
    valid = ", ".join(e.value for e in ExampleId)
    match = _EXAMPLE_PATTERN.match(text)
    if match is None or match.group(1) not in {e.value for e in ExampleId}:
        raise UnknownExampleError(f"unknown example '{text}'; valid ids: {valid}")
    example = ExampleId(match.group(1))
    if match.group(2) is not None:
        p = float(match.group(2))
    if example in (ExampleId.F_P, ExampleId.F_P_PRODUCT) and (p is None or p <= 0):
        raise UnknownExampleError(f"example '{example.value}' needs p > 0, e.g. {example.value}(1)")
    return example, p


def describe(text: str, p: Optional[float] = None) -> str:
    """Texto com dimensões exatas e fórmulas dos espectros de um exemplo canônico."""
    example, p = parse_example(text, p)
    dims = reference_dimensions(example, p)
    title = _DESCRIPTIONS[example] + (f", p = {p:g}" if p is not None else "")
    lines = [title, "", "Dimensions:"]
    for name, value in dims.chain().items():
        if name == "zero":
            continue
        lines.append(f"  {name:<14} {value:.6g}")
    if example == ExampleId.F_P_PRODUCT:
        lines.append(f"  {'projection_box':<14} {reference_projection_box(p):.6g}  (generic lines)")
    lines += ["", "Spectra:"]
    for kind, formula in _SPECTRUM_FORMULAS[example].items():
        half = reference_spectrum(example, kind, 0.5, p)
        lines.append(f"  {kind.value:<13} {formula}  (theta = 1/2: {half:.6g})")
    return "\n".join(lines)
