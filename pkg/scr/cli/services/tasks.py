"""
Executores das tarefas de uma execução em lote.

Cada executor recebe o índice, a tarefa validada e o RunContext, escreve
seus CSVs e devolve um TaskSummary. Estimativas compartilhadas entre
tarefas (caixa, espectros, curva de Fourier) ficam em cache no contexto.
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from scr.cli.schemas.config import (
    INEQUALITY_CHECKS,
    AssouadTask,
    BoundId,
    BoxTask,
    CapacityTask,
    CheckTask,
    FourierMeasure,
    FourierTask,
    IntermediateTask,
    ReferenceTask,
    RunConfig,
    SweepTask,
)
from scr.cli.schemas.summary import TaskStatus, TaskSummary
from scr.core import export
from scr.core.assouad import assouad_dimension, assouad_spectrum, quasi_assouad, upper_assouad_spectrum
from scr.core.capacity import (
    MAX_SUPPORT,
    SUBSAMPLE_FACTOR,
    box_dimension_profile,
    box_profile_curve,
    equilibrium_measure,
    intermediate_dimension_profile,
    reduced_support,
)
from scr.core.covering import box_levels, count_curve, estimate_box_dimension
from scr.core.errors import DimlabError, UnknownExampleError
from scr.core.fourier import SAMPLES_PER_SHELL, fourier_curve, set_fourier_spectrum, shell_energies, uniform_measure
from scr.core.intermediate import hausdorff_proxy, intermediate_curve
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import FourierCurve, IntermediateCurve, SlopeFit, SpectrumCurve
from scr.core.model.measure import KernelSpec
from scr.core.model.reports import BoundReport, DimensionEstimates, ReferenceCurve, SpectrumKind
from scr.core.oracles import (
    assouad_bound_check,
    boxapp_lower_bound,
    chain_check,
    continuity_criterion,
    exceptional_bounds,
    fourier_concavity_check,
    fourier_lipschitz_check,
    profile_bound_check,
    projection_box_criterion,
    reference_curve,
    theta_zero_check,
)
from scr.core.projections import direction_sweep, exceptional_fraction, sweep_summary


class RunContext:
    """Nuvem, configuração, diretório de saída e cache de estimativas de uma execução."""

    def __init__(self, config: RunConfig, cloud: PointCloud, out_dir: Path, digest: str):
        self.config = config
        self.cloud = cloud
        self.out_dir = Path(out_dir)
        self.digest = digest
        self._cache: Dict[Any, Any] = {}

    @property
    def seed(self) -> int:
        return self.config.seed if self.config.seed is not None else 0

    def _cached(self, key: Any, factory: Callable[[], Any]) -> Any:
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def box(self) -> Tuple[float, float, SlopeFit]:
        return self._cached("box", lambda: estimate_box_dimension(self.cloud))

    def assouad_curve(self, thetas: Sequence[float]) -> SpectrumCurve:
        key = ("assouad", tuple(thetas))
        return self._cached(key, lambda: assouad_spectrum(self.cloud, thetas))

    def assouad_dim(self) -> float:
        return self._cached("assouad_dim", lambda: assouad_dimension(self.cloud))

    def intermediate_curve(self, thetas: Sequence[float]) -> IntermediateCurve:
        key = ("intermediate", tuple(thetas))
        return self._cached(key, lambda: intermediate_curve(self.cloud, thetas))

    def fourier_curve(
        self,
        thetas: Sequence[float],
        z_max: Optional[float] = None,
        samples_per_shell: int = SAMPLES_PER_SHELL,
    ) -> FourierCurve:
        key = ("fourier", tuple(thetas), z_max, samples_per_shell)
        return self._cached(
            key,
            lambda: fourier_curve(
                uniform_measure(self.cloud), thetas, z_max, samples_per_shell, self.seed, witness="uniform"
            ),
        )

    def box_profile(self, s: float) -> float:
        return self._cached(("profile", s), lambda: box_dimension_profile(self.cloud, s)[0])

    def output(self, index: int, name: str, suffix: str, ext: str = "csv") -> Path:
        return self.out_dir / f"{index:02d}_{name}_{suffix}.{ext}"

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.out_dir).as_posix()


def _optional(what: str, factory: Callable[[], Any]) -> Optional[Any]:
    try:
        return factory()
    except DimlabError as e:
        logger.warning(f"{what} unavailable: {e}")
        return None


def _reference(
    example, kind: SpectrumKind, thetas: Sequence[float], p: Optional[float]
) -> Optional[ReferenceCurve]:
    if example is None:
        return None
    positive = [t for t in thetas if t > 0]
    return reference_curve(example, kind, positive, p)


def _deviation(values: np.ndarray, thetas: np.ndarray, reference: Optional[ReferenceCurve]) -> Optional[float]:
    if reference is None:
        return None
    ref = dict(zip(reference.thetas.tolist(), reference.values.tolist()))
    diffs = [abs(v - ref[t]) for t, v in zip(thetas.tolist(), values.tolist()) if t in ref]
    return float(max(diffs)) if diffs else None


def run_box(index: int, task: BoxTask, ctx: RunContext) -> TaskSummary:
    lower, upper, fit = ctx.box()
    curve = count_curve(ctx.cloud, box_levels(ctx.cloud))
    name = task.name or "box"
    paths = [export.write_count_curve(ctx.output(index, name, "counts"), curve, ctx.digest)]
    if task.write_cloud:
        paths.append(export.write_cloud(ctx.output(index, name, "cloud"), ctx.cloud, ctx.digest))
    return TaskSummary(
        index=index,
        type=task.type,
        name=task.name,
        outputs=[ctx.relative(p) for p in paths],
        results={
            "lower_box": lower,
            "upper_box": upper,
            "slope": fit.slope,
            "r_squared": fit.r_squared,
            "chord_min": fit.chord_min,
            "chord_max": fit.chord_max,
        },
    )


def run_assouad(index: int, task: AssouadTask, ctx: RunContext) -> TaskSummary:
    thetas = task.thetas or ctx.config.theta_grid
    curve = ctx.assouad_curve(thetas)
    upper = upper_assouad_spectrum(curve)
    quasi = _optional("quasi-Assouad dimension", lambda: quasi_assouad(curve))
    dim_a = _optional("Assouad dimension", ctx.assouad_dim)
    reference = _reference(task.reference, SpectrumKind.ASSOUAD, curve.thetas, task.p)
    name = task.name or "assouad"
    paths = [
        export.write_spectrum(ctx.output(index, name, "spectrum"), curve, reference, ctx.digest),
        export.write_spectrum(ctx.output(index, name, "upper_spectrum"), upper, reference, ctx.digest),
    ]
    return TaskSummary(
        index=index,
        type=task.type,
        name=task.name,
        outputs=[ctx.relative(p) for p in paths],
        results={
            "thetas": curve.thetas.tolist(),
            "values": curve.values.tolist(),
            "skipped": curve.skipped,
            "quasi_assouad": quasi,
            "assouad": dim_a,
            "max_reference_deviation": _deviation(curve.values, curve.thetas, reference),
        },
    )


def run_intermediate(index: int, task: IntermediateTask, ctx: RunContext) -> TaskSummary:
    thetas = task.thetas or ctx.config.theta_grid
    curve = ctx.intermediate_curve(thetas)
    reference = _reference(task.reference, SpectrumKind.INTERMEDIATE, curve.thetas, task.p)
    name = task.name or "intermediate"
    paths = [
        export.write_intermediate_curve(ctx.output(index, name, "curve"), curve, reference, ctx.digest),
        export.write_cover_witnesses(ctx.output(index, name, "witnesses", "json"), curve, ctx.digest),
    ]
    return TaskSummary(
        index=index,
        type=task.type,
        name=task.name,
        outputs=[ctx.relative(p) for p in paths],
        results={
            "thetas": curve.thetas.tolist(),
            "values": curve.values.tolist(),
            "lower": curve.lower.tolist(),
            "upper": curve.upper.tolist(),
            "skipped": curve.skipped,
            "isotonic_adjustment": curve.adjustment,
            "hausdorff_proxy": hausdorff_proxy(curve),
            "max_reference_deviation": _deviation(curve.values, curve.thetas, reference),
        },
    )


def run_capacity(index: int, task: CapacityTask, ctx: RunContext) -> TaskSummary:
    outputs = []
    if task.s is not None:
        curve = box_profile_curve(ctx.cloud, task.s, max_support=task.max_support)
        estimate = float(np.clip(curve.fit.slope, 0.0, ctx.cloud.dim_ambient))
        path = export.write_capacity_curve(ctx.output(index, task.name or "capacity", "curve"), curve, ctx.digest)
        outputs.append(ctx.relative(path))
        results = {
            "profile": "box", "s": task.s, "estimate": estimate,
            "slope": curve.fit.slope, "r_squared": curve.fit.r_squared,
            "max_gap": float(curve.gaps.max()), "support_sizes": curve.support_sizes.tolist(),
        }
    else:
        estimate = intermediate_dimension_profile(ctx.cloud, task.theta, task.k, max_support=task.max_support)
        results = {"profile": "intermediate", "theta": task.theta, "k": task.k, "estimate": estimate}
    return TaskSummary(index=index, type=task.type, name=task.name, outputs=outputs, results=results)


def run_fourier(index: int, task: FourierTask, ctx: RunContext) -> TaskSummary:
    thetas = task.thetas or ctx.config.theta_grid
    if task.measure == FourierMeasure.EQUILIBRIUM:
        spec = KernelSpec.box(task.r, task.s)
        mu = equilibrium_measure(reduced_support(ctx.cloud, task.r, MAX_SUPPORT, SUBSAMPLE_FACTOR), spec)
        witness = f"equilibrium(r={task.r:g},s={task.s:g})"
        curve = fourier_curve(mu, thetas, task.z_max, task.samples_per_shell, ctx.seed, witness=witness)
    elif task.measure == FourierMeasure.FAMILY:
        mu = uniform_measure(ctx.cloud)
        curve = set_fourier_spectrum(
            ctx.cloud, thetas, z_max=task.z_max, samples_per_shell=task.samples_per_shell, seed=ctx.seed
        )
    else:
        mu = uniform_measure(ctx.cloud)
        curve = ctx.fourier_curve(thetas, task.z_max, task.samples_per_shell)
    reference = _reference(task.reference, SpectrumKind.FOURIER_SET, curve.thetas, task.p)
    name = task.name or "fourier"
    paths = [export.write_fourier_curve(ctx.output(index, name, "spectrum"), curve, reference, ctx.digest)]
    if task.measure == FourierMeasure.EQUILIBRIUM:
        paths.append(export.write_measure(ctx.output(index, name, "measure"), mu, ctx.digest))
    if task.shells_theta is not None:
        shells = shell_energies(mu, task.shells_theta, task.z_max, task.samples_per_shell, ctx.seed)
        paths.append(export.write_shell_energies(ctx.output(index, name, "shells"), shells, ctx.digest))
    return TaskSummary(
        index=index,
        type=task.type,
        name=task.name,
        outputs=[ctx.relative(p) for p in paths],
        results={
            "witness": curve.witness,
            "thetas": curve.thetas.tolist(),
            "values": curve.values.tolist(),
            "fourier_dimension": curve.fourier_dimension,
            "sobolev_dimension": curve.sobolev,
            "max_reference_deviation": _deviation(curve.values, curve.thetas, reference),
        },
    )


def run_sweep(index: int, task: SweepTask, ctx: RunContext) -> TaskSummary:
    sweep = direction_sweep(
        ctx.cloud,
        task.k,
        task.estimator_spec(),
        n_dirs=task.n_dirs,
        seed=ctx.seed,
        include_axes=task.include_axes,
        angle_grid=task.angle_grid,
        workers=task.workers,
    )
    name = task.name or "sweep"
    results = sweep_summary(sweep)
    results["exceptional_fractions"] = {repr(float(u)): exceptional_fraction(sweep, u) for u in task.exceptional_u}
    paths = [
        export.write_sweep(ctx.output(index, name, "directions"), sweep, ctx.digest),
        export.write_sweep_summary(ctx.output(index, name, "summary", "json"), sweep, results, ctx.digest),
    ]
    return TaskSummary(
        index=index, type=task.type, name=task.name, outputs=[ctx.relative(p) for p in paths], results=results
    )


def _dimension_estimates(ctx: RunContext, thetas: Sequence[float]) -> DimensionEstimates:
    lower, upper, _ = ctx.box()
    assouad_curve = _optional("Assouad spectrum", lambda: ctx.assouad_curve(thetas))
    inter = _optional("intermediate curve", lambda: ctx.intermediate_curve(thetas))
    fourier = _optional("Fourier spectrum", lambda: ctx.fourier_curve(thetas))
    return DimensionEstimates(
        dim_ambient=ctx.cloud.dim_ambient,
        fourier=None if fourier is None else min(fourier.fourier_dimension, float(ctx.cloud.dim_ambient)),
        hausdorff=None if inter is None else hausdorff_proxy(inter),
        lower_box=lower,
        upper_box=upper,
        quasi_assouad=None if assouad_curve is None else _optional(
            "quasi-Assouad dimension", lambda: quasi_assouad(assouad_curve)
        ),
        assouad=_optional("Assouad dimension", ctx.assouad_dim),
    )


def _check_reports(bound: BoundId, task: CheckTask, ctx: RunContext) -> List[BoundReport]:
    config, cloud = ctx.config, ctx.cloud
    tol, thetas, d = config.tolerances, config.theta_grid, cloud.dim_ambient
    if bound == BoundId.CHAIN:
        return [chain_check(_dimension_estimates(ctx, thetas), tol.chain)]
    if bound in (BoundId.FOURIER_LIPSCHITZ, BoundId.FOURIER_CONCAVITY):
        check = fourier_lipschitz_check if bound == BoundId.FOURIER_LIPSCHITZ else fourier_concavity_check
        return [check(ctx.fourier_curve(thetas), tol.fourier)]
    if bound == BoundId.CONTINUITY:
        reports = [continuity_criterion(ctx.fourier_curve(thetas), d, task.k)]
        inter = _optional("intermediate curve", lambda: ctx.intermediate_curve(thetas))
        if inter is not None:
            reports.append(projection_box_criterion(hausdorff_proxy(inter), task.k))
        return reports

    upper_box = ctx.box()[1]
    if bound == BoundId.PROFILE_RANGE:
        return [profile_bound_check(ctx.box_profile(task.k), upper_box, d, task.k, tol.box)]
    if bound == BoundId.EXCEPTIONAL:
        dim_h = hausdorff_proxy(ctx.intermediate_curve(thetas))
        fourier = _optional("Fourier spectrum", lambda: ctx.fourier_curve(thetas))
        reports = []
        for u in task.u:
            reports.extend(exceptional_bounds(u, dim_h, d, task.k, fourier))
        return reports

    curve = ctx.assouad_curve(thetas)
    quasi = _optional("quasi-Assouad dimension", lambda: quasi_assouad(curve))
    if bound == BoundId.ASSOUAD_SPECTRUM_BOUND:
        return [assouad_bound_check(curve, upper_box, d if quasi is None else quasi, tol.assouad)]
    if bound == BoundId.THETA_ZERO_LIMIT:
        return [theta_zero_check(curve, upper_box, tol.assouad)]
    upper = upper_assouad_spectrum(curve)
    measured = _optional("box dimension profile", lambda: ctx.box_profile(task.k))
    return [
        boxapp_lower_bound(
            upper_box, upper.thetas, upper.values, ctx.assouad_dim(), task.k,
            quasi=quasi, measured=measured, slack=tol.box,
        )
    ]


def run_check(index: int, task: CheckTask, ctx: RunContext) -> TaskSummary:
    all_reports: List[BoundReport] = []
    failed: List[str] = []
    for bound in task.bounds:
        reports = _check_reports(bound, task, ctx)
        all_reports.extend(reports)
        if bound in INEQUALITY_CHECKS:
            failed.extend(r.bound_id for r in reports if not r.passed)
    path = ctx.out_dir / f"{index:02d}_{task.name or 'check'}_bounds.jsonl"
    export.write_bound_reports(path, all_reports)
    if failed:
        logger.warning(f"Task {index}: failed checks {', '.join(failed)}")
    return TaskSummary(
        index=index,
        type=task.type,
        name=task.name,
        status=TaskStatus.FAILED_CHECK if failed else TaskStatus.OK,
        outputs=[ctx.relative(path)],
        results={"reports": [r.model_dump(mode="json") for r in all_reports], "failed": failed},
    )


def run_reference(index: int, task: ReferenceTask, ctx: RunContext) -> TaskSummary:
    thetas = task.thetas or ctx.config.theta_grid
    outputs, results, skipped = [], {}, []
    for kind in task.kinds:
        try:
            curve = reference_curve(task.example, kind, thetas, task.p)
        except UnknownExampleError as e:
            logger.warning(f"Reference {task.example.value}/{kind.value} skipped: {e}")
            skipped.append(kind.value)
            continue
        path = export.write_reference_curve(
            ctx.output(index, task.name or f"reference_{task.example.value}", kind.value), curve, ctx.digest
        )
        outputs.append(ctx.relative(path))
        results[kind.value] = curve.values.tolist()
    results["thetas"] = list(thetas)
    results["skipped"] = skipped
    return TaskSummary(index=index, type=task.type, name=task.name, outputs=outputs, results=results)


TASK_RUNNERS: Dict[str, Callable[[int, Any, RunContext], TaskSummary]] = {
    "box": run_box,
    "assouad": run_assouad,
    "intermediate": run_intermediate,
    "capacity": run_capacity,
    "fourier": run_fourier,
    "sweep": run_sweep,
    "check": run_check,
    "reference": run_reference,
}
