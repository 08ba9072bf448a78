"""
Escrita de curvas, nuvens e relatórios em CSV, JSON e JSON lines.

Floats saem com repr para que execuções idênticas produzam arquivos
byte a byte iguais.
"""

import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel

from scr.core.model.cloud import PointCloud
from scr.core.model.curves import (
    CapacityCurve,
    CountCurve,
    FourierCurve,
    IntermediateCurve,
    ShellEnergyCurve,
    SpectrumCurve,
)
from scr.core.model.measure import DiscreteMeasure
from scr.core.model.projection import SweepResult
from scr.core.model.reports import BoundReport, ReferenceCurve


def canonical_json(payload: Any) -> str:
    """JSON com chaves ordenadas e separadores compactos."""
    return json.dumps(payload, separators=(",", ":"), sort_keys=True, ensure_ascii=False)


def config_hash(payload: Any) -> str:
    """sha256 do JSON canônico da configuração."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "nan" if np.isnan(value) else repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    digest: Optional[str] = None,
) -> Path:
    """
    Escreve CSV com separador ',', decimal '.', fim de linha LF e cabeçalho.

    Args:
        path: Arquivo de saída
        header: Nomes das colunas
        rows: Linhas de valores
        digest: Hash da configuração, gravado como '# config_hash: <hash>'

    Returns:
        Caminho escrito
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        if digest is not None:
            f.write(f"# config_hash: {digest}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug(f"CSV escrito em {path}")
    return path


def write_json(path: Path, payload: Any) -> Path:
    """Escreve JSON indentado (modelos pydantic via model_dump em modo json)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    with path.open("w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=False, ensure_ascii=False)
        f.write("\n")
    return path


def write_jsonl(path: Path, records: Iterable[Any]) -> Path:
    """Uma linha JSON por registro; registros podem ser modelos pydantic."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for record in records:
            if isinstance(record, BaseModel):
                record = record.model_dump(mode="json")
            f.write(canonical_json(record) + "\n")
    return path


def spectrum_rows(curve: SpectrumCurve, reference: Optional[ReferenceCurve] = None) -> List[tuple]:
    """Linhas (theta, value, fit_r2, n_anchors[, reference])."""
    ref = None
    if reference is not None:
        ref = dict(zip(reference.thetas.tolist(), reference.values.tolist()))
    rows = []
    for t, v, r2, n in zip(curve.thetas, curve.values, curve.fit_r2, curve.n_anchors):
        row = (float(t), float(v), float(r2), int(n))
        if ref is not None:
            row += (ref.get(float(t)),)
        rows.append(row)
    return rows


def write_count_curve(path: Path, curve: CountCurve, digest: Optional[str] = None) -> Path:
    return write_csv(path, ["r", "count"], curve.rows(), digest)


def write_spectrum(
    path: Path,
    curve: SpectrumCurve,
    reference: Optional[ReferenceCurve] = None,
    digest: Optional[str] = None,
) -> Path:
    """Curva de espectro, com a coluna da fórmula fechada quando houver."""
    header = ["theta", "value", "fit_r2", "n_anchors"]
    if reference is not None:
        header.append("reference")
    return write_csv(path, header, spectrum_rows(curve, reference), digest)


def write_intermediate_curve(
    path: Path,
    curve: SpectrumCurve,
    reference: Optional[ReferenceCurve] = None,
    digest: Optional[str] = None,
) -> Path:
    """Curva intermediária: theta,estimate,fit_r2[,reference]."""
    ref = {} if reference is None else dict(zip(reference.thetas.tolist(), reference.values.tolist()))
    header = ["theta", "estimate", "fit_r2"] + (["reference"] if reference is not None else [])
    rows = []
    for t, v, r2 in zip(curve.thetas, curve.values, curve.fit_r2):
        row = (float(t), float(v), float(r2))
        if reference is not None:
            row += (ref.get(float(t)),)
        rows.append(row)
    return write_csv(path, header, rows, digest)


def write_cover_witnesses(path: Path, curve: IntermediateCurve, digest: Optional[str] = None) -> Path:
    """
    Diagnósticos da curva intermediária em JSON.

    Por θ: estimativa, extremos de corda e a cobertura ótima testemunha
    (escala, expoente, custo e histograma de níveis).
    """
    entries = []
    for i, theta in enumerate(curve.thetas.tolist()):
        entry = {
            "theta": theta,
            "estimate": float(curve.values[i]),
            "lower": float(curve.lower[i]),
            "upper": float(curve.upper[i]),
        }
        if curve.witnesses:
            entry["cover"] = curve.witnesses[i].model_dump(mode="json")
        entries.append(entry)
    return write_json(path, {"config_hash": digest, "adjustment": curve.adjustment, "thetas": entries})


def write_fourier_curve(
    path: Path,
    curve: FourierCurve,
    reference: Optional[ReferenceCurve] = None,
    digest: Optional[str] = None,
) -> Path:
    ref = {} if reference is None else dict(zip(reference.thetas.tolist(), reference.values.tolist()))
    header = ["theta", "estimate", "rho", "fit_r2"] + (["reference"] if reference is not None else [])
    rows = []
    for t, v, rho, r2 in zip(curve.thetas, curve.values, curve.rho, curve.fit_r2):
        row = (float(t), float(v), float(rho), float(r2))
        if reference is not None:
            row += (ref.get(float(t)),)
        rows.append(row)
    return write_csv(path, header, rows, digest)


def write_capacity_curve(path: Path, curve: CapacityCurve, digest: Optional[str] = None) -> Path:
    rows = zip(curve.scales, curve.capacities)
    return write_csv(path, ["r", "capacity"], rows, digest)


def write_shell_energies(path: Path, curve: ShellEnergyCurve, digest: Optional[str] = None) -> Path:
    rows = zip(curve.radii, curve.values, curve.n_samples)
    return write_csv(path, ["R", "value", "n_samples"], rows, digest)


def write_reference_curve(path: Path, curve: ReferenceCurve, digest: Optional[str] = None) -> Path:
    return write_csv(path, ["theta", "reference"], zip(curve.thetas, curve.values), digest)


def write_sweep(path: Path, sweep: SweepResult, digest: Optional[str] = None) -> Path:
    """Uma linha por direção: índice, ângulo (G(2,1)) ou hash do referencial, estimativa."""
    rows = [(i, V.label(), x) for i, (V, x) in enumerate(zip(sweep.directions, sweep.estimates))]
    return write_csv(path, ["dir_index", "angle_or_frame_hash", "estimate"], rows, digest)


def write_sweep_summary(path: Path, sweep: SweepResult, summary: dict, digest: Optional[str] = None) -> Path:
    """Resumo da varredura em JSON, com eixos e erros por direção."""
    payload = {
        "config_hash": digest,
        **summary,
        "axis_directions": [i for i, axis in enumerate(sweep.is_axis) if axis],
        "errors": {str(i): err for i, err in enumerate(sweep.errors) if err},
    }
    return write_json(path, payload)


def write_cloud(path: Path, cloud: PointCloud, digest: Optional[str] = None) -> Path:
    header = [f"x{i}" for i in range(cloud.dim_ambient)]
    return write_csv(path, header, cloud.points.tolist(), digest)


def write_measure(path: Path, mu: DiscreteMeasure, digest: Optional[str] = None) -> Path:
    header = [f"x{i}" for i in range(mu.support.dim_ambient)] + ["weight"]
    rows = [list(p) + [w] for p, w in zip(mu.points.tolist(), mu.weights.tolist())]
    return write_csv(path, header, rows, digest)


def write_bound_reports(path: Path, reports: Iterable[BoundReport]) -> Path:
    return write_jsonl(path, reports)
