"""
Testes para o módulo export.

Valida o hash canônico da configuração e o formato dos CSV e JSON lines.
"""

import json

import numpy as np
import pytest

from scr.core.export import (
    canonical_json,
    config_hash,
    write_csv,
    write_capacity_curve,
    write_cover_witnesses,
    write_fourier_curve,
    write_intermediate_curve,
    write_json,
    write_jsonl,
    write_shell_energies,
    write_spectrum,
    write_sweep,
    write_sweep_summary,
)
from scr.core.model.curves import (
    CapacityCurve,
    CoverCost,
    FourierCurve,
    IntermediateCurve,
    ShellEnergyCurve,
    SpectrumCurve,
)
from scr.core.model.projection import EstimatorKind, EstimatorSpec, SweepResult
from scr.core.model.reports import BoundReport, ExampleId, SpectrumKind
from scr.core.oracles import reference_curve
from scr.core.projections import line_from_angle


@pytest.fixture
def curve():
    return SpectrumCurve(
        thetas=[0.25, 0.5], values=[1.0, 1.0], fit_r2=[1.0, 0.5], n_anchors=[4, 3], dim_ambient=1
    )


@pytest.fixture
def intermediate():
    cover = CoverCost(r=0.25, theta=0.5, s=1.0, cost=1.0, j_top=2, j_bot=4, witness_levels={2: 1, 4: 3})
    return IntermediateCurve(
        thetas=[0.5], values=[1.0], fit_r2=[0.9], n_anchors=[3], lower=[0.9], upper=[1.1],
        witnesses=[cover], dim_ambient=1, kind="intermediate",
    )


@pytest.fixture
def sweep():
    return SweepResult(
        d=2,
        k=1,
        estimator=EstimatorSpec(kind=EstimatorKind.BOX),
        directions=[line_from_angle(0.0), line_from_angle(np.pi / 2)],
        estimates=[1.0, float("nan")],
        is_axis=[True, True],
        errors=[None, "poucas escalas"],
    )


class TestConfigHash:
    """Testes do JSON canônico e do hash."""

    def test_key_order_irrelevant(self):
        """Mesma configuração com chaves em ordens diferentes."""
        a = {"seed": 1, "tasks": [{"type": "box"}], "generator": {"kind": "segment", "delta": 0.5}}
        b = {"generator": {"delta": 0.5, "kind": "segment"}, "tasks": [{"type": "box"}], "seed": 1}
        assert canonical_json(a) == canonical_json(b)
        assert config_hash(a) == config_hash(b)

    def test_hash_is_sha256_hex(self):
        digest = config_hash({"seed": 1})
        assert len(digest) == 64
        assert int(digest, 16) >= 0

    def test_different_configs(self):
        """Configurações diferentes têm hashes diferentes."""
        assert config_hash({"seed": 1}) != config_hash({"seed": 2})


class TestCsv:
    """Testes do formato CSV."""

    def test_header_and_digest(self, tmp_path):
        """Primeira linha é o hash, segunda o cabeçalho; fim de linha LF."""
        path = write_csv(tmp_path / "out.csv", ["a", "b"], [(1, 2.5)], digest="abc")
        raw = path.read_bytes()
        assert raw == b"# config_hash: abc\na,b\n1,2.5\n"

    def test_without_digest(self, tmp_path):
        path = write_csv(tmp_path / "out.csv", ["a"], [(1,)])
        assert path.read_text(encoding="utf-8").splitlines()[0] == "a"

    def test_cell_formatting(self, tmp_path):
        """Floats em repr, NaN como 'nan', booleanos em minúsculas e None vazio."""
        rows = [(0.1, float("nan"), True, None, np.float64(1 / 3), np.int64(7), np.bool_(False))]
        path = write_csv(tmp_path / "out.csv", list("abcdefg"), rows)
        line = path.read_text(encoding="utf-8").splitlines()[1]
        assert line == f"0.1,nan,true,,{1 / 3!r},7,false"

    def test_creates_parent_directory(self, tmp_path):
        path = write_csv(tmp_path / "nested" / "dir" / "out.csv", ["a"], [])
        assert path.exists()

    def test_deterministic(self, tmp_path, curve):
        """Duas escritas da mesma curva são byte a byte iguais."""
        a = write_spectrum(tmp_path / "a.csv", curve, digest="h")
        b = write_spectrum(tmp_path / "b.csv", curve, digest="h")
        assert a.read_bytes() == b.read_bytes()


class TestCurveWriters:
    """Testes dos escritores de curvas."""

    def test_spectrum_with_reference(self, tmp_path, curve):
        """Coluna reference com o valor da fórmula em cada θ."""
        reference = reference_curve(ExampleId.SEGMENT, SpectrumKind.ASSOUAD, [0.25, 0.5])
        path = write_spectrum(tmp_path / "s.csv", curve, reference)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,value,fit_r2,n_anchors,reference"
        assert lines[1] == "0.25,1.0,1.0,4,1.0"
        assert lines[2] == "0.5,1.0,0.5,3,1.0"

    def test_spectrum_without_reference(self, tmp_path, curve):
        path = write_spectrum(tmp_path / "s.csv", curve)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "theta,value,fit_r2,n_anchors"

    def test_sweep_rows(self, tmp_path, sweep):
        """Índice, ângulo da reta e estimativa; direção falha sai como 'nan'."""
        path = write_sweep(tmp_path / "sweep.csv", sweep)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "dir_index,angle_or_frame_hash,estimate"
        assert lines[1] == "0,0.0,1.0"
        assert lines[2] == f"1,{np.pi / 2!r},nan"

    def test_fourier_curve_header(self, tmp_path):
        curve = FourierCurve(
            thetas=[0.0, 0.5, 1.0], values=[0.0, 0.5, 1.0], rho=[0.0, 0.0, 0.0], fit_r2=[1.0, 1.0, 1.0],
            dim_ambient=1,
        )
        path = write_fourier_curve(tmp_path / "f.csv", curve)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,estimate,rho,fit_r2"
        assert lines[2] == "0.5,0.5,0.0,1.0"

    def test_shell_energies_header(self, tmp_path):
        curve = ShellEnergyCurve(
            radii=[2.0, 4.0], values=[1.0, 0.5], n_samples=[8, 8], theta=0.5, cutoff=8.0, dim_ambient=1
        )
        path = write_shell_energies(tmp_path / "shells.csv", curve)
        assert path.read_text(encoding="utf-8").splitlines() == ["R,value,n_samples", "2.0,1.0,8", "4.0,0.5,8"]

    def test_capacity_curve_header(self, tmp_path):
        curve = CapacityCurve(
            scales=[0.5, 0.25], capacities=[2.0, 4.0], gaps=[0.0, 0.0], support_sizes=[2, 4],
            family="box_profile", s=1.0,
        )
        path = write_capacity_curve(tmp_path / "c.csv", curve)
        assert path.read_text(encoding="utf-8").splitlines() == ["r,capacity", "0.5,2.0", "0.25,4.0"]

    def test_intermediate_curve_header(self, tmp_path, intermediate):
        """theta,estimate,fit_r2, com reference quando houver fórmula."""
        path = write_intermediate_curve(tmp_path / "i.csv", intermediate)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,estimate,fit_r2"
        assert lines[1] == "0.5,1.0,0.9"
        reference = reference_curve(ExampleId.SEGMENT, SpectrumKind.INTERMEDIATE, [0.5])
        path = write_intermediate_curve(tmp_path / "r.csv", intermediate, reference)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "theta,estimate,fit_r2,reference"


class TestDiagnostics:
    """Testes dos diagnósticos em JSON."""

    def test_cover_witnesses(self, tmp_path, intermediate):
        """Histograma de níveis e extremos de corda por θ."""
        path = write_cover_witnesses(tmp_path / "w.json", intermediate, digest="h")
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["config_hash"] == "h"
        entry = payload["thetas"][0]
        assert entry["theta"] == 0.5
        assert (entry["lower"], entry["estimate"], entry["upper"]) == (0.9, 1.0, 1.1)
        assert entry["cover"]["witness_levels"] == {"2": 1, "4": 3}
        assert entry["cover"]["j_bot"] == 4

    def test_sweep_summary(self, tmp_path, sweep):
        """Resumo com eixos e erros indexados pela direção."""
        path = write_sweep_summary(tmp_path / "s.json", sweep, {"median": 1.0}, digest="h")
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["median"] == 1.0
        assert payload["axis_directions"] == [0, 1]
        assert payload["errors"] == {"1": "poucas escalas"}


class TestJson:
    """Testes de JSON e JSON lines."""

    def test_bound_report_line(self, tmp_path):
        """Relatórios usam a chave 'pass'."""
        report = BoundReport(bound_id="chain", bound=1.0, measured=0.5, slack=0.1, passed=True)
        path = write_jsonl(tmp_path / "r.jsonl", [report, {"x": 1}])
        lines = path.read_text(encoding="utf-8").splitlines()
        first = json.loads(lines[0])
        assert first["pass"] is True
        assert first["bound_id"] == "chain"
        assert "passed" not in first
        assert json.loads(lines[1]) == {"x": 1}

    def test_write_json_model(self, tmp_path):
        """Modelos pydantic são serializados em modo json."""
        report = BoundReport(bound_id="x", bound=2.0)
        path = write_json(tmp_path / "r.json", report)
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["bound"] == 2.0
        assert payload["measured"] is None
