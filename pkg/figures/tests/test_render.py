import json

import pytest

from simfigures.cli import main
from simfigures.plots import PlotSpec, render, render_convergence, render_sweep, save_figure
from simfigures.styles import SCHEME_STYLES, load_styles

SCHEMES = list(SCHEME_STYLES)


@pytest.fixture()
def summary_csv(tmp_path):
    """Layer-sweep summary in the harness schema, six schemes x three values."""
    path = tmp_path / "layers_summary.csv"
    lines = ["sweep_param,sweep_value,scheme,trials,mean_r_min_bpshz,stderr_r_min_bpshz"]
    for value in (2.0, 4.0, 6.0):
        for i, scheme in enumerate(SCHEMES):
            mean = 0.2 * (i + 1) + 0.1 * value
            lines.append(f"layers,{value!r},{scheme},30,{mean!r},{0.05!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def trace_csvs(tmp_path):
    """Three convergence traces (with the trailing cumulative-evals column)."""
    paths = []
    for layers in (4, 7, 10):
        path = tmp_path / f"trace_L{layers}.csv"
        rows = ["t,r_min_raw,r_min_incumbent,evals"]
        best = 0.0
        for t in range(1, 51):
            raw = 0.02 * layers * t / (t + 10) * (1 + 0.2 * ((t * layers) % 5 - 2) / 5)
            best = max(best, raw)
            rows.append(f"{t},{raw!r},{best!r},{4 * t}")
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


class TestSweepPlot:
    def test_six_scheme_styles(self, summary_csv, tmp_path):
        spec = PlotSpec(inputs=(str(summary_csv),), kind="sweep", output=str(tmp_path / "s.svg"))
        fig = render_sweep(spec)
        ax = fig.axes[0]
        labels = [t.get_text() for t in ax.get_legend().get_texts()]
        assert len(labels) == 6
        assert {SCHEME_STYLES[s]["label"] for s in SCHEMES} == set(labels)
        colors = {container.lines[0].get_color() for container in ax.containers}
        assert len(colors) == 6  # every scheme gets its own style

    def test_single_point_with_error_bar(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text(
            "sweep_param,sweep_value,scheme,trials,mean_r_min_bpshz,stderr_r_min_bpshz\n"
            "power,20.0,sim_hrsma,5,1.5,0.2\n",
            encoding="utf-8",
        )
        out = tmp_path / "one.svg"
        render(PlotSpec(inputs=(str(path),), kind="sweep", output=str(out)))
        assert out.exists() and out.stat().st_size > 0

    def test_log_x_option(self, summary_csv, tmp_path):
        spec = PlotSpec(
            inputs=(str(summary_csv),), kind="sweep", output=str(tmp_path / "s.svg"), logx=True
        )
        fig = render_sweep(spec)
        assert fig.axes[0].get_xscale() == "log"

    def test_unknown_scheme_listed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "sweep_param,sweep_value,scheme,trials,mean_r_min_bpshz,stderr_r_min_bpshz\n"
            "layers,2.0,zf_only,5,1.0,0.1\n",
            encoding="utf-8",
        )
        with pytest.raises(ValueError, match="zf_only"):
            render_sweep(PlotSpec(inputs=(str(path),), kind="sweep", output=str(tmp_path / "x.svg")))

    def test_schema_mismatch_reports_columns(self, tmp_path):
        path = tmp_path / "odd.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="mean_r_min_bpshz"):
            render_sweep(PlotSpec(inputs=(str(path),), kind="sweep", output=str(tmp_path / "x.svg")))

    def test_style_override_file(self, summary_csv, tmp_path):
        styles_path = tmp_path / "styles.json"
        styles_path.write_text(json.dumps({"sim_hrsma": {"color": "#000000"}}), encoding="utf-8")
        styles = load_styles(styles_path)
        assert styles["sim_hrsma"]["color"] == "#000000"
        assert styles["sim_rsma"]["color"] == SCHEME_STYLES["sim_rsma"]["color"]


class TestConvergencePlot:
    def test_three_labeled_curves(self, trace_csvs, tmp_path):
        spec = PlotSpec(
            inputs=tuple(map(str, trace_csvs)), kind="convergence", output=str(tmp_path / "c.svg")
        )
        fig = render_convergence(spec)
        ax = fig.axes[0]
        labels = [t.get_text() for t in ax.get_legend().get_texts()]
        assert labels == ["L4", "L7", "L10"]
        for line in ax.get_lines():
            y = line.get_ydata()
            assert all(b >= a for a, b in zip(y, y[1:]))  # incumbent traces only

    def test_single_trace_single_curve(self, trace_csvs, tmp_path):
        spec = PlotSpec(
            inputs=(str(trace_csvs[0]),), kind="convergence", output=str(tmp_path / "c.svg")
        )
        fig = render_convergence(spec)
        assert len(fig.axes[0].get_lines()) == 1

    def test_raw_traces_optional(self, trace_csvs, tmp_path):
        spec = PlotSpec(
            inputs=(str(trace_csvs[0]),),
            kind="convergence",
            output=str(tmp_path / "c.svg"),
            show_raw=True,
        )
        fig = render_convergence(spec)
        assert len(fig.axes[0].get_lines()) == 2

    def test_missing_columns_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("iter,rate\n1,0.5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="r_min_incumbent"):
            render_convergence(
                PlotSpec(inputs=(str(path),), kind="convergence", output=str(tmp_path / "x.svg"))
            )


class TestDeterministicOutput:
    @pytest.mark.parametrize("suffix", [".svg", ".png"])
    def test_rerender_byte_identical(self, summary_csv, trace_csvs, tmp_path, suffix):
        for kind, inputs in (
            ("sweep", (str(summary_csv),)),
            ("convergence", tuple(map(str, trace_csvs))),
        ):
            a = tmp_path / f"{kind}_a{suffix}"
            b = tmp_path / f"{kind}_b{suffix}"
            render(PlotSpec(inputs=inputs, kind=kind, output=str(a)))
            render(PlotSpec(inputs=inputs, kind=kind, output=str(b)))
            assert a.read_bytes() == b.read_bytes()


class TestSpecAndCli:
    def test_spec_validation(self, summary_csv, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            PlotSpec(inputs=(str(summary_csv),), kind="histogram", output="x.svg")
        with pytest.raises(FileNotFoundError):
            PlotSpec(inputs=("nope.csv",), kind="sweep", output="x.svg")
        with pytest.raises(ValueError, match="no input"):
            PlotSpec(inputs=(), kind="sweep", output="x.svg")

    def test_cli_round_trip(self, summary_csv, trace_csvs, tmp_path):
        out_sweep = tmp_path / "sweep.svg"
        assert main(["render", "--kind", "sweep", "--in", str(summary_csv), "--out", str(out_sweep)]) == 0
        assert out_sweep.exists()
        out_conv = tmp_path / "conv.png"
        joined = ",".join(map(str, trace_csvs))
        assert main(["render", "--kind", "convergence", "--in", joined, "--out", str(out_conv)]) == 0
        assert out_conv.exists()
