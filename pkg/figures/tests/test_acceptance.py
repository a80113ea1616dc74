"""Secondary acceptance: S1, printed as a PASS/FAIL line (run with -s)."""

from test_render import summary_csv, trace_csvs  # noqa: F401  (fixtures)

from simfigures.plots import PlotSpec, render, render_convergence, render_sweep


def test_s1_rendering(summary_csv, trace_csvs, tmp_path):  # noqa: F811
    sweep_spec = PlotSpec(
        inputs=(str(summary_csv),), kind="sweep", output=str(tmp_path / "sweep.svg")
    )
    conv_spec = PlotSpec(
        inputs=tuple(map(str, trace_csvs)),
        kind="convergence",
        output=str(tmp_path / "conv.svg"),
    )

    fig_sweep = render_sweep(sweep_spec)
    styled_series = len(fig_sweep.axes[0].containers)
    fig_conv = render_convergence(conv_spec)
    labeled_curves = len([t for t in fig_conv.axes[0].get_legend().get_texts()])

    identical = True
    for spec in (sweep_spec, conv_spec):
        first = render(spec).read_bytes()
        second = render(spec).read_bytes()
        identical &= first == second

    passed = styled_series == 6 and labeled_curves == 3 and identical
    print(
        f"S1 rendering: {'PASS' if passed else 'FAIL'} "
        f"(sweep series {styled_series}/6, convergence curves {labeled_curves}/3, "
        f"re-render byte-identical: {identical})"
    )
    assert passed
