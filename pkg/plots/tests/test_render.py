import subprocess
import sys
from pathlib import Path

import pytest

from alipplots.cli import main
from alipplots.render import (
    FigureSpec,
    PlotError,
    load_log,
    render,
    step_mean_abs_tau,
)
from alipplots.render import _render_tracking, _render_torque, _window

DATA = Path(__file__).resolve().parent / "data"
GOLDEN = DATA / "golden.csv"

HEADER = ("t,theta_c,L,theta_des,L_des,tau_commanded,tau_applied,r_c,"
          "step_index,impact,perturb_active,fell,qp_status")


@pytest.fixture()
def tiny_csv(tmp_path):
    # 20 handmade rows spanning one impact and a perturbation window
    lines = [HEADER]
    for i in range(20):
        t = i * 0.01
        impact = 1 if i == 10 else 0
        perturb = 1 if 5 <= i < 8 else 0
        step = 0 if i < 10 else 1
        lines.append(
            f"{t},{0.01 * i},{1.0 + i},{0.01 * i - 0.001},{1.0 + i - 0.1},"
            f"{2.0 - 0.1 * i},{2.0 - 0.1 * i},0.9,{step},{impact},{perturb},0,optimal"
        )
    path = tmp_path / "tiny.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.mark.parametrize("kind", ["tracking", "torque", "torque-decay",
                                  "perturbation-window"])
def test_render_all_kinds_from_golden(kind, tmp_path):
    out = tmp_path / f"{kind}.png"
    result = render(FigureSpec(str(GOLDEN), kind, str(out)))
    assert Path(result) == out
    assert out.is_file() and out.stat().st_size > 0


def test_tracking_has_two_panels(tiny_csv, tmp_path):
    out = tmp_path / "smoke.png"
    render(FigureSpec(str(tiny_csv), "tracking", str(out)))
    assert out.stat().st_size > 0
    cols = load_log(tiny_csv)
    fig = _render_tracking(cols, FigureSpec(str(tiny_csv), "tracking", str(out)),
                           _window(cols, None, None))
    assert len(fig.axes) == 2


def test_torque_bound_lines_at_23(tmp_path):
    cols = load_log(GOLDEN)
    spec = FigureSpec(str(GOLDEN), "torque", str(tmp_path / "torque.png"))
    fig = _render_torque(cols, spec, _window(cols, None, None))
    levels = set()
    for line in fig.axes[0].get_lines():
        ys = set(line.get_ydata())
        if len(ys) == 1:
            levels |= ys
    assert 23.0 in levels and -23.0 in levels


def test_torque_decay_matches_primary_metrics(tmp_path):
    # the primary's metrics command is the reference for the bar heights
    result = subprocess.run(
        [sys.executable, "-m", "alipmpc.cli", "metrics", "--csv", str(GOLDEN),
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    summary = {}
    for line in (tmp_path / "golden_metrics.txt").read_text().splitlines():
        key, _, value = line.partition(" = ")
        summary[key] = value
    means = step_mean_abs_tau(load_log(GOLDEN))
    reference = {
        int(k.split(".")[1]): float(v)
        for k, v in summary.items()
        if k.startswith("step_mean_abs_tau.")
    }
    assert set(means) == set(reference)
    for k, v in reference.items():
        assert abs(means[k] - v) <= 1e-9


def test_window_selection(tmp_path):
    out = tmp_path / "win.png"
    render(FigureSpec(str(GOLDEN), "tracking", str(out), t0=0.4, t1=0.8))
    assert out.stat().st_size > 0
    with pytest.raises(PlotError, match="outside the log range"):
        render(FigureSpec(str(GOLDEN), "tracking", str(out), t0=5.0, t1=6.0))


def test_missing_column_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,theta_c\n0.0,0.1\n")
    with pytest.raises(PlotError, match="missing columns"):
        load_log(bad)


def test_perturbation_window_requires_active_samples(tiny_csv, tmp_path):
    out = tmp_path / "p.png"
    render(FigureSpec(str(tiny_csv), "perturbation-window", str(out)))
    assert out.stat().st_size > 0
    with pytest.raises(PlotError, match="no active perturbation"):
        render(FigureSpec(str(tiny_csv), "perturbation-window", str(out),
                          t0=0.1, t1=0.19))


def test_render_does_not_mutate_input(tmp_path):
    before = GOLDEN.read_bytes()
    render(FigureSpec(str(GOLDEN), "torque", str(tmp_path / "x.png")))
    assert GOLDEN.read_bytes() == before


def test_render_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render(FigureSpec(str(GOLDEN), "tracking", str(a)))
    render(FigureSpec(str(GOLDEN), "tracking", str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_cli_success_and_failure(tmp_path, capsys):
    out = tmp_path / "cli.png"
    assert main(["torque", "--csv", str(GOLDEN), "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.is_file()
    code = main(["torque", "--csv", str(tmp_path / "missing.csv"),
                 "--out", str(out)])
    assert code == 1
    assert "error" in capsys.readouterr().err
