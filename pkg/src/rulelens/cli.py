"""Command-line interface.

Verbs mirror the pipeline stages (`gen`, `cex`, `caption`, `summarize`,
`verify`), plus the experiment suites and the exploration service. Exit
codes: 0 success, 1 usage error, 2 stage failure, 3 endpoint failure.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import pipeline
from .pipeline import RunConfig, StageError, UsageError
from .wire import EndpointError


def _load_config(config_path, seed) -> RunConfig:
    cfg = RunConfig.from_toml(config_path) if config_path else RunConfig()
    if seed is not None:
        cfg.seed = seed
    return cfg


def _run_dir(cfg: RunConfig, out, run_name=None) -> Path:
    return pipeline.prepare_run_dir(cfg, out, name=run_name)


common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="TOML run configuration."),
    click.option("--seed", type=int, default=None, help="Override the run seed."),
    click.option("--out", type=click.Path(file_okay=False), default="runs",
                 help="Output root; each run writes to <out>/<run-id>."),
    click.option("--run", "run_name", default=None,
                 help="Run directory name under --out (default: the config hash); "
                      "lets a later stage rerun against existing artifacts."),
]


def with_common(f):
    for opt in reversed(common_options):
        f = opt(f)
    return f


@click.group()
def cli():
    """Derive and causally verify textual explanations of a scene classifier."""


@cli.command()
@with_common
def gen(config_path, seed, out, run_name):
    """Sample the counterfactual query scene set."""
    cfg = _load_config(config_path, seed)
    path = pipeline.run_gen(cfg, _run_dir(cfg, out, run_name))
    click.echo(f"wrote {path}")


@cli.command()
@with_common
def cex(config_path, seed, out, run_name):
    """Search minimal-edit counterfactuals for the scene set."""
    cfg = _load_config(config_path, seed)
    path = pipeline.run_stage1(cfg, _run_dir(cfg, out, run_name))
    click.echo(f"wrote {path}")


@cli.command()
@with_common
def caption(config_path, seed, out, run_name):
    """Caption the counterfactual pairs."""
    cfg = _load_config(config_path, seed)
    path = pipeline.run_stage2(cfg, _run_dir(cfg, out, run_name))
    click.echo(f"wrote {path}")


@cli.command()
@with_common
def summarize(config_path, seed, out, run_name):
    """Mine or summarize candidate explanations from the captions."""
    cfg = _load_config(config_path, seed)
    path = pipeline.run_stage3(cfg, _run_dir(cfg, out, run_name))
    click.echo(f"wrote {path}")


@cli.command()
@with_common
def verify(config_path, seed, out, run_name):
    """Causally verify candidates and write the ranked report and figures."""
    cfg = _load_config(config_path, seed)
    path = pipeline.run_stage4(cfg, _run_dir(cfg, out, run_name))
    click.echo(f"wrote {path}")


@cli.command()
@with_common
def run(config_path, seed, out, run_name):
    """Run every stage end to end."""
    cfg = _load_config(config_path, seed)
    run_dir = pipeline.run_all(cfg, out, name=run_name)
    click.echo(f"run complete: {run_dir}")


@cli.group()
def suite():
    """Experiment suites."""


@suite.command("recover")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(file_okay=False), default="runs/recovery")
@click.option("--n-pairs", type=int, default=100)
@click.option("--ablation/--no-ablation", default=True,
              help="Also run the independent-captions ablation.")
def suite_recover(seed, out, n_pairs, ablation):
    """Plant the default rules, run the pipeline, and check each is recovered."""
    summary = pipeline.run_recovery_suite_with_ablation(
        out, seed=seed, n_pairs=n_pairs, include_ablation=ablation)
    click.echo(pipeline.recovery_markdown(summary["change"], summary["ablation"]))
    click.echo(f"summary under {out}")


@suite.command("bias")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(file_okay=False), default="runs/bias")
@click.option("--base-rule", default="color=red")
@click.option("--bias-rule", default="region=left")
@click.option("--n-pairs", type=int, default=100)
def suite_bias(seed, out, base_rule, bias_rule, n_pairs):
    """Audit a bias-injected classifier against its control."""
    summary = pipeline.run_bias_suite(
        out, base_rule=base_rule, bias_rule=bias_rule, seed=seed, n_pairs=n_pairs)
    click.echo(f"bias surfaced: {summary['bias_surfaced']}")
    click.echo(f"control clean: {summary['control_clean']}")
    click.echo(f"summary under {out}")


@cli.command()
@click.option("--out", "runs_root", type=click.Path(file_okay=False), default="runs",
              help="Root directory holding completed runs.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8321)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static UI bundle to serve under /ui.")
def serve(runs_root, host, port, ui_dir):
    """Serve the exploration API (and optionally the UI) over completed runs."""
    import uvicorn

    from .service import create_app

    app = create_app(runs_root, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except (UsageError, click.UsageError, click.BadParameter) as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except EndpointError as exc:
        click.echo(f"endpoint failure: {exc}", err=True)
        return 3
    except StageError as exc:
        click.echo(f"stage failure: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
