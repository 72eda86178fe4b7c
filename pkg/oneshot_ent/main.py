from typing import Optional

import click

from oneshot_ent import __version__
from oneshot_ent.cli import MEASURES, cmd_experiments, cmd_measure, cmd_protocol


def common_options(func):
    func = click.option("-v", "--verbose", is_flag=True, help="Log solver details")(func)
    func = click.option(
        "--dump-sdp", is_flag=True, help="Write every SDP in SDPA sparse format under OUT_DIR/sdp"
    )(func)
    func = click.option("--seed", type=int, help="See-saw seed (overrides the config)")(func)
    func = click.option(
        "--out-dir", type=click.Path(file_okay=False), help="Directory for result files"
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        envvar="ONESHOT_ENT_CONFIG",
        help="git-config style run configuration",
    )(func)
    return func


@click.group()
@click.version_option(__version__, prog_name="oneshot-ent")
def cli() -> None:
    """One-shot entanglement measures and SEPP protocol bounds."""


@cli.command()
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False))
@click.option("--measure", required=True, type=click.Choice(MEASURES))
@click.option("--eps", type=float, help="Smoothing parameter for the -smooth measures")
@click.option(
    "--sigma",
    "sigma_path",
    type=click.Path(dir_okay=False),
    help="Second state for dmax and dmin",
)
@click.option("--max-width", type=float, help="Fail with exit 4 when the bracket is wider")
@common_options
def measure(
    state_path: str,
    measure: str,
    eps: Optional[float],
    sigma_path: Optional[str],
    max_width: Optional[float],
    config_path: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    dump_sdp: bool,
    verbose: bool,
) -> None:
    """Evaluate an entanglement measure on a state file."""
    cmd_measure(
        state_path=state_path,
        measure=measure,
        eps=eps,
        sigma_path=sigma_path,
        max_width=max_width,
        config_path=config_path,
        out_dir=out_dir,
        seed=seed,
        dump_sdp=dump_sdp,
        verbose=verbose,
    )


@cli.command()
@click.argument("kind", type=click.Choice(["distill", "dilute", "catalytic-dilute"]))
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False))
@click.option("--eps", type=float, default=0.0, show_default=True)
@click.option("--delta", type=float, help="delta-SEPP threshold for catalytic-dilute")
@common_options
def protocol(
    kind: str,
    state_path: str,
    eps: float,
    delta: Optional[float],
    config_path: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    dump_sdp: bool,
    verbose: bool,
) -> None:
    """Build and certify a distillation or dilution channel."""
    if kind == "catalytic-dilute" and delta is None:
        raise click.UsageError("catalytic-dilute requires --delta")
    if kind != "catalytic-dilute" and delta is not None:
        raise click.UsageError("--delta can only be used with catalytic-dilute")
    cmd_protocol(
        kind=kind,
        state_path=state_path,
        eps=eps,
        delta=delta,
        config_path=config_path,
        out_dir=out_dir,
        seed=seed,
        dump_sdp=dump_sdp,
        verbose=verbose,
    )


@cli.command()
@click.argument("suite", type=click.Choice(["theorems", "regularize"]))
@click.option("--state", "state_path", type=click.Path(dir_okay=False))
@click.option("--nmax", "n_max", type=int, help="Largest number of copies")
@click.option("--eps", type=float, help="Smoothing parameter (overrides the config)")
@common_options
def experiments(
    suite: str,
    state_path: Optional[str],
    n_max: Optional[int],
    eps: Optional[float],
    config_path: Optional[str],
    out_dir: Optional[str],
    seed: Optional[int],
    dump_sdp: bool,
    verbose: bool,
) -> None:
    """Run the theorem suite or a regularization series."""
    if suite == "theorems" and (state_path or n_max is not None):
        raise click.UsageError("--state and --nmax only apply to regularize")
    if suite == "regularize" and not state_path:
        raise click.UsageError("regularize requires --state")
    cmd_experiments(
        suite=suite,
        config_path=config_path,
        state_path=state_path,
        n_max=n_max,
        eps=eps,
        out_dir=out_dir,
        seed=seed,
        dump_sdp=dump_sdp,
        verbose=verbose,
    )
