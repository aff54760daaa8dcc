"""Command-line interface for GCI detection and evaluation."""

import sys
from pathlib import Path

import click

from .cli_runner import CliRunner
from .methods import MethodRegistry
from .models import MixedPhaseSettings, NoiseKind, PolarityMode, WindowShape
from .synthetic import DEFAULT_SUITE_F0_HZ

METHOD_CHOICE = click.Choice(MethodRegistry.list_methods())


def _exit(code: int) -> None:
    if code != 0:
        sys.exit(code)


@click.group(invoke_without_command=True)
@click.option("-v", "--verbose", is_flag=True, help="Enable verbose logging")
@click.option("--show-options", is_flag=True, help="Show all available configuration options with descriptions")
@click.pass_context
def main(ctx: click.Context, verbose: bool, show_options: bool) -> None:
    """Detect glottal closure instants and evaluate detectors against EGG references.

    Example:
        gcitool detect speech.wav -o gcis.txt --method sedreams
    """
    runner = CliRunner(verbose=verbose)
    ctx.obj = runner

    if show_options:
        runner.show_options()
        return

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True, help="GCI list (.txt or .csv)")
@click.option("-m", "--method", type=METHOD_CHOICE, default="sedreams", show_default=True, help="Detection method")
@click.option("--f0-mean", type=float, help="Speaker mean f0 in Hz (estimated from the file if omitted)")
@click.option(
    "--polarity",
    type=click.Choice([p.value for p in PolarityMode]),
    default=PolarityMode.AUTO.value,
    show_default=True,
    help="Speech polarity handling",
)
@click.option("-c", "--config", type=click.Path(exists=True, path_type=Path), help="Detector settings YML")
@click.pass_obj
def detect(
    runner: CliRunner,
    input_path: Path,
    output: Path,
    method: str,
    f0_mean: float | None,
    polarity: str,
    config: Path | None,
) -> None:
    """Detect GCIs in a WAV file."""
    _exit(runner.detect(input_path, output, method, f0_mean, PolarityMode(polarity), config))


@main.command()
@click.option("-c", "--config", type=click.Path(exists=True, path_type=Path), required=True, help="Experiment YML")
@click.option("-o", "--output", type=click.Path(path_type=Path), default=Path("./output"), help="Output directory")
@click.option("-m", "--method", "methods", type=METHOD_CHOICE, multiple=True, help="Restrict to these methods")
@click.option("--condition", "conditions", multiple=True, help="Restrict to these condition names")
@click.option("--delay-ms", type=float, help="Speech delay behind the EGG, overriding alignment for every file")
@click.option("-j", "--workers", type=click.IntRange(min=1), help="Parallel worker processes")
@click.option("--plots", is_flag=True, help="Also write PNG figures")
@click.option("--validate-only", is_flag=True, help="Validate configuration without running")
@click.option("--snr", "snrs_db", type=float, multiple=True, help="Sweep these SNRs in dB (replaces the conditions)")
@click.option(
    "--noise",
    type=click.Choice([k.value for k in NoiseKind]),
    default=NoiseKind.WHITE_GAUSSIAN.value,
    show_default=True,
    help="Noise source of the SNR sweep",
)
@click.option("--noise-file", type=click.Path(exists=True, path_type=Path), help="WAV file for external noise")
@click.option("--t60", "t60s_s", type=float, multiple=True, help="Sweep these T60s in s (replaces the conditions)")
@click.pass_obj
def evaluate(
    runner: CliRunner,
    config: Path,
    output: Path,
    methods: tuple[str, ...],
    conditions: tuple[str, ...],
    delay_ms: float | None,
    workers: int | None,
    plots: bool,
    validate_only: bool,
    snrs_db: tuple[float, ...],
    noise: str,
    noise_file: Path | None,
    t60s_s: tuple[float, ...],
) -> None:
    """Evaluate detectors on a manifest of speech/EGG recordings."""
    _exit(
        runner.evaluate(
            config,
            output,
            list(methods) or None,
            list(conditions) or None,
            delay_ms,
            workers,
            plots,
            validate_only,
            snrs_db=snrs_db,
            t60s_s=t60s_s,
            noise_kind=NoiseKind(noise),
            noise_file=noise_file,
        )
    )


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True, help="Degraded WAV file")
@click.option("--snr", "snr_db", type=float, help="Target mean segmental SNR in dB")
@click.option(
    "--noise",
    type=click.Choice([k.value for k in NoiseKind]),
    default=NoiseKind.WHITE_GAUSSIAN.value,
    show_default=True,
    help="Noise source",
)
@click.option("--noise-file", type=click.Path(exists=True, path_type=Path), help="WAV file for external noise")
@click.option("--t60", "t60_s", type=float, help="Reverberation time in seconds (3x4x5 m room)")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Noise seed")
@click.pass_obj
def degrade(
    runner: CliRunner,
    input_path: Path,
    output: Path,
    snr_db: float | None,
    noise: str,
    noise_file: Path | None,
    t60_s: float | None,
    seed: int,
) -> None:
    """Add noise and/or reverberation to a WAV file."""
    _exit(runner.degrade(input_path, output, snr_db, NoiseKind(noise), noise_file, t60_s, seed))


@main.command()
@click.option("-c", "--config", type=click.Path(exists=True, path_type=Path), help="Experiment YML")
@click.option("-o", "--output", type=click.Path(path_type=Path), default=Path("./output"), help="Output directory")
@click.option("-m", "--method", "methods", type=METHOD_CHOICE, multiple=True, help="Methods to time")
@click.option("-r", "--repetitions", type=click.IntRange(min=1), default=3, show_default=True, help="Timed runs")
@click.option("--seconds", type=float, default=60.0, show_default=True, help="Synthetic audio length without -c")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Synthetic suite seed")
@click.pass_obj
def bench(
    runner: CliRunner,
    config: Path | None,
    output: Path,
    methods: tuple[str, ...],
    repetitions: int,
    seconds: float,
    seed: int,
) -> None:
    """Measure the relative computation time (RCT) of each method."""
    _exit(runner.bench(output, config, list(methods) or None, repetitions, seconds, seed))


@main.command()
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), default=Path("./output"), help="Output directory")
@click.option("--gcis", "gci_path", type=click.Path(exists=True, path_type=Path), help="GCI list (.txt or .csv)")
@click.option("-m", "--method", type=METHOD_CHOICE, default="sedreams", help="Detector without --gcis")
@click.option("--f0-mean", type=float, help="Speaker mean f0 in Hz (estimated from the file if omitted)")
@click.option("--threshold", type=float, default=2700.0, show_default=True, help="CoG threshold in Hz")
@click.option("--window-factor", type=float, default=2.0, show_default=True, help="Frame length in local periods")
@click.option(
    "--window",
    type=click.Choice([w.value for w in WindowShape]),
    default=WindowShape.BLACKMAN.value,
    show_default=True,
    help="Frame window shape",
)
@click.option("--sweep", "sweep_factors", type=float, multiple=True, help="Also sweep these window factors")
@click.option("--plots", is_flag=True, help="Also write the CoG histogram")
@click.pass_obj
def decompose(
    runner: CliRunner,
    input_path: Path,
    output: Path,
    gci_path: Path | None,
    method: str,
    f0_mean: float | None,
    threshold: float,
    window_factor: float,
    window: str,
    sweep_factors: tuple[float, ...],
    plots: bool,
) -> None:
    """Mixed-phase decomposition failure rate on GCI-synchronous frames."""
    settings = MixedPhaseSettings(window=WindowShape(window), window_factor=window_factor, cog_threshold_hz=threshold)
    _exit(runner.decompose(input_path, output, gci_path, method, f0_mean, settings, sweep_factors, plots))


@main.command()
@click.option(
    "-o", "--output", type=click.Path(path_type=Path), default=Path("./synthetic"), help="Output directory"
)
@click.option("--seconds", type=float, default=60.0, show_default=True, help="Total voiced duration")
@click.option("--utterance-seconds", type=float, default=2.0, show_default=True, help="Duration of each utterance")
@click.option("--f0", "f0s", type=float, multiple=True, help="Mean f0 values to cycle through (default 100/160/220)")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Generator seed")
@click.option("--larynx-delay", type=int, default=0, show_default=True, help="Speech delay behind the EGG in samples")
@click.pass_obj
def synthesize(
    runner: CliRunner,
    output: Path,
    seconds: float,
    utterance_seconds: float,
    f0s: tuple[float, ...],
    seed: int,
    larynx_delay: int,
) -> None:
    """Write a synthetic speech/EGG suite with a ready-to-run configuration."""
    _exit(runner.synthesize(output, seconds, utterance_seconds, f0s or DEFAULT_SUITE_F0_HZ, seed, larynx_delay))


if __name__ == "__main__":
    main()
