"""
Face Reenactment - Command Line
Align faces, build synthetic data, train, reenact and evaluate.
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional, Sequence

import click
import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# ACTGAN_* settings may come from .env
load_dotenv()

from data import (
    build_synthetic_manifest,
    image_to_tensor,
    load_image,
    load_manifest,
    save_image,
    tensor_to_image,
    triptych,
)
from extractors import build_extractor
from geometry import AnchorTemplate, align_face, normalize_face, read_landmarks, write_landmarks
from settings import (
    RuntimeSettings,
    TrainingConfig,
    apply_overrides,
    config_digest,
    configure_logging,
    load_config,
    with_epochs,
)
from utils.reproducibility import configure_torch

logger = logging.getLogger(__name__)

console = Console()

app = typer.Typer(
    name="actgan",
    help="One-shot face reenactment: alignment, training, reenactment and evaluation",
    add_completion=False,
)

EXIT_USAGE = 1
EXIT_RUNTIME = 2


@contextmanager
def runtime_errors():
    """Report domain failures on the console and exit with code 2."""
    try:
        yield
    except (ValueError, RuntimeError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        logger.debug("Command failed", exc_info=True)
        raise typer.Exit(EXIT_RUNTIME)


def resolve_config(config: Optional[Path], overrides: Sequence[str], seed: Optional[int] = None,
                   base: Optional[TrainingConfig] = None) -> TrainingConfig:
    """--config file (or `base`), then --set overrides, then --seed, threaded to the scenario too."""
    cfg = load_config(config) if config is not None or base is None else base
    cfg = apply_overrides(cfg, overrides)
    if seed is not None:
        cfg = apply_overrides(cfg, [f"seed={seed}", f"scenario.seed={seed}"])
    return cfg


def show_digest(cfg: TrainingConfig):
    console.print(f"[cyan]config digest:[/cyan] {config_digest(cfg)}")


ConfigOption = typer.Option(None, "--config", "-c", help="YAML or key = value config file")
SetOption = typer.Option([], "--set", help="Override a config key, e.g. --set losses.content=0.1")
SeedOption = typer.Option(None, "--seed", help="Seed for every random stream")


@app.command()
def align(
    input: Path = typer.Option(..., "--input", "-i", help="Face image (PNG)"),
    landmarks: Path = typer.Option(..., "--landmarks", "-l", help="Landmark JSON of the image"),
    out: Path = typer.Option(..., "--out", "-o", help="Output crop (PNG)"),
    size: int = typer.Option(256, "--size", help="Crop side N"),
    landmarks_out: Optional[Path] = typer.Option(None, "--landmarks-out", help="Output landmarks (default: next to --out)"),
    config: Optional[Path] = ConfigOption,
    overrides: List[str] = SetOption,
    seed: Optional[int] = SeedOption,
):
    """Normalize a face to the anchor template and report the anchor residual."""
    with runtime_errors():
        cfg = resolve_config(config, overrides, seed)
        show_digest(cfg)
        template = AnchorTemplate.from_fractions(cfg.geometry.template, size)
        result = align_face(load_image(input), read_landmarks(landmarks), template, cfg.geometry.anchor_tolerance)
        save_image(out, result.image)
        write_landmarks(landmarks_out or out.with_suffix(".json"), result.landmarks)

    console.print(f"[green]Aligned[/green] {input} -> {out} ({size}x{size})")
    console.print(f"anchor residual: {result.residual:.4f} px")


@app.command()
def synth(
    out: Path = typer.Option(..., "--out", "-o", help="Dataset directory"),
    identities: Optional[int] = typer.Option(None, "--identities", help="Number of identities"),
    expressions: Optional[int] = typer.Option(None, "--expressions", help="Expressions per identity"),
    size: Optional[int] = typer.Option(None, "--size", help="Image side in pixels"),
    pose_jitter: Optional[float] = typer.Option(None, "--pose-jitter", help="0 = frontal, 1 = full jitter"),
    config: Optional[Path] = ConfigOption,
    overrides: List[str] = SetOption,
    seed: Optional[int] = SeedOption,
):
    """Render a synthetic face dataset with exact landmarks."""
    with runtime_errors():
        cfg = resolve_config(config, overrides, seed)
        show_digest(cfg)
        settings = cfg.synthetic
        manifest = build_synthetic_manifest(
            identities if identities is not None else settings.identities,
            expressions if expressions is not None else settings.expressions,
            out,
            seed=cfg.seed,
            size=size if size is not None else settings.size,
            pose_jitter=pose_jitter if pose_jitter is not None else settings.pose_jitter,
        )

    table = Table(title="Synthetic dataset")
    table.add_column("Entries", style="cyan")
    table.add_column("Identities", style="green")
    table.add_column("Manifest", style="yellow")
    table.add_row(str(len(manifest)), str(len(manifest.identities)), str(out / "manifest.jsonl"))
    console.print(table)


@app.command()
def train(
    manifest: Path = typer.Option(..., "--manifest", "-m", help="manifest.jsonl or its directory"),
    out: Path = typer.Option(..., "--out", "-o", help="Run directory (checkpoint + loss log)"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Override total_epochs"),
    resume: Optional[Path] = typer.Option(None, "--resume", help="Checkpoint directory to continue from"),
    config: Optional[Path] = ConfigOption,
    overrides: List[str] = SetOption,
    seed: Optional[int] = SeedOption,
):
    """Train generator and discriminator on a manifest."""
    from training.trainer import train as run_training

    with runtime_errors():
        cfg = resolve_config(config, overrides, seed)
        if epochs is not None:
            cfg = with_epochs(cfg, epochs)
        show_digest(cfg)
        dataset = load_manifest(manifest)
        state, log = run_training(dataset, cfg, output_dir=out, resume_from=resume)

    means = state.running.means
    table = Table(title=f"Training finished: epoch {state.epoch}, step {state.step}")
    table.add_column("Term", style="cyan")
    table.add_column("Mean", justify="right", style="green")
    for term, value in means.items():
        table.add_row(term, f"{value:.5f}")
    console.print(table)
    console.print(f"[cyan]Checkpoint:[/cyan] {out / 'checkpoint'}  [cyan]Loss log:[/cyan] {out / 'loss_log.csv'}")


@app.command()
def reenact(
    source: Path = typer.Option(..., "--source", "-s", help="Expression donor image"),
    source_landmarks: Path = typer.Option(..., "--source-landmarks", help="Landmark JSON of the source"),
    target: Path = typer.Option(..., "--target", "-t", help="Identity donor image"),
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Checkpoint directory"),
    out: Path = typer.Option(..., "--out", "-o", help="Generated image (PNG)"),
    target_landmarks: Optional[Path] = typer.Option(None, "--target-landmarks", help="Landmark JSON of the target"),
    align_inputs: bool = typer.Option(False, "--align", help="Normalize both inputs first"),
    write_triptych: bool = typer.Option(False, "--triptych", help="Also write target | output | source"),
    config: Optional[Path] = ConfigOption,
):
    """Reenact the target with the source's expression."""
    from training.checkpoint import load_generator

    with runtime_errors():
        expected = load_config(config) if config is not None else None
        generator, cfg = load_generator(checkpoint, expected)
        show_digest(cfg)
        src, tgt = load_image(source), load_image(target)
        if align_inputs:
            if target_landmarks is None:
                raise ValueError("--align needs --target-landmarks")
            template = cfg.geometry.anchor_template()
            src, _ = normalize_face(src, read_landmarks(source_landmarks), template, cfg.geometry.anchor_tolerance)
            tgt, _ = normalize_face(tgt, read_landmarks(target_landmarks), template, cfg.geometry.anchor_tolerance)

        import torch

        with torch.no_grad():
            generated = tensor_to_image(generator(image_to_tensor(src), image_to_tensor(tgt)))
        save_image(out, generated)
        if write_triptych:
            save_image(out.with_name(f"{out.stem}_triptych.png"), triptych([tgt, generated, src]))

    console.print(f"[green]Reenacted[/green] -> {out}")


@app.command()
def evaluate(
    manifest: Path = typer.Option(..., "--manifest", "-m", help="manifest.jsonl or its directory"),
    report: Path = typer.Option(Path("report.json"), "--report", "-r", help="Output EvalReport JSON"),
    checkpoint: Optional[Path] = typer.Option(None, "--checkpoint", help="Checkpoint directory"),
    identity: bool = typer.Option(False, "--identity", help="Evaluate the identity-on-target baseline"),
    pairs: Optional[str] = typer.Option(None, "--pairs", help="self | scenario"),
    num_pairs: Optional[int] = typer.Option(None, "--num-pairs", help="Number of pairs"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Evaluation threads"),
    show_reference: bool = typer.Option(False, "--show-reference", help="Also print the published reference numbers"),
    config: Optional[Path] = ConfigOption,
    overrides: List[str] = SetOption,
    seed: Optional[int] = SeedOption,
):
    """Compute NMSE, CSIM and FID over generated pairs."""
    from evaluation import (
        IdentityGenerator,
        build_eval_pairs,
        evaluate_pairs,
        reference_detector,
        reference_table,
        render_table,
    )
    from training.checkpoint import load_generator

    with runtime_errors():
        if not identity and checkpoint is None:
            raise ValueError("evaluate needs --checkpoint or --identity")
        if identity:
            generator, base = IdentityGenerator(), None
        else:
            generator, base = load_generator(checkpoint)
            if config is not None:
                generator, _ = load_generator(checkpoint, load_config(config))

        cfg = resolve_config(config, overrides, seed, base=base)
        evaluation = cfg.evaluation.model_copy(update={
            key: value
            for key, value in {"pairs": pairs, "num_pairs": num_pairs, "workers": workers}.items()
            if value is not None
        })
        cfg = cfg.model_copy(update={"evaluation": type(evaluation).model_validate(evaluation.model_dump())})
        show_digest(cfg)

        dataset = load_manifest(manifest)
        template = cfg.geometry.anchor_template() if cfg.geometry.align else None
        tolerance = cfg.geometry.anchor_tolerance
        eval_pairs = build_eval_pairs(
            dataset, template, cfg.evaluation.pairs, cfg.evaluation.num_pairs, cfg.scenario, tolerance
        )
        ext = cfg.extractors
        result = evaluate_pairs(
            eval_pairs,
            generator,
            reference_detector(dataset, template, tolerance),
            build_extractor(ext.identity, seed=ext.seed, embedding_dim=ext.embedding_dim,
                            pretrained=ext.pretrained, role="identity"),
            build_extractor(ext.fid, seed=ext.seed, embedding_dim=ext.embedding_dim, pretrained=ext.pretrained),
            scenario="self" if cfg.evaluation.pairs == "self" else cfg.scenario.kind.value,
            workers=cfg.evaluation.workers,
        )
        result.save(report)

    console.print(render_table(result))
    if show_reference:
        console.print(reference_table())
    console.print(f"[cyan]Report:[/cyan] {report}")


@app.command()
def show_config(
    config: Optional[Path] = ConfigOption,
    overrides: List[str] = SetOption,
    seed: Optional[int] = SeedOption,
):
    """Print the resolved configuration in key = value form."""
    from settings import dump_flat

    with runtime_errors():
        cfg = resolve_config(config, overrides, seed)
        show_digest(cfg)
    console.print(Panel(dump_flat(cfg).rstrip(), title="Resolved configuration", border_style="cyan"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit code.

    0 on success, 1 for usage errors (unknown flags, missing options),
    2 for runtime errors (bad geometry, empty manifest, checkpoint mismatch).
    """
    runtime = RuntimeSettings()
    configure_logging(runtime.log_level)
    configure_torch(runtime.num_threads, runtime.deterministic)
    try:
        rv = app(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    raise SystemExit(main())
