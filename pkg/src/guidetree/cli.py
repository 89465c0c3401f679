"""Command line interface.

Commands cover the offline half of the toolchain (validating trees,
scoring transcripts, comparing trial groups, planning group sizes) and
starting the HTTP service.
"""

from __future__ import annotations

from pathlib import Path

import click

from . import __version__
from .criteria import MAX_SCORE, CatalogError, Phase, score_transcript
from .fileformat import (
    FormatError,
    canonical_dumps,
    load_case,
    load_dataset,
    load_patients,
    load_transcript,
    load_tree,
    load_trees,
    write_canonical,
)
from .stats import sample_size_per_group
from .store import ActionStore
from .trial import TrialError, build_report


def _fail(exc: Exception) -> "click.ClickException":
    return click.ClickException(str(exc))


@click.group()
@click.version_option(version=__version__, prog_name="guidetree")
def main() -> None:
    """Decision-tree navigation, trial scoring and the HTTP service."""


@main.command()
@click.argument("tree_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(tree_file: Path) -> None:
    """Check a tree file and list every structural problem found."""
    from .model import validate_tree

    try:
        tree = load_tree(tree_file, validate=False)
    except FormatError as exc:
        raise _fail(exc) from None
    report = validate_tree(tree)
    if not report:
        click.echo(f"OK: {tree.id!r} ({len(tree.nodes)} nodes, {len(tree.edges)} edges)")
        return
    for issue in report:
        where = issue.node or (f"{issue.edge[0]}->{issue.edge[1]}" if issue.edge else "-")
        click.echo(f"{issue.code}: {where}: {issue.message}")
    raise SystemExit(1)


@main.command()
@click.option("--case", "case_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Case file with the gold answers.")
@click.option("--transcript", "transcript_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Transcript file with one participant's answers.")
def score(case_path: Path, transcript_path: Path) -> None:
    """Score one transcript against its case (one point per criterion)."""
    try:
        case = load_case(case_path)
        transcript = load_transcript(transcript_path)
        card = score_transcript(case, transcript)
    except (FormatError, CatalogError) as exc:
        raise _fail(exc) from None
    payload = {
        "format_version": 1,
        "case": case.id,
        "participant": transcript.participant,
        "group": transcript.group,
        "total": card.total,
        "max_score": MAX_SCORE,
        "phases": {phase.value: card.phase_totals[phase] for phase in Phase},
        "criteria": dict(card.per_criterion),
    }
    click.echo(canonical_dumps(payload), nl=False)


@main.command()
@click.option("--dataset", "dataset_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Dataset directory: cases/*.case.json plus transcripts/*.json "
                   "(or both file kinds in one flat directory).")
@click.option("--pair", "pairs", multiple=True, required=True,
              help="Comparison LEFT:RIGHT over group labels, e.g. A:B or AB:C.")
@click.option("--alpha", default=0.05, show_default=True,
              help="Family-wise significance level.")
@click.option("--bonferroni", "comparisons", default=MAX_SCORE, show_default=True,
              help="Number of comparisons the threshold corrects for.")
@click.option("--out", "out_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Write the report here instead of stdout.")
@click.option("--tidy", "tidy_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Also write the long-format observations as CSV.")
def compare(dataset_dir: Path, pairs: tuple[str, ...], alpha: float,
            comparisons: int, out_path: Path | None, tidy_path: Path | None) -> None:
    """Compare trial groups with Welch t-tests and a Bonferroni threshold."""
    try:
        cases, transcripts = load_dataset(dataset_dir)
        report = build_report(
            transcripts, cases, list(pairs), alpha=alpha, comparisons=comparisons)
    except (FormatError, CatalogError, TrialError, ValueError) as exc:
        raise _fail(exc) from None
    if tidy_path is not None:
        _write_tidy_csv(tidy_path, report["tidy"])
    if out_path is None:
        click.echo(canonical_dumps(report), nl=False)
        return
    write_canonical(out_path, report)
    click.echo(f"wrote {out_path}")
    click.echo(f"threshold: p < {report['threshold']:.3g} "
               f"(alpha={alpha}, corrected for {comparisons} comparisons)")
    header = f"{'comparison':<14} {'mean L':>7} {'mean R':>7} {'p':>9}  flagged"
    click.echo(header)
    click.echo("-" * len(header))
    for pair in report["pairs"]:
        total = pair["total"]
        p_text = "n/a" if total["p"] is None else f"{total['p']:.3g}"
        click.echo(
            f"{pair['label']:<14} {total['mean_left']:>7.2f} "
            f"{total['mean_right']:>7.2f} {p_text:>9}  "
            f"{', '.join(pair['flagged']) or '-'}")


def _write_tidy_csv(path: Path, rows: list[dict]) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["participant", "case", "group", "criterion", "score"])
        writer.writeheader()
        writer.writerows(rows)


@main.command()
@click.option("--alpha", default=0.05, show_default=True,
              help="Two-sided significance level.")
@click.option("--power", default=0.8, show_default=True, help="Target power.")
@click.option("--delta", required=True, type=float,
              help="Smallest mean difference worth detecting.")
@click.option("--sd", required=True, type=float,
              help="Expected standard deviation within a group.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
def samplesize(alpha: float, power: float, delta: float, sd: float, as_json: bool) -> None:
    """Participants per group for a two-sample comparison of means."""
    try:
        n = sample_size_per_group(alpha=alpha, power=power, delta=delta, sd=sd)
    except ValueError as exc:
        raise _fail(exc) from None
    note = ("normal-approximation bound; deliberately conservative, so other "
            "planning conventions can quote somewhat smaller groups (for "
            "example 60 where this reports 63) for the same inputs")
    if as_json:
        payload = {
            "format_version": 1,
            "alpha": alpha,
            "power": power,
            "delta": delta,
            "sd": sd,
            "per_group": n,
            "total_two_groups": 2 * n,
            "note": note,
        }
        click.echo(canonical_dumps(payload), nl=False)
        return
    click.echo(f"{n} participants per group ({2 * n} for two groups)")
    click.echo(f"normal approximation, two-sided alpha={alpha}, power={power}, "
               f"delta={delta}, sd={sd}")
    click.echo(f"note: {note}")


def _parse_listen(listen: str) -> tuple[str, int]:
    host, sep, port_text = listen.rpartition(":")
    if not sep or not host:
        raise click.ClickException(f"--listen must look like HOST:PORT, got {listen!r}")
    host = host.strip("[]")
    try:
        port = int(port_text)
    except ValueError:
        raise click.ClickException(f"port {port_text!r} is not a number") from None
    if not 1 <= port <= 65535:
        raise click.ClickException(f"port {port} is out of range")
    return host, port


@main.command()
@click.option("--trees", "trees_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory holding *.tree.json files.")
@click.option("--data", "data_dir", default=None,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Optional directory with demo *.patient.json records.")
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="Address to bind, HOST:PORT.")
@click.option("--static", "static_dir", default=None,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Optional directory with the built web client.")
@click.option("--db", "db_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="SQLite file for the session log; in-memory when omitted.")
def serve(trees_dir: Path, data_dir: Path | None, listen: str,
          static_dir: Path | None, db_path: Path | None) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    try:
        trees = load_trees(trees_dir)
        patients = load_patients(data_dir) if data_dir else {}
    except FormatError as exc:
        raise _fail(exc) from None
    if not trees:
        raise click.ClickException(f"no *.tree.json files in {trees_dir}")
    host, port = _parse_listen(listen)
    store = ActionStore(db_path if db_path else ":memory:")
    app = create_app(trees, store, patients=patients, static_dir=static_dir)
    click.echo(f"serving {len(trees)} tree(s) on http://{listen}/")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
