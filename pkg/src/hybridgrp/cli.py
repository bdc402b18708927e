"""Command-line front end.

Thin client over the service handlers, run in-process (no HTTP hop, so
bench timings measure the library, not the transport).  Groups are named
by `--group`: either a JSON definition file or a fixture name (F1..F6).

Exit codes: 0 success, 1 usage/parse error, 2 validation failure,
3 resource limit exceeded.
"""

from __future__ import annotations

import json
import sys

import click

from .build import BuildError, fixtures, load_group_file
from .hybrid import HybridError
from .pc import PcError
from .perm import PermError
from .rws import CompletionLimitExceeded
from . import service
from .service import (
    LIMIT_ERROR,
    PARSE_ERROR,
    ServiceError,
    VALIDATION_ERROR,
)


class CliError(click.ClickException):
    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


def _load_group(spec: str):
    if spec in fixtures():
        return fixtures()[spec].group
    try:
        return load_group_file(spec)
    except FileNotFoundError:
        raise CliError(f"no such group file or fixture: {spec}", PARSE_ERROR)
    except BuildError as exc:
        code = VALIDATION_ERROR if "validation" in str(exc) else PARSE_ERROR
        raise CliError(str(exc), code)
    except CompletionLimitExceeded as exc:
        raise CliError(str(exc), LIMIT_ERROR)


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ServiceError as exc:
        raise CliError(str(exc), exc.code)
    except (HybridError, PcError, PermError) as exc:
        raise CliError(str(exc), PARSE_ERROR)


group_option = click.option("--group", "group_spec", required=True,
                            help="group definition file or fixture name F1..F6")


@click.group()
def main():
    """Arithmetic, subgroup queries, validation, and benchmarks for hybrid
    group representations (permutation factor over a polycyclic normal
    subgroup)."""


@main.command()
@click.argument("definition", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="write the built group artifact (definition + cache manifest)")
def build(definition, output):
    """Build and validate a group from a definition file."""
    group = _load_group(definition)
    summary = _run(service.h_build, service.group_to_dict(group))
    if output:
        artifact = dict(summary["definition"])
        artifact["caches"] = group.build_caches()
        with open(output, "w") as fh:
            json.dump(artifact, fh, indent=2)
            fh.write("\n")
    click.echo(
        f"name: {summary['name'] or '(unnamed)'}  order: {summary['order']}  "
        f"|B|: {summary['b_order']}  factor order: {summary['factor_order']}  "
        f"factor degree: {summary['factor_degree']}  rules: {summary['rules']}"
    )


@main.command("eval")
@group_option
@click.argument("expression")
@click.option("--order", "want_order", is_flag=True, help="also print the element order")
@click.option("--image", "want_image", is_flag=True, help="also print the nu-image permutation")
def eval_cmd(group_spec, expression, want_order, want_image):
    """Evaluate an expression over element literals ("x1*x2 | y1^1") with
    *, ^k, ^-1, and parentheses."""
    out = _run(service.h_eval, _load_group(group_spec), expression,
               want_order, want_image)
    click.echo(out["element"])
    if want_order:
        click.echo(f"order: {out['order']}")
    if want_image:
        click.echo(f"image: {out['image']}")


@main.command()
@group_option
@click.argument("element", required=False)
def order(group_spec, element):
    """Order of the group, or of ELEMENT if given."""
    out = _run(service.h_order, _load_group(group_spec), element)
    click.echo(str(out["order"]))


@main.command()
@group_option
@click.option("--op", type=click.Choice(["order", "contains", "transversal"]),
              default="order", show_default=True)
@click.option("--element", help="query element for --op contains")
@click.option("--u", "u_generators", multiple=True,
              help="generators of U for --op transversal (repeatable)")
@click.argument("generators", nargs=-1, required=True)
def subgroup(group_spec, op, element, u_generators, generators):
    """Subgroup queries for S = <GENERATORS>."""
    out = _run(service.h_subgroup, _load_group(group_spec), list(generators),
               op, element, list(u_generators))
    if op == "order":
        click.echo(str(out["order"]))
    elif op == "contains":
        click.echo("true" if out["contains"] else "false")
    else:
        click.echo(f"index: {out['index']}")


@main.command()
@group_option
@click.option("--s", "s_generators", multiple=True, required=True,
              help="generators of S (repeatable)")
@click.option("--u", "u_generators", multiple=True, required=True,
              help="generators of U (repeatable)")
def transversal(group_spec, s_generators, u_generators):
    """Right transversal of U in S with coset representatives."""
    out = _run(service.h_transversal, _load_group(group_spec),
               list(s_generators), list(u_generators))
    click.echo(f"index: {out['index']}")
    for i, rep in enumerate(out["representatives"], 1):
        click.echo(f"{i}: {rep}")


@main.command()
@group_option
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="write the quotient group definition")
@click.argument("n_generators", nargs=-1, required=True)
def factor(group_spec, output, n_generators):
    """Factor group G/N for N = <N_GENERATORS> contained in B."""
    out = _run(service.h_factor, _load_group(group_spec), list(n_generators))
    click.echo(f"order: {out['order']}  |B/N|: {out['b_order']}")
    if output:
        with open(output, "w") as fh:
            json.dump(out["definition"], fh, indent=2)
            fh.write("\n")


@main.command()
@group_option
@click.option("--strict", is_flag=True, help="force exhaustive associativity checks")
@click.option("--samples", default=10_000, show_default=True)
@click.option("--seed", default=12345, show_default=True)
def validate(group_spec, strict, samples, seed):
    """Run the empirical validation suite; exit 2 on any failure."""
    spec = group_spec if group_spec in fixtures() else _load_group(group_spec)
    out = _run(service.h_validate, spec, strict, samples, seed)
    for check in out["checks"]:
        mark = "ok" if check["ok"] else "FAIL"
        line = f"{mark:4} {check['name']}"
        if not check["ok"] and check["witness"]:
            line += f"  witness: {check['witness']}"
        click.echo(line)
    if not out["overall"]:
        raise CliError("validation failed", VALIDATION_ERROR)
    click.echo("overall: ok")


@main.command()
@group_option
@click.option("--ops", default="mul,inv", show_default=True,
              help="comma-separated: mul, inv, order, subgroup-order")
@click.option("--samples", default=1000, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--log-ops", is_flag=True, help="emit the sampled operation sequence")
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="also write the machine-readable report")
def bench(group_spec, ops, samples, seed, log_ops, output):
    """Benchmark core operations; prints a timing table plus key=value lines."""
    report = _run(service.h_bench, _load_group(group_spec),
                  tuple(t.strip() for t in ops.split(",") if t.strip()),
                  samples, seed, log_ops)
    click.echo(report.table())
    for line in report.machine_lines():
        click.echo(line)
    if log_ops:
        for line in report.op_log:
            click.echo(f"oplog {line}")
    if output:
        with open(output, "w") as fh:
            fh.write("\n".join(report.machine_lines()) + "\n")


@main.command()
@click.argument("presentation", type=click.Path(exists=True, dir_okay=False))
@click.option("--limit-rules", default=10_000, show_default=True,
              help="abort completion beyond this many rules (exit 3)")
def complete(presentation, limit_rules):
    """Knuth-Bendix completion of a presentation file."""
    with open(presentation) as fh:
        text = fh.read()
    out = _run(service.h_complete, text, limit_rules)
    click.echo(out["rules"])
    click.echo(f"rules: {out['rule_count']}  confluent: {out['confluent']}")


@main.command("check-confluence")
@click.argument("rules_file", type=click.Path(exists=True, dir_okay=False))
def check_confluence(rules_file):
    """Confluence check of a rules file; exit 2 with a witness if not."""
    with open(rules_file) as fh:
        text = fh.read()
    out = _run(service.h_check_confluence, text)
    if out["confluent"]:
        click.echo("confluent")
    else:
        raise CliError(f"not confluent; witness word {out['witness']}", VALIDATION_ERROR)


def entry():
    try:
        main(standalone_mode=False)
    except CliError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(PARSE_ERROR)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(PARSE_ERROR)
    except click.exceptions.Abort:
        sys.exit(PARSE_ERROR)


if __name__ == "__main__":
    entry()
