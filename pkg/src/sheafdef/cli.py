"""Command-line front: a thin client over the same pipeline layer the
service exposes.

Documents come from --input FILE or stdin; `sheafdef examples NAME` prints a
ready document, so pipelines compose:

    sheafdef examples p1-tangent | sheafdef deform-sheaf --base "k[t]/(t^3)"

Exit codes: 0 success, 1 validation failure, 2 truncation/stabilization
failure.
"""

from __future__ import annotations

import argparse
import sys

from .docio import DocumentError, load_document
from .pipelines import (COMMANDS, EXAMPLES, Options, run_command,
                        run_examples)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheafdef",
        description="exact-arithmetic workbench for Cech cohomology and "
                    "dg Lie deformation theory on finite sites")
    sub = parser.add_subparsers(dest="command", required=True)

    examples = sub.add_parser("examples", help="print a built-in example document")
    examples.add_argument("name", choices=sorted(EXAMPLES))
    examples.add_argument("--window", type=int, default=4,
                          help="Laurent window size for the windowed models")
    examples.add_argument("--twist", type=int, default=-2,
                          help="twist degree for p1-twist")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    for name in sorted(COMMANDS):
        cmd = sub.add_parser(name)
        cmd.add_argument("--input", help="workbench document (default: stdin)")
        cmd.add_argument("--format", choices=("text", "structured"),
                         default="text")
        cmd.add_argument("--target", help="block the command operates on")
        cmd.add_argument("--presheaf")
        cmd.add_argument("--hypercover")
        cmd.add_argument("--algebra")
        cmd.add_argument("--element")
        cmd.add_argument("--gauge")
        cmd.add_argument("--group-action", dest="group_action")
        cmd.add_argument("--base", help="artinian base: block name or k[t]/(t^n)")
        cmd.add_argument("--mode", default="auto",
                         choices=("auto", "alternating", "normalized", "site"))
        cmd.add_argument("--cap", type=int)
        cmd.add_argument("--max-cap", dest="max_cap", type=int, default=6)
        cmd.add_argument("--degree", type=int, default=0)
        cmd.add_argument("--n-max", dest="n_max", type=int, default=3)
        cmd.add_argument("--top", type=int, default=2)
        cmd.add_argument("--window", type=int, default=4)
        cmd.add_argument("--registry", nargs="*",
                         help="restrict the hypercover registry to these names")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "examples":
        name = args.name
        if name == "p1-twist":
            name = f"p1-twist:{args.twist}"
        sys.stdout.write(run_examples(name, window=args.window))
        return 0
    if args.command == "serve":
        import uvicorn
        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    try:
        if args.input:
            with open(args.input, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = sys.stdin.read()
        doc = load_document(text)
    except (DocumentError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    options = Options(
        target=args.target, presheaf=args.presheaf,
        hypercover=args.hypercover, algebra=args.algebra,
        element=args.element, gauge=args.gauge,
        group_action=args.group_action, base=args.base, mode=args.mode,
        cap=args.cap, max_cap=args.max_cap, degree=args.degree,
        n_max=args.n_max, top=args.top, window=args.window,
        registry=args.registry)
    report = run_command(args.command, doc, options)
    sys.stdout.write(report.render(args.format))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
