"""`phsums esum`: weighted persistence sum E_alpha^i of one barcode"""
import argparse

from worker.persistence import Barcode
from worker.statistics import e_alpha_sum

from .barcode import add_barcode_source, load_barcode
from .common import add_common, dump_json, write_output


def register(subparsers) -> None:
    parser = subparsers.add_parser("esum", help="Sum of (death - birth)^alpha over degree-i intervals")
    add_common(parser, out_help="Directory for the result file (default: stdout)")
    add_barcode_source(parser)
    parser.add_argument("--barcode", help="Barcode CSV (degree,birth,death) instead of a cloud")
    parser.add_argument("--alpha", type=float, default=1.0, help="Exponent alpha > 0")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if args.barcode:
        barcode = Barcode.read_csv(args.barcode)
        degree = args.degree if args.degree is not None else 0
    else:
        barcode, degree = load_barcode(args)

    value = e_alpha_sum(barcode, degree, args.alpha)
    result = {"degree": degree, "alpha": args.alpha, "e_alpha": value, "count": barcode.count(degree)}
    if args.format == "csv":
        text = "degree,alpha,e_alpha,count\n" + f"{degree},{args.alpha!r},{value!r},{result['count']}\n"
        write_output(text, args.out, "esum.csv")
    else:
        write_output(dump_json(result), args.out, "esum.json")
    return 0
