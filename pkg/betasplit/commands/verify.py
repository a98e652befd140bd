"""verify subcommand: cross-method suites written to the report directory"""
import argparse
import logging

from commands.common import emit
from config import Config
from services.report_generator import ReportGenerator
from services.verify import SUITES, run_suite

logger = logging.getLogger(__name__)

VERIFY_FAILED = 3


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('verify', help='run a verification suite')
    parser.add_argument('--suite', choices=SUITES, required=True)
    parser.add_argument('--out-dir', default=Config.REPORT_DIR)
    parser.set_defaults(handler=verify_handler)


def verify_handler(args: argparse.Namespace) -> int:
    report = run_suite(args.suite, threads=args.threads)
    paths = ReportGenerator(args.out_dir).generate_report_all_formats(report)
    emit({
        'suite': report.suite,
        'passed': report.passed,
        'rows': len(report.rows),
        'failed': [row.quantity for row in report.failed_rows()],
        'files': paths,
    })
    if not report.passed:
        logger.error("verify suite %s failed", args.suite)
        return VERIFY_FAILED
    return 0
