#!/usr/bin/env python3

# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import argparse
import sys
from typing import List, Optional

from tabulate import tabulate

from src.report import TOLERANCE_COLUMN_PREFIX, read_rows, render_table


class ResultParser:
    """Re-renders a metrics/report CSV or a report.json as text tables."""

    def __init__(self, path: str, show_tolerances: bool = False):
        self.path = path
        self.show_tolerances = show_tolerances
        self.columns: List[str] = []
        self.rows: List[dict] = []
        self.summary: dict = {}

    def load_results(self) -> None:
        data = read_rows(self.path)
        self.columns = data['columns']
        self.rows = data['rows']
        self.summary = data['summary']
        if not self.show_tolerances:
            self.columns = [c for c in self.columns if not c.startswith(TOLERANCE_COLUMN_PREFIX)]

    def format_summary(self) -> str:
        lines = [render_table(self.columns, self.rows, title=f"{self.path} ({len(self.rows)} row(s))")]
        if self.summary:
            pairs = [[key, self.summary[key]] for key in sorted(self.summary)]
            lines.append(tabulate(pairs, headers=["Summary", "Value"], tablefmt="grid", disable_numparse=True) + "\n")
        return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description='Render toolkit reports as text tables')
    parser.add_argument('report_file', help='CSV or JSON report produced by run_abot.py')
    parser.add_argument('-o', '--output', help='Output file to save the text report (default: stdout)')
    parser.add_argument('--tolerances', action='store_true', help='Keep the tol_* columns')
    args = parser.parse_args(argv)

    result_parser = ResultParser(args.report_file, show_tolerances=args.tolerances)
    try:
        result_parser.load_results()
    except (OSError, ValueError) as e:
        print(f"Error reading {args.report_file}: {e}", file=sys.stderr)
        return 1

    text = result_parser.format_summary()
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text)
        print(f"Report saved to {args.output}")
    else:
        print(text, end="")
    return 0


if __name__ == '__main__':
    sys.exit(main())
