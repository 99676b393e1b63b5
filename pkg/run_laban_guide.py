#!/usr/bin/env python3

# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

# Command-line front end; run `./run_laban_guide.py --help` for the commands.

from laban_guide.cli import run


if __name__ == '__main__':

    run()
