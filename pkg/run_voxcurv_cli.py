#!/usr/bin/env python3

import sys

from voxcurv.command_line_interface import main

"""Digital curvatures of voxel objects. Call "help" for an explanation of available commands.

Usage:
    run_voxcurv_cli.py analyze <input> [--format text|raw] [--six]
    run_voxcurv_cli.py curvmap <input> [--kind gauss|meanabs] [--axis x|y|z|volume] [--level <k>]
                                       [--out <path>] [--format csv|pgm]
    run_voxcurv_cli.py pyramid <input> [--kind gauss|meanabs] [--axis x|y|z|volume] --levels <L> --out <dir>
    run_voxcurv_cli.py compare <input_a> <input_b> [--metric euclid|sq|minkowski:<p>]
    run_voxcurv_cli.py matrix <inputs>... [--list <file>] [--metric ...] [--out <csv>] [--vectors-json <file>]
    run_voxcurv_cli.py gen <shape spec> [--out <path>] [--format text|raw]
    run_voxcurv_cli.py help

Options shared by every command:
    --threads <n>           Worker count for corner classification, map building and distance matrices.
                            Falls back to the VOXCURV_THREADS environment variable, then to the number of cores.
                            Outputs do not depend on it.
    -v --verbose            Debug output on standard error.
    -l --log <name>         Also write the log to a dated file.

Exit codes: 0 success, 2 usage or input error, 3 internal consistency failure.
"""

if __name__ == '__main__':
    sys.exit(main())
