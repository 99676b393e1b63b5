# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import datetime
import logging
import os
import shutil
import sys
import tempfile

from contextlib import contextmanager

import numpy


# Process umask, read once; mkstemp files start at 0600.
_UMASK = os.umask(0)
os.umask(_UMASK)


@contextmanager
def atomic_write(path, mode='w'):
    """
    Context manager yielding a file object that replaces `path` only once the
    block exits cleanly. A failed write leaves any previous file untouched; a
    finished file gets the usual permissions under the process umask.
    """
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(folder):
        os.makedirs(folder)
    handle, temp_path = tempfile.mkstemp(dir=folder, prefix='.tmp_')
    newline = '' if 'b' not in mode else None
    try:
        with os.fdopen(handle, mode, newline=newline) as fd:
            yield fd
        os.chmod(temp_path, 0o666 & ~_UMASK)
        os.replace(temp_path, path)
    finally:
        if os.path.exists(temp_path):
            os.remove(temp_path)


def derive_seed(master_seed, *keys):
    """Deterministic child seed for (master, key...), independent of hash salting."""
    sequence = numpy.random.SeedSequence([int(master_seed)] + [int(k) for k in keys])
    return int(sequence.generate_state(1, dtype=numpy.uint32)[0])


def configure_logging(debug=False, log_file=None):
    level_name = os.environ.get('LABAN_GUIDE_LOG')
    if debug:
        level = logging.DEBUG
    elif level_name:
        level = logging.getLevelName(level_name.upper())
        if not isinstance(level, int):
            level = logging.INFO
    else:
        level = logging.INFO
    logging_config = {
        'format': '%(levelname)s: %(message)s',
        'level': level
    }
    if log_file:
        logging_config['filename'] = log_file
        logging_config['filemode'] = 'w+'
    logging.basicConfig(**logging_config)


class StopWatch(object):
    def __init__(self):
        self.start = datetime.datetime.now()
        self.end = None

    def restart(self):
        self.start = datetime.datetime.now()
        self.end = None

    def stop(self):
        self.end = datetime.datetime.now()

    def seconds(self):
        return (self.end - self.start).total_seconds()

    def milliseconds(self):
        return 1000.0 * self.seconds()


def print_over_same_line(text):
    terminal_width = shutil.get_terminal_size((80, 20)).columns
    empty_space = max(0, terminal_width - len(text))
    sys.stdout.write('\r' + text + empty_space * ' ')
    sys.stdout.flush()
