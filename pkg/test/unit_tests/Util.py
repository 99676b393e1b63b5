# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import os
import stat

import unit_tests

from unit_tests import temp_folder

from laban_guide.util import atomic_write, derive_seed


def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


class AtomicWriteUsesUmask(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            filename = os.path.join(folder, 'nested', 'out.csv')
            with atomic_write(filename) as fd:
                fd.write('a,b\n')
            mode = stat.S_IMODE(os.stat(filename).st_mode)
            assert mode == 0o666 & ~_umask(), oct(mode)
            with open(filename) as fd:
                assert fd.read() == 'a,b\n'
            assert os.listdir(os.path.dirname(filename)) == ['out.csv']


class AtomicWriteKeepsOldFileOnError(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            filename = os.path.join(folder, 'out.txt')
            with atomic_write(filename) as fd:
                fd.write('first')
            try:
                with atomic_write(filename) as fd:
                    fd.write('second')
                    raise ValueError('interrupted')
            except ValueError:
                pass
            with open(filename) as fd:
                assert fd.read() == 'first'
            assert os.listdir(folder) == ['out.txt']


class DerivedSeedsAreStable(unit_tests.LabanTest):
    def run(self):
        assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
        assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
        assert derive_seed(1, 1, 2) != derive_seed(0, 1, 2)
