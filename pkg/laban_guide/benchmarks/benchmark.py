# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import abc
import logging
import os

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

from ..errors import ConfigError, DegenerateBaselineError, EvaluationError
from ..util import derive_seed, print_over_same_line
from .metrics import ChangeMatrix, diversity_proxy, relative_change, write_report


# What a cell reports: scalars of the reference and large-tag runs, whether the
# large-tag run got closer to its target than the unguided baseline, and the
# large-tag motion (None when the cell was not generated).
Measurement = namedtuple('Measurement', 'f_small f_large loss_improved motion')

CellResult = namedtuple('CellResult', 'row condition_id repeat seed change measurement')


class Benchmark(object, metaclass=abc.ABCMeta):
    """
    Runs every (row, condition, repeat) cell of the experiments and aggregates
    the relative changes into a ChangeMatrix. Cells are independent and may
    run on `jobs` worker threads; each gets its seed from the master seed.
    """

    def __init__(self, name_to_save, master_seed=0, jobs=1, progress=False):
        if int(jobs) < 1:
            raise ConfigError('jobs must be at least 1, got %r' % (jobs,))
        self._base_name = name_to_save
        self._master_seed = int(master_seed)
        self._jobs = int(jobs)
        self._progress = progress
        self._experiments = self._build_experiments()
        self._results = []

    @property
    def experiments(self):
        return self._experiments

    @property
    def results(self):
        return self._results

    def cell_seed(self, experiment, condition_id, repeat):
        return derive_seed(self._master_seed, experiment.row, condition_id, repeat)

    def _run_cell(self, task):
        experiment, condition_id, repeat = task
        seed = self.cell_seed(experiment, condition_id, repeat)
        measurement = self._measure(experiment, condition_id, repeat, seed)
        try:
            change = relative_change(measurement.f_small, measurement.f_large)
        except DegenerateBaselineError as exception:
            logging.info('skipping %s cell (condition %s, repeat %s): %s',
                         experiment.id, condition_id, repeat, exception)
            change = None
        return CellResult(experiment.row, condition_id, repeat, seed, change, measurement)

    def change_matrix(self):
        tasks = [(experiment, c, r) for experiment in self._experiments for c, r in experiment.cells()]
        if not tasks:
            raise ConfigError('%s has no cells to evaluate' % self._base_name)
        logging.info('%s: %d cells on %d worker(s)', self._base_name, len(tasks), self._jobs)
        results = []
        if self._jobs == 1:
            for index, task in enumerate(tasks):
                results.append(self._run_cell(task))
                if self._progress:
                    print_over_same_line('cell %d/%d' % (index + 1, len(tasks)))
        else:
            with ThreadPoolExecutor(max_workers=self._jobs) as pool:
                # map yields in submission order.
                results = list(pool.map(self._run_cell, tasks))
        if self._progress:
            print('')
        self._results = results
        skipped = sum(1 for r in results if r.change is None)
        if skipped == len(results):
            raise EvaluationError('all %d evaluation cells were degenerate' % skipped)
        rows = [[] for _ in range(4)]
        for result in results:
            if result.change is not None:
                rows[result.row].append(result.change.tolist())
        matrix = ChangeMatrix.from_changes(rows, skipped)
        if matrix.single_run_rows:
            logging.warning('rows %s have a single run; their std is reported as 0',
                            ', '.join(matrix.single_run_rows))
        return matrix

    def report(self, matrix):
        improved = [r.measurement.loss_improved for r in self._results
                    if r.measurement.loss_improved is not None]
        motions = [r.measurement.motion for r in self._results if r.measurement.motion is not None]
        report = matrix.to_json()
        report.update(self._get_details())
        report['master_seed'] = self._master_seed
        report['loss_improved_rate'] = (float(sum(improved)) / len(improved)) if improved else None
        report['diversity'] = diversity_proxy(motions) if len(motions) >= 2 else None
        return report

    def benchmark(self, out_dir):
        """Evaluate, then write change_matrix.csv and report.json into `out_dir`."""
        matrix = self.change_matrix()
        report = self.report(matrix)
        if not os.path.isdir(out_dir):
            os.makedirs(out_dir)
        matrix.write_csv(os.path.join(out_dir, 'change_matrix.csv'))
        write_report(report, os.path.join(out_dir, 'report.json'))
        logging.info('%s diagonality %.4f over %d runs (%d skipped)',
                     self._base_name, report['diagonality'], matrix.n_runs, matrix.skipped)
        return matrix, report

    @abc.abstractmethod
    def _build_experiments(self):
        """
        Returns the experiments (rows) to be evaluated.
        Must be redefined in an inherited class.
        """

    @abc.abstractmethod
    def _measure(self, experiment, condition_id, repeat, seed):
        """
        Runs one cell.
        :returns a Measurement
        """

    @abc.abstractmethod
    def _get_details(self):
        """
        :return: a dict describing the evaluated configuration, merged into the report
        """
