# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import json
import math
import os

import numpy

import unit_tests

from unit_tests import assert_raises, static_motion, temp_folder

from laban_guide import gradcheck, synthetic
from laban_guide.benchmarks.benchmark import Benchmark, Measurement
from laban_guide.benchmarks.controllability import EvaluationConfig, build_controllability
from laban_guide.benchmarks.experiment import Experiment
from laban_guide.benchmarks.metrics import (ChangeMatrix, compare_tc_fc, diagonality, diversity_proxy,
                                            published_matrices, read_change_matrix_csv,
                                            relative_change)
from laban_guide.errors import (ConfigError, DegenerateBaselineError, DimensionError, EvaluationError,
                                MotionError, UndefinedMetricError)
from laban_guide.guidance.guided import GuidanceConfig, generate_baseline, guided_sample
from laban_guide.guidance.tags import make_target, tags_to_scale
from laban_guide.laban import CHANNELS


class FixedBenchmark(Benchmark):
    """Four single-cell rows with canned scalars."""

    def __init__(self, measurements, **kwargs):
        self._measurements = measurements
        super(FixedBenchmark, self).__init__('fixed', **kwargs)

    def _build_experiments(self):
        experiments = []
        for row, channel in enumerate(CHANNELS):
            experiment = Experiment()
            experiment.set(Id=channel, Row=row, Conditions=[0], Repetitions=[0])
            experiments.append(experiment)
        return experiments

    def _measure(self, experiment, condition_id, repeat, seed):
        f_small, f_large = self._measurements[experiment.row]
        return Measurement(f_small, f_large, True, None)

    def _get_details(self):
        return {'method': 'fixed'}


class RelativeChangeExamples(unit_tests.LabanTest):
    def run(self):
        assert relative_change([2.0, 4.0, 1.0, 0.5], [3.0, 4.0, 0.5, 1.0]).tolist() == [0.5, 0.0, -0.5, 1.0]
        error = assert_raises(DegenerateBaselineError, relative_change, [1.0, 0.0, 1.0, 1.0], [1.0] * 4)
        assert 'time' in str(error) and error.exit_code == 4
        assert_raises(DimensionError, relative_change, [1.0] * 4, [1.0] * 3)


class DiagonalityExamples(unit_tests.LabanTest):
    def run(self):
        assert diagonality(numpy.eye(4)) == 1.0
        assert diagonality(numpy.ones((4, 4))) == 0.25
        matrix = numpy.random.default_rng(0).normal(0.0, 1.0, (4, 4))
        assert abs(diagonality(matrix) - diagonality(-3.5 * matrix)) < 1e-12
        assert 0.0 <= diagonality(matrix) <= 1.0
        assert_raises(UndefinedMetricError, diagonality, numpy.zeros((4, 4)))
        assert_raises(DimensionError, diagonality, numpy.ones((4, 3)))


class PublishedDiagonality(unit_tests.LabanTest):
    def run(self):
        expected = {'laban': 0.9776, 'prompt-editing': 0.4448, 'raw-frame': 0.9727, 'classifier': 0.8025}
        matrices = published_matrices()
        for name, value in expected.items():
            assert abs(diagonality(matrices[name]) - value) <= 0.002, name
        assert diagonality(matrices['laban']) > diagonality(matrices['classifier'])


class DiversityExamples(unit_tests.LabanTest):
    def run(self):
        motion = static_motion(6, 3)
        assert diversity_proxy([motion, motion, motion]) == 0.0
        shifted = motion.with_positions(motion.positions + 0.25)
        assert abs(diversity_proxy([motion, shifted]) - 0.25 * math.sqrt(6 * 3 * 3)) < 1e-12
        rng = numpy.random.default_rng(1)
        motions = [motion.with_positions(rng.normal(0.0, 1.0, (6, 3, 3))) for _ in range(4)]
        distances = []
        for i in range(4):
            for j in range(i + 1, 4):
                a, b = motions[i].positions.ravel(), motions[j].positions.ravel()
                distances.append(math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b))))
        assert abs(diversity_proxy(motions) - sum(distances) / len(distances)) < 1e-12
        assert_raises(MotionError, diversity_proxy, [motion])


class CompareBaselineAndGuided(unit_tests.LabanTest):
    def run(self):
        skeleton = synthetic.SkeletonSpec()
        motion = synthetic.gen_motion(skeleton, synthetic.default_families()[1], 30, seed=2)
        with temp_folder() as folder:
            filename = os.path.join(folder, 'comparison.csv')
            ratios = compare_tc_fc(motion, motion, skeleton.effectors, filename=filename)
            with open(filename) as fd:
                lines = fd.read().splitlines()
        assert ratios == dict((c, 1.0) for c in CHANNELS)
        assert lines[0] == 'frame,channel,tc_value,fc_value'
        assert len(lines) == 1 + 30 * 4
        ratios = compare_tc_fc(motion, motion.scaled(math.sqrt(1.5)), skeleton.effectors)
        assert abs(ratios['weight'] - 1.5) < 1e-9
        short = synthetic.gen_motion(skeleton, synthetic.default_families()[1], 20, seed=2)
        assert_raises(DimensionError, compare_tc_fc, motion, short, skeleton.effectors)


class ChangeMatrixOfCannedRuns(unit_tests.LabanTest):
    def run(self):
        same = ([2.0, 2.0, 2.0, 2.0], [2.0, 2.0, 2.0, 2.0])
        benchmark = FixedBenchmark([([2.0, 2.0, 2.0, 2.0], [3.0, 2.0, 2.0, 2.0]), same, same, same])
        matrix = benchmark.change_matrix()
        expected = numpy.zeros((4, 4))
        expected[0, 0] = 0.5
        assert numpy.array_equal(matrix.mean, expected)
        assert not numpy.any(matrix.std)
        assert matrix.single_run_rows == list(CHANNELS)
        assert matrix.diagonality() == 1.0
        report = benchmark.report(matrix)
        assert report['method'] == 'fixed' and report['loss_improved_rate'] == 1.0
        assert report['diversity'] is None and report['skipped'] == 0
        assert 'weight' in str(matrix)


class DegenerateCellsAreSkipped(unit_tests.LabanTest):
    def run(self):
        good = ([1.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 1.0])
        bad = ([1.0, 0.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0])
        matrix = FixedBenchmark([good, bad, good, good]).change_matrix()
        assert matrix.skipped == 1 and matrix.row_runs == [1, 0, 1, 1]
        assert not numpy.any(matrix.mean[1])
        assert_raises(EvaluationError, FixedBenchmark([bad] * 4).change_matrix)
        assert_raises(ConfigError, FixedBenchmark, [good] * 4, jobs=0)


class ChangeMatrixStatistics(unit_tests.LabanTest):
    def run(self):
        rows = [[[1.0, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 2.0]], [], [[0.5, 0.5, 0.5, 0.5]], []]
        matrix = ChangeMatrix.from_changes(rows)
        assert matrix.mean[0].tolist() == [2.0, 0.0, 0.0, 1.0]
        assert matrix.std[0].tolist() == [1.0, 0.0, 0.0, 1.0]
        assert matrix.row_runs == [2, 0, 1, 0] and matrix.n_runs == 3
        assert matrix.single_run_rows == ['flow']
        assert_raises(DimensionError, ChangeMatrix, numpy.zeros((3, 4)), numpy.zeros((4, 4)), 1)


class CsvAgreesWithReport(unit_tests.LabanTest):
    def run(self):
        rng = numpy.random.default_rng(3)
        measurements = [(list(rng.uniform(0.5, 1.0, 4)), list(rng.uniform(0.5, 2.0, 4))) for _ in range(4)]
        with temp_folder() as folder:
            matrix, report = FixedBenchmark(measurements).benchmark(os.path.join(folder, 'eval'))
            from_csv = read_change_matrix_csv(os.path.join(folder, 'eval', 'change_matrix.csv'))
            with open(os.path.join(folder, 'eval', 'report.json')) as fd:
                from_json = json.load(fd)
        assert numpy.array_equal(from_csv, matrix.mean)
        assert abs(diagonality(from_csv) - from_json['diagonality']) < 1e-12
        assert from_json['matrix_mean'] == matrix.mean.tolist()
        assert report['diagonality'] == from_json['diagonality']


class ControllabilityOnTinyModel(unit_tests.LabanTest):
    def run(self):
        denoiser, schedule = gradcheck.gradcheck_denoiser(4)
        cfg = EvaluationConfig(method='laban', master_seed=7, stride=10)
        benchmark = build_controllability(denoiser, schedule, [0, 1], [0], cfg)
        assert [e.tags for e in benchmark.experiments] == [
            ('light', 'strong'), ('sustained', 'sudden'), ('bound', 'free'), ('near', 'far')]
        matrix = benchmark.change_matrix()
        report = benchmark.report(matrix)
        for key in ('matrix_mean', 'matrix_std', 'n_runs', 'skipped', 'diagonality', 'method',
                    'against_baseline', 'sampling_steps', 'loss_improved_rate', 'diversity'):
            assert key in report, key
        assert report['method'] == 'laban' and report['sampling_steps'] == 5
        assert matrix.n_runs + matrix.skipped == 8
        assert numpy.all(numpy.isfinite(matrix.mean))


class ControllabilityIsDeterministic(unit_tests.LabanTest):
    def run(self):
        denoiser, schedule = gradcheck.gradcheck_denoiser(4)
        matrices = []
        for method, jobs in (('classifier', 1), ('classifier', 2), ('raw-frame', 1), ('raw-frame', 2)):
            cfg = EvaluationConfig(method=method, master_seed=1, stride=10, jobs=jobs,
                                   against_baseline=True, raw_frame_steps=5)
            matrices.append(build_controllability(denoiser, schedule, [0, 1], [0, 1], cfg).change_matrix())
        assert numpy.array_equal(matrices[0].mean, matrices[1].mean)
        assert numpy.array_equal(matrices[2].mean, matrices[3].mean)
        assert_raises(ConfigError, build_controllability, denoiser, schedule, [0], [0],
                      EvaluationConfig(method='prompt-editing'))


class StrongTagPeakRatio(unit_tests.LabanTest):
    def run(self):
        denoiser, schedule, steps, dataset = unit_tests.trained_demo_model()
        effectors = dataset.skeleton.effectors
        base = generate_baseline(denoiser, 0, 0, schedule, steps, effectors)
        target = make_target(base.series, tags_to_scale(['strong']))
        guided = guided_sample(denoiser, base.embedding, base.noise, schedule, steps, target, base.series,
                               GuidanceConfig(), effectors)
        with temp_folder() as folder:
            filename = os.path.join(folder, 'comparison.csv')
            ratios = compare_tc_fc(base.motion, guided, effectors, filename=filename)
            with open(filename) as fd:
                assert len(fd.read().splitlines()) == 1 + unit_tests.DEMO_FRAMES * 4
        assert ratios['weight'] > 1.0, ratios


class ControllabilityOfTrainedModel(unit_tests.LabanTest):
    def run(self):
        denoiser, schedule, _, dataset = unit_tests.trained_demo_model()
        results = {}
        for method in ('laban', 'classifier'):
            cfg = EvaluationConfig(method=method, stride=unit_tests.DEMO_STRIDE)
            benchmark = build_controllability(denoiser, schedule, list(range(10)), [0, 1], cfg,
                                              dataset.skeleton.effectors)
            matrix = benchmark.change_matrix()
            results[method] = (matrix, benchmark.report(matrix))
        matrix, report = results['laban']
        weight, shape = CHANNELS.index('weight'), CHANNELS.index('shape')
        assert matrix.mean[weight, weight] > 0.0 and matrix.mean[shape, shape] > 0.0, matrix
        assert matrix.diagonality() >= 0.5, matrix
        assert matrix.diagonality() > results['classifier'][0].diagonality(), (matrix, results['classifier'][0])
        assert report['loss_improved_rate'] >= 0.8, report['loss_improved_rate']
