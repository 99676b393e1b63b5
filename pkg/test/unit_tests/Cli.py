# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

import json
import os

from unittest import mock

import unit_tests

from unit_tests import static_motion, temp_folder

from laban_guide.cli import main
from laban_guide.errors import NumericInstabilityError


TINY_CONFIG = """\
ScheduleSteps=20
Stride=5
TrainIterations=50
HiddenWidth=16
EmbedDim=4
Frames=8
PerCondition=3
"""


def _prepare(folder):
    """Writes a tiny config, dataset and checkpoint; returns the config path."""
    config = os.path.join(folder, 'tiny.ini')
    with open(config, 'w') as fd:
        fd.write(TINY_CONFIG)
        fd.write('DatasetPath=%s\n' % os.path.join(folder, 'data.jsonl'))
        fd.write('CheckpointPath=%s\n' % os.path.join(folder, 'model.pt'))
        fd.write('OutputDir=%s\n' % os.path.join(folder, 'out'))
    assert main(['dataset', '--config', config]) == 0
    assert main(['train', '--config', config]) == 0
    return config


def _read(folder, name):
    with open(os.path.join(folder, 'out', name)) as fd:
        return fd.read()


class TrainWritesArtifacts(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            _prepare(folder)
            assert os.path.isfile(os.path.join(folder, 'model.pt'))
            losses = _read(folder, 'training_loss.csv').splitlines()
            assert losses[0] == 'iteration,loss' and len(losses) == 51
            assert main(['generate', '--config', os.path.join(folder, 'tiny.ini'), '--seed', '3']) == 0
            manifest = json.loads(_read(folder, 'manifest.json'))
            assert manifest['command'] == 'generate' and manifest['config']['Seed'] == 3
            assert len(manifest['baseline_scalars']) == 4


class IdentityGuideKeepsBaseline(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            assert main(['guide', '--config', config, '--seed', '1']) == 0
            assert _read(folder, 'guided.json') == _read(folder, 'baseline.json')
            assert _read(folder, 'loss_trace.csv').splitlines() == ['step,t,loss']
            manifest = json.loads(_read(folder, 'manifest.json'))
            assert manifest['scale'] == [1.0, 1.0, 1.0, 1.0]
            assert set(manifest['peak_ratios'].values()) <= set([1.0, None])


class ScaledGuideRecordsRun(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            assert main(['guide', '--config', config, '--scale', 'weight=1.5', '--plot']) == 0
            manifest = json.loads(_read(folder, 'manifest.json'))
            assert manifest['scale'] == [1.5, 1.0, 1.0, 1.0]
            assert manifest['sampling_steps'] == 4
            assert manifest['guidance']['lr'] == 0.005
            assert manifest['guidance']['max_update'] == 1.0
            trace = _read(folder, 'loss_trace.csv').splitlines()
            assert len(trace) == 5 and trace[1].startswith('0,20,')
            comparison = _read(folder, 'comparison.csv').splitlines()
            assert len(comparison) == 1 + 8 * 4
            assert os.path.isfile(os.path.join(folder, 'out', 'guide.png'))


class GuideExitCodes(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            assert main(['guide', '--config', config, '--tags', 'heavy']) == 2
            assert main(['guide', '--config', config, '--tags', 'light,strong']) == 2
            failure = NumericInstabilityError('loss diverged at step 0', 0, 20, 0.005)
            with mock.patch('laban_guide.cli.guided_sample', side_effect=failure):
                assert main(['guide', '--config', config, '--tags', 'strong']) == 3
            assert _read(folder, 'loss_trace.csv').splitlines() == ['step,t,loss']
            missing = os.path.join(folder, 'nothing.pt')
            assert main(['generate', '--config', config, '--checkpoint', missing]) == 2
            assert main(['generate', '--config', config, '--condition', '7']) == 2
            assert main(['generate', '--config', config, '--stride', '0']) == 2


class BadConfigFile(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = os.path.join(folder, 'bad.ini')
            with open(config, 'w') as fd:
                fd.write('OutputDir=%s\nLearningRat=0.1\n' % folder)
            assert main(['gradcheck', '--config', config]) == 2


class GradcheckCommand(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            assert main(['gradcheck', '--instances', '2', '--out', folder]) == 0


class AnalyzeStaticMotion(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            filename = os.path.join(folder, 'still.json')
            static_motion(10, 3).save_to_disk(filename)
            out = os.path.join(folder, 'out')
            assert main(['analyze', filename, '--out', out, '--compare-smoothing', '--joint', 'j1']) == 0
            with open(os.path.join(out, 'still_analysis.csv')) as fd:
                lines = fd.read().splitlines()
            header = lines[0].split(',')
            assert header[:8] == ['frame', 'speed', 'acceleration', 'jerk', 'weight', 'time', 'flow', 'shape']
            assert 'raw_jerk' in header and len(lines) == 11
            for line in lines[1:]:
                row = dict(zip(header, [float(v) for v in line.split(',')]))
                for column in ('speed', 'acceleration', 'jerk', 'weight', 'time', 'flow'):
                    assert abs(row[column]) < 1e-12, column
                    assert row['raw_' + column] == 0.0, column
                assert row['shape'] > 0.0
            with open(os.path.join(out, 'still_scalars.json')) as fd:
                scalars = json.load(fd)
            assert sorted(scalars) == ['raw_scalars', 'scalars']
            assert main(['analyze', filename, '--out', out, '--joint', 'elbow']) == 2


class EvalIsReproducible(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            flags = ['eval', '--config', config, '--conditions', '5', '--repeats', '1']
            assert main(flags) == 0
            report_text = _read(folder, os.path.join('eval_laban', 'report.json'))
            matrix_text = _read(folder, os.path.join('eval_laban', 'change_matrix.csv'))
            report = json.loads(report_text)
            assert report['conditions'] == [0, 1, 2]
            assert report['method'] == 'laban' and report['sampling_steps'] == 4
            assert report['n_runs'] + report['skipped'] == 12
            assert 0.0 <= report['diagonality'] <= 1.0
            assert main(flags) == 0
            assert _read(folder, os.path.join('eval_laban', 'report.json')) == report_text
            assert _read(folder, os.path.join('eval_laban', 'change_matrix.csv')) == matrix_text


class SweepCommand(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            assert main(['sweep', '--config', config, '--channel', 'shape', '--scales', '1.0,1.5']) == 0
            lines = _read(folder, 'sweep_shape.csv').splitlines()
            assert lines[0] == 'scale,weight,time,flow,shape' and len(lines) == 3


class OversizedLearningRateExitsUnstable(unit_tests.LabanTest):
    def run(self):
        with temp_folder() as folder:
            config = _prepare(folder)
            assert main(['guide', '--config', config, '--tags', 'strong', '--lr', '5.0']) == 3
            trace = _read(folder, 'loss_trace.csv').splitlines()
            assert trace[0] == 'step,t,loss' and len(trace) == 2
            assert not os.path.exists(os.path.join(folder, 'out', 'guided.json'))
            assert main(['guide', '--config', config, '--tags', 'strong', '--max-update', '0']) == 2
