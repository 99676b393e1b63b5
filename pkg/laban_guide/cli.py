# Copyright (c) 2026 The laban-guide authors.
#
# This work is licensed under the terms of the MIT license.
# For a copy, see <https://opensource.org/licenses/MIT>.

"""Laban-guided motion diffusion: dataset, training, generation, guidance and evaluation."""

import argparse
import json
import logging
import os
import sys

from . import synthetic
from .benchmarks.controllability import EvaluationConfig, build_controllability
from .benchmarks.metrics import compare_tc_fc
from .diffusion.denoiser import load_checkpoint, save_checkpoint
from .diffusion.schedule import make_schedule, strided_steps
from .diffusion.training import TrainingConfig, evaluate_denoiser, train_denoiser
from .errors import LabanGuideError
from .gradcheck import EMBEDDING_TOLERANCE, MOTION_TOLERANCE, passed, run_gradcheck
from .guidance.guided import (GuidanceConfig, generate_baseline, guided_sample, scale_sweep,
                              write_loss_trace, write_sweep_csv)
from .guidance.tags import make_target, parse_scale_overrides, tags_to_scale
from .kinematics import SmoothingConfig, gaussian_smooth, kinematics
from .laban import CHANNELS, laban_scalars, laban_series
from .motion import EndEffectorSet, Motion
from .settings import RunConfig
from .util import StopWatch, atomic_write, configure_logging


EXIT_OK = 0
EXIT_UNEXPECTED = 1

DEMO_BUCKETS = [0.6, 0.8, 1.0, 1.2]
DEMO_STRIDE = 20

# flag dest -> RunConfig key
FLAG_KEYS = {
    'dataset': 'DatasetPath',
    'checkpoint': 'CheckpointPath',
    'out': 'OutputDir',
    'steps': 'ScheduleSteps',
    'stride': 'Stride',
    'lr': 'LearningRate',
    'delta': 'Delta',
    'k': 'StepsPerT',
    'reset_adam': 'ResetAdam',
    'recompute_eps': 'RecomputeEps',
    'divergence_ratio': 'DivergenceRatio',
    'max_update': 'MaxUpdate',
    'scale': 'Scale',
    'tags': 'Tags',
    'seed': 'Seed',
    'condition': 'ConditionId',
    'method': 'Method',
    'conditions': 'Conditions',
    'repeats': 'Repeats',
    'jobs': 'Jobs',
    'against_baseline': 'AgainstBaseline',
    'iterations': 'TrainIterations',
    'batch_size': 'BatchSize',
    'frames': 'Frames',
    'fps': 'Fps',
    'jitter': 'Jitter',
    'per_condition': 'PerCondition',
    'buckets': 'Buckets',
    'smoothing': 'SmoothingEnabled'
}


def _comma_list(text):
    return [item.strip() for item in text.split(',') if item.strip()]


def _float_list(text):
    try:
        return [float(item) for item in _comma_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated numbers, got %r' % text)


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', dest='debug', help='print debug information')
    common.add_argument('--log', metavar='LOG_FILE', default=None, help='print output to file')
    common.add_argument('--config', metavar='FILE', default=None, help='key=value settings file')
    common.add_argument('--out', metavar='DIR', default=None, help='output directory (default: _out)')
    common.add_argument('--dataset', metavar='PATH', default=None, help='dataset file (JSON lines)')
    common.add_argument('--checkpoint', metavar='PATH', default=None, help='denoiser checkpoint')
    common.add_argument('--seed', metavar='N', type=int, default=None, help='master seed (default: 0)')
    common.add_argument('--steps', metavar='N', type=int, default=None, help='diffusion steps (default: 1000)')
    common.add_argument('--stride', metavar='N', type=int, default=None, help='sampling stride (default: 1)')
    common.add_argument('--lr', metavar='LR', type=float, default=None, help='guidance learning rate (default: 0.005)')
    common.add_argument('--betas', metavar=('B1', 'B2'), type=float, nargs=2, default=None,
                        help='guidance Adam betas (default: 0.7 0.9)')
    common.add_argument('--delta', type=float, default=None, help='Laban loss delta (default: 1e-6)')
    common.add_argument('--k', metavar='K', type=int, default=None, help='Adam steps per sampling step (default: 1)')
    common.add_argument('--reset-adam', action='store_const', const=True, default=None,
                        help='reset Adam moments at every sampling step')
    common.add_argument('--reuse-eps', action='store_const', const=False, default=None, dest='recompute_eps',
                        help='take the DDIM step with the pre-update noise prediction')
    common.add_argument('--divergence-ratio', type=float, default=None,
                        help='abort when the loss exceeds this multiple of its minimum (default: 1000)')
    common.add_argument('--max-update', type=float, default=None,
                        help='abort when one Adam update moves the embedding this many table radii (default: 1)')
    common.add_argument('--scale', metavar='COMPONENT=VALUE', action='append', default=None,
                        help='explicit scale of a component, e.g. weight=1.5 (repeatable)')
    common.add_argument('--tags', type=_comma_list, default=None, help='comma-separated Laban tags')
    common.add_argument('--condition', type=int, default=None, help='condition id (default: 0)')
    common.add_argument('--method', choices=['laban', 'raw-frame', 'classifier'], default=None,
                        help='evaluated method (default: laban)')
    common.add_argument('--conditions', type=int, default=None, help='conditions to evaluate (default: 10)')
    common.add_argument('--repeats', type=int, default=None, help='seeds per condition (default: 2)')
    common.add_argument('--jobs', type=int, default=None, help='evaluation worker threads (default: 1)')
    common.add_argument('--against-baseline', action='store_const', const=True, default=None,
                        help='compare the large-tag run with the unguided baseline')
    common.add_argument('--iterations', type=int, default=None, help='training iterations (default: 3000)')
    common.add_argument('--batch-size', type=int, default=None, help='training batch size (default: 64)')
    common.add_argument('--frames', type=int, default=None, help='frames per motion (default: 60)')
    common.add_argument('--fps', type=float, default=None, help='frame rate (default: 20)')
    common.add_argument('--jitter', type=float, default=None, help='position jitter in meters (default: 0.001)')
    common.add_argument('--per-condition', type=int, default=None, help='motions per condition (default: 10)')
    common.add_argument('--buckets', type=_float_list, default=None, help='amplitude buckets (default: 1.0)')
    common.add_argument('--no-smoothing', action='store_const', const=False, default=None, dest='smoothing',
                        help='disable Gaussian smoothing of positions')
    common.add_argument('--plot', action='store_true', help='also write a PNG plot')
    return common


def build_parser():
    common = _common_parser()
    argparser = argparse.ArgumentParser(prog='laban-guide', description=__doc__)
    commands = argparser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    commands.add_parser('dataset', parents=[common], help='generate the synthetic corpus')
    commands.add_parser('train', parents=[common], help='train the toy denoiser')
    commands.add_parser('generate', parents=[common], help='unguided baseline sample')
    commands.add_parser('guide', parents=[common], help='two-step Laban-guided generation')
    analyze = commands.add_parser('analyze', parents=[common], help='kinematics and Laban features of a motion')
    analyze.add_argument('motion', help='motion JSON file')
    analyze.add_argument('--compare-smoothing', action='store_true',
                         help='also emit the unsmoothed columns')
    analyze.add_argument('--joint', default=None, help='joint whose kinematics are listed (default: first)')
    commands.add_parser('eval', parents=[common], help='controllability change matrix')
    gradcheck = commands.add_parser('gradcheck', parents=[common], help='finite-difference gradient checks')
    gradcheck.add_argument('--instances', type=int, default=10, help='random instances per check (default: 10)')
    commands.add_parser('demo', parents=[common], help='dataset, train, guide and eval in one go')
    sweep = commands.add_parser('sweep', parents=[common], help='guided runs over a range of scales')
    sweep.add_argument('--channel', choices=CHANNELS, default='weight', help='scaled channel (default: weight)')
    sweep.add_argument('--scales', type=_float_list, default=[0.5, 0.8, 1.0, 1.2, 1.5],
                       help='comma-separated scales (default: 0.5,0.8,1.0,1.2,1.5)')
    return argparser


def config_from_args(args):
    """Defaults, then the --config file, then explicit flags."""
    cfg = RunConfig()
    if args.config:
        cfg.read(args.config)
    overrides = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, 'betas', None) is not None:
        overrides['Beta1'], overrides['Beta2'] = args.betas
    cfg.set(**overrides)
    return cfg


def guidance_config(cfg):
    return GuidanceConfig(lr=cfg.LearningRate, adam_betas=(cfg.Beta1, cfg.Beta2), delta=cfg.Delta,
                          steps_per_t=cfg.StepsPerT, reset_adam=cfg.ResetAdam,
                          recompute_eps=cfg.RecomputeEps, divergence_ratio=cfg.DivergenceRatio,
                          max_update=cfg.MaxUpdate,
                          smoothing=cfg.smoothing_config()).validate()


def scale_vector(cfg):
    """Tags first, explicit component scales on top."""
    return parse_scale_overrides(cfg.Scale, base=tags_to_scale(cfg.Tags))


def effectors_for(motion):
    return synthetic.default_effectors(motion.joint_names)


def _out_path(cfg, name):
    return os.path.join(cfg.OutputDir, name)


def write_manifest(cfg, command, filename, **extra):
    manifest = {'command': command, 'config': cfg.as_dict()}
    manifest.update(extra)
    with atomic_write(filename) as fd:
        json.dump(manifest, fd, sort_keys=True, indent=2)
        fd.write('\n')


def plot_series(series_by_label, filename, title=''):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    figure, axes = plt.subplots(len(CHANNELS), 1, sharex=True, figsize=(8, 8))
    for index, channel in enumerate(CHANNELS):
        for label, series in series_by_label:
            axes[index].plot(series.values[:, index], label=label)
        axes[index].set_ylabel(channel)
    axes[0].legend()
    axes[-1].set_xlabel('frame')
    if title:
        figure.suptitle(title)
    folder = os.path.dirname(os.path.abspath(filename))
    if not os.path.isdir(folder):
        os.makedirs(folder)
    figure.savefig(filename)
    plt.close(figure)
    logging.info('plot written to %s', filename)


class Session(object):
    """A loaded checkpoint plus the sampling choices of a run."""

    def __init__(self, cfg):
        checkpoint = load_checkpoint(cfg.CheckpointPath)
        self.denoiser = checkpoint.denoiser
        self.schedule = checkpoint.schedule
        self.effectors = EndEffectorSet(checkpoint.effector_indices)
        self.step_indices = strided_steps(self.schedule.n_steps, cfg.Stride)
        self.smoothing = cfg.smoothing_config()

    def baseline(self, cfg):
        return generate_baseline(self.denoiser, cfg.ConditionId, cfg.Seed, self.schedule,
                                 self.step_indices, self.effectors, self.smoothing)


def cmd_dataset(cfg, args):
    spec = [(family, cfg.PerCondition) for family in synthetic.default_families()]
    dataset = synthetic.gen_dataset(spec, cfg.Frames, cfg.Fps, cfg.Seed, cfg.DatasetPath,
                                    cfg.Buckets, jitter=cfg.Jitter)
    print('%d motions, %d conditions -> %s' % (len(dataset), dataset.n_conditions, cfg.DatasetPath))
    return EXIT_OK


def cmd_train(cfg, args):
    dataset = synthetic.load_dataset(cfg.DatasetPath)
    schedule = make_schedule(cfg.ScheduleSteps, cfg.BetaMin, cfg.BetaMax)
    training = TrainingConfig(cfg.TrainIterations, cfg.BatchSize, cfg.TrainLr, cfg.Seed,
                              cfg.HiddenWidth, cfg.EmbedDim, cfg.PriorRank, progress=not args.debug)
    watch = StopWatch()
    history = []
    denoiser = train_denoiser(dataset, training, schedule, history)
    watch.stop()
    mse = evaluate_denoiser(denoiser, dataset, schedule, seed=cfg.Seed)
    logging.info('trained in %.1f s, epsilon MSE %.5f', watch.seconds(), mse)
    save_checkpoint(cfg.CheckpointPath, denoiser, schedule, dataset.skeleton.effector_indices, {
        'training': training.to_json(),
        'dataset': cfg.DatasetPath,
        'conditions': [c._asdict() for c in dataset.conditions],
        'epsilon_mse': mse
    })
    with atomic_write(_out_path(cfg, 'training_loss.csv')) as fd:
        fd.write('iteration,loss\n')
        for iteration, loss in enumerate(history):
            fd.write('%d,%r\n' % (iteration, loss))
    return EXIT_OK


def cmd_generate(cfg, args):
    session = Session(cfg)
    base = session.baseline(cfg)
    base.motion.save_to_disk(_out_path(cfg, 'baseline.json'))
    base.series.save_to_disk(_out_path(cfg, 'baseline_series.csv'))
    write_manifest(cfg, 'generate', _out_path(cfg, 'manifest.json'),
                   baseline_scalars=list(laban_scalars(base.series)))
    print(laban_scalars(base.series))
    return EXIT_OK


def cmd_guide(cfg, args):
    session = Session(cfg)
    guidance = guidance_config(cfg)
    s = scale_vector(cfg)
    base = session.baseline(cfg)
    target = make_target(base.series, s)
    trace = []
    try:
        guided = guided_sample(session.denoiser, base.embedding, base.noise, session.schedule,
                               session.step_indices, target, base.series, guidance,
                               session.effectors, trace)
    finally:
        write_loss_trace(trace, _out_path(cfg, 'loss_trace.csv'))
    guided_series = laban_series(guided, session.effectors, session.smoothing)
    base.motion.save_to_disk(_out_path(cfg, 'baseline.json'))
    guided.save_to_disk(_out_path(cfg, 'guided.json'))
    base.series.save_to_disk(_out_path(cfg, 'baseline_series.csv'))
    guided_series.save_to_disk(_out_path(cfg, 'guided_series.csv'))
    ratios = compare_tc_fc(base.motion, guided, session.effectors, session.smoothing,
                           _out_path(cfg, 'comparison.csv'))
    write_manifest(cfg, 'guide', _out_path(cfg, 'manifest.json'),
                   scale=s.tolist(),
                   sampling_steps=len(session.step_indices) - 1,
                   guidance=guidance.to_json(),
                   baseline_scalars=list(laban_scalars(base.series)),
                   guided_scalars=list(laban_scalars(guided_series)),
                   peak_ratios=ratios)
    if args.plot:
        plot_series([('baseline', base.series), ('target', target), ('guided', guided_series)],
                    _out_path(cfg, 'guide.png'), repr(s))
    for channel in CHANNELS:
        ratio = ratios[channel]
        print('%-6s peak ratio %s' % (channel, 'n/a' if ratio is None else '%.4f' % ratio))
    return EXIT_OK


def _magnitudes(array, joint):
    return (array[:, joint] ** 2).sum(axis=1) ** 0.5


def cmd_analyze(cfg, args):
    motion = Motion.load(args.motion)
    effectors = effectors_for(motion)
    joint = motion.joint_index(args.joint) if args.joint else 0
    smoothing = cfg.smoothing_config()
    variants = [('', smoothing)]
    if args.compare_smoothing:
        variants.append(('raw_', SmoothingConfig.disabled()))
    columns = []
    scalars = {}
    plotted = []
    for prefix, variant in variants:
        kinematic = kinematics(gaussian_smooth(motion, variant))
        series = laban_series(motion, effectors, variant)
        columns.append((prefix + 'speed', _magnitudes(kinematic.velocity, joint)))
        columns.append((prefix + 'acceleration', _magnitudes(kinematic.acceleration, joint)))
        columns.append((prefix + 'jerk', _magnitudes(kinematic.jerk, joint)))
        for index, channel in enumerate(CHANNELS):
            columns.append((prefix + channel, series.values[:, index]))
        scalars[prefix + 'scalars'] = laban_scalars(series)._asdict()
        plotted.append((prefix.rstrip('_') or 'smoothed', series))
    name = os.path.splitext(os.path.basename(args.motion))[0]
    filename = _out_path(cfg, name + '_analysis.csv')
    with atomic_write(filename) as fd:
        fd.write(','.join(['frame'] + [c for c, _ in columns]) + '\n')
        for frame in range(motion.n_frames):
            fd.write(','.join([str(frame)] + [repr(float(v[frame])) for _, v in columns]) + '\n')
    with atomic_write(_out_path(cfg, name + '_scalars.json')) as fd:
        json.dump(scalars, fd, sort_keys=True, indent=2)
        fd.write('\n')
    if args.plot:
        plot_series(plotted, _out_path(cfg, name + '_analysis.png'), name)
    for key in sorted(scalars):
        print('%s: %s' % (key, ', '.join('%s=%.6g' % kv for kv in scalars[key].items())))
    return EXIT_OK


def cmd_eval(cfg, args):
    session = Session(cfg)
    n_conditions = session.denoiser.n_conditions
    if cfg.Conditions > n_conditions:
        logging.warning('only %d conditions available, evaluating all of them', n_conditions)
    conditions = list(range(min(cfg.Conditions, n_conditions)))
    evaluation = EvaluationConfig(cfg.Method, cfg.Seed, cfg.AgainstBaseline, cfg.Jobs, cfg.Stride,
                                  guidance_config(cfg), cfg.RawFrameSteps, cfg.RawFrameLr,
                                  cfg.ClassifierLambda)
    benchmark = build_controllability(session.denoiser, session.schedule, conditions,
                                      list(range(cfg.Repeats)), evaluation, session.effectors,
                                      progress=not args.debug)
    matrix, report = benchmark.benchmark(_out_path(cfg, 'eval_' + cfg.Method))
    print(matrix)
    print('diagonality %.4f (%d runs, %d skipped)' % (report['diagonality'], matrix.n_runs, matrix.skipped))
    return EXIT_OK


def cmd_gradcheck(cfg, args):
    results = run_gradcheck(args.instances, cfg.Seed)
    for result in results:
        print('%-9s #%-2d max relative error %.3g' % result)
    if not passed(results):
        logging.error('gradient check failed (tolerances: motion %g, embedding %g)',
                      MOTION_TOLERANCE, EMBEDDING_TOLERANCE)
        return EXIT_UNEXPECTED
    return EXIT_OK


def cmd_sweep(cfg, args):
    session = Session(cfg)
    rows = scale_sweep(session.denoiser, cfg.ConditionId, cfg.Seed, session.schedule,
                       session.step_indices, args.channel, guidance_config(cfg), args.scales,
                       session.effectors)
    write_sweep_csv(rows, _out_path(cfg, 'sweep_%s.csv' % args.channel))
    for scale, scalars in rows:
        print('%-6g %s' % (scale, ', '.join('%s=%.6g' % kv for kv in scalars._asdict().items())))
    return EXIT_OK


def cmd_demo(cfg, args):
    """Small end-to-end run with every artifact under the output directory."""
    cfg.set(DatasetPath=_out_path(cfg, 'dataset.jsonl'),
            CheckpointPath=_out_path(cfg, 'denoiser.pt'))
    if args.buckets is None:
        cfg.set(Buckets=DEMO_BUCKETS)
    if args.stride is None:
        cfg.set(Stride=DEMO_STRIDE)
    if not cfg.Tags and not cfg.Scale:
        cfg.set(Tags=['strong'])
    out_dir = cfg.OutputDir
    for command in (cmd_dataset, cmd_train, cmd_guide):
        logging.info('demo: %s', command.__name__[4:])
        command(cfg, args)
    for method in ('laban', 'classifier'):
        logging.info('demo: eval %s', method)
        cfg.set(Method=method)
        cmd_eval(cfg, args)
    print('demo artifacts in %s' % out_dir)
    return EXIT_OK


COMMANDS = {
    'dataset': cmd_dataset,
    'train': cmd_train,
    'generate': cmd_generate,
    'guide': cmd_guide,
    'analyze': cmd_analyze,
    'eval': cmd_eval,
    'gradcheck': cmd_gradcheck,
    'demo': cmd_demo,
    'sweep': cmd_sweep
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.debug, args.log)
    try:
        cfg = config_from_args(args)
        if not os.path.isdir(cfg.OutputDir):
            os.makedirs(cfg.OutputDir)
        return COMMANDS[args.command](cfg, args)
    except LabanGuideError as error:
        logging.error('%s', error)
        return error.exit_code
    except Exception as exception:
        logging.error('unexpected %s: %s', type(exception).__name__, exception)
        logging.debug('traceback', exc_info=True)
        return EXIT_UNEXPECTED


def run():
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print('\nCancelled by user. Bye!')
