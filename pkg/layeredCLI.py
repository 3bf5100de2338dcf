#!/usr/bin/env python3

"""Python script for running the layeredDepth module through the CLI

usage: layeredCLI.py [-h] {gen,compose,synth,remove,eval} ...

Utility for generating, composing, re-rendering and evaluating layered depth images

subcommands:
  gen                   Generate a seeded dataset of layered scenes.
  compose               Recompose a scene's layer stack by minimum depth pooling.
  synth                 Synthesize a novel view of a scene from its LDI.
  remove                Remove every object of a class from a scene.
  eval                  Evaluate predicted views against ground truth.

Every subcommand accepts:

configuration options:
  -c CONFIG, --config CONFIG
                        JSON (or YAML) run configuration, ex. a run_config.json of a previous run.
  -o OUT, --out OUT     Output directory.
  --seed SEED           Global seed.
  -t THREADS, --threads THREADS
                        Number of threads used for ray casting.

logging options:
  -l, --savelog         Save the log to a file in the logs/ directory.
  -d, --debugmessages   Print verbose debug messages.
  -p, --printkernels    Print per-kernel statistics.
"""

# Support python modules
import os
import sys
import time
import argparse

import imageio.v2 as iio

# layeredDepth modules
import layeredDepth
import layeredDepth.errors as ERRORS
import layeredDepth.io as IO
import layeredDepth.io.stack_io as STACK_IO
import layeredDepth.io.ldi_io as LDI_IO
import layeredDepth.driver.scene_driver as SCENE
import layeredDepth.driver.compose_driver as COMPOSE
import layeredDepth.driver.render_driver as RENDER
import layeredDepth.driver.metrics_driver as METRICS
from layeredDepth.data_model.raster import Camera
from layeredDepth.data_model.ldi import ldi_from_stack


SCENE_DIR_FORMAT = 'scene_{:04d}'

# -------------- Some helper functions ------------------


def print_welcome_message():
    """Prints welcome message
    """

    print(layeredDepth.get_welcome_text())
    IO.logger.debug(layeredDepth.get_debug_version_info())


# Make sure we close logger before exiting
def clean_exit():
    """Shuts down logger and exits script
    """

    IO.logger.close_logger()
    sys.exit(0)


# Exit with an error code
def err_exit(error_code):
    """Shuts down logger, exits script with error code
    """

    IO.logger.close_logger()
    sys.exit(error_code)


def require_out(run_config):
    if run_config.out is None:
        raise ERRORS.ConfigError('The {} command needs an output directory, pass --out'.format(run_config.command))
    try:
        os.makedirs(run_config.out, exist_ok=True)
    except OSError as e:
        raise ERRORS.ConfigError('Cannot create output directory {}: {}'.format(run_config.out, str(e)))
    return run_config.out


def record_run_config(run_config, directory):
    written, message = IO.config_writer.ConfigWriter(run_config).write_run_config(directory)
    if not written:
        raise ERRORS.ConfigError(message)


def save_scene_sample(sample, directory):
    """Writes a generated scene: its stack, scene description, LDI and target view
    """

    STACK_IO.save_stack(sample.stack, directory, seed=sample.scene.seed, overlap=sample.overlap,
                        extra={'target_offset': list(sample.offset)})
    IO.config_writer.write_json(sample.scene.to_dict(), os.path.join(directory, 'scene.json'))
    LDI_IO.save_ldi(ldi_from_stack(sample.stack), os.path.join(directory, 'ldi.bin'))
    STACK_IO.write_image(sample.target_view, os.path.join(directory, 'target'))
    IO.logger.output('scene seed {} with target view'.format(sample.scene.seed), directory)


def load_scene_ldi(scene_dir, stack=None):
    """Loads the LDI of a scene directory, building it from the stack when no container exists
    """

    ldi_path = os.path.join(scene_dir, 'ldi.bin')
    if os.path.isfile(ldi_path):
        return LDI_IO.load_ldi(ldi_path)
    if stack is None:
        stack, _ = STACK_IO.load_stack(scene_dir)
    return ldi_from_stack(stack)


# ----------------- Subcommands ------------------------


def cmd_gen(run_config):
    """Generates --count seeded scenes and writes the accepted ones

    Returns
    -------
    int
        number of accepted scenes
    """

    out = require_out(run_config)
    generator = SCENE.SceneGenerator(run_config.generation, run_config.threads, run_config.alpha_min)
    print('Generating {} scenes with seed {} into {}...'.format(run_config.count, run_config.seed, out))

    scenes = []
    accepted = 0
    for sample in generator.generate(run_config.count, run_config.seed):
        name = SCENE_DIR_FORMAT.format(sample.index)
        scenes.append({'name': name, 'seed': sample.scene.seed, 'objects': len(sample.scene.objects),
                       'instances': len(sample.stack.instances), 'overlap': sample.overlap,
                       'accepted': sample.accepted})
        if sample.accepted:
            accepted += 1
            save_scene_sample(sample, os.path.join(out, name))
        IO.logger.write('{} overlap {:.4f} - {}'.format(name, sample.overlap, 'accepted' if sample.accepted else 'rejected'))

    ratio = accepted / run_config.count if run_config.count else 0.0
    IO.config_writer.write_json({'count': run_config.count, 'accepted': accepted, 'acceptance_ratio': ratio,
                                 'scenes': scenes}, os.path.join(out, 'summary.json'))
    record_run_config(run_config, out)
    print('Accepted {} of {} scenes, acceptance ratio {:.4f}'.format(accepted, run_config.count, ratio))
    return accepted


def cmd_compose(run_config):
    """Recomposes a scene by minimum depth pooling and writes the view and index map
    """

    out = require_out(run_config)
    stack, _ = STACK_IO.load_stack(run_config.scene)
    result = COMPOSE.min_depth_pool(stack, run_config.alpha_min)
    STACK_IO.write_image(result.image, out)
    colors = COMPOSE.index_map_colors(result.index_map, len(stack.instances) + 1)
    iio.imwrite(os.path.join(out, 'index_map.png'), colors)
    IO.logger.output('composed view and index map', out)
    record_run_config(run_config, out)
    print('Composed {} layers of {} into {}'.format(len(stack.instances) + 1, run_config.scene, out))
    return result


def resolve_pose_offset(run_config):
    """Reads the --pose flag, 'target' meaning the perturbation stored with the scene
    """

    if run_config.pose is None:
        raise ERRORS.PoseFormatError('The synth command needs --pose tx,ty,tz,rx,ry,rz or --pose target')
    if run_config.pose.strip() == 'target':
        manifest = STACK_IO.read_manifest(run_config.scene)
        if manifest.get('target_offset') is None:
            raise ERRORS.PoseFormatError('Scene {} has no stored target perturbation'.format(run_config.scene))
        return tuple(float(v) for v in manifest['target_offset'])
    return RENDER.parse_pose_offset(run_config.pose)


def cmd_synth(run_config):
    """Synthesizes a view of a scene's LDI from an offset camera
    """

    offset = resolve_pose_offset(run_config)
    out = require_out(run_config)
    manifest = STACK_IO.read_manifest(run_config.scene)
    camera = Camera.from_dict(manifest['camera'])
    ldi = load_scene_ldi(run_config.scene)

    views = RENDER.synthesize_path(ldi, camera, offset, run_config.frames, run_config.warp)
    if len(views) > 1:
        for index, view in enumerate(views):
            STACK_IO.write_image(view, os.path.join(out, 'frames', 'frame_{:03d}'.format(index)))
    view = views[-1]
    STACK_IO.write_image(view, out)
    STACK_IO.write_mask(~view.valid, os.path.join(out, 'hole_mask.png'))
    IO.logger.output('synthesized view, {} frame(s)'.format(len(views)), out)
    record_run_config(run_config, out)
    print('Synthesized view with fill ratio {:.4f} into {}'.format(RENDER.fill_ratio(view), out))
    return view


def cmd_remove(run_config):
    """Removes every instance of one class from a scene and writes the diminished view
    """

    out = require_out(run_config)
    stack, _ = STACK_IO.load_stack(run_config.scene)
    table = stack.class_table or {}
    by_name = {name: class_id for class_id, name in table.items()}
    if run_config.class_name not in by_name:
        raise ERRORS.ConfigError('Unknown class {}, available classes: {}'.format(
            run_config.class_name, ', '.join(table[c] for c in sorted(table))))
    result = RENDER.remove_objects(stack, {by_name[run_config.class_name]}, run_config.alpha_min)
    STACK_IO.write_image(result.image, out)
    IO.logger.output('view without {}'.format(run_config.class_name), out)
    record_run_config(run_config, out)
    print('Removed class {} from {} into {}'.format(run_config.class_name, run_config.scene, out))
    return result


def _is_view_dir(path):
    return os.path.isfile(os.path.join(path, 'rgba.png')) and not os.path.isfile(os.path.join(path, STACK_IO.MANIFEST_FILE))


def _is_scene_dir(path):
    return os.path.isfile(os.path.join(path, STACK_IO.MANIFEST_FILE))


def _scene_names(path):
    return sorted(name for name in os.listdir(path) if name.startswith('scene_') and _is_scene_dir(os.path.join(path, name)))


def evaluate_dirs(pred, gt, ssim_config):
    """Evaluates a view, scene or dataset directory against its ground truth counterpart
    """

    for path in (pred, gt):
        if not os.path.isdir(path):
            raise ERRORS.MissingFileError('Evaluation input {} is not a directory'.format(path))

    if _is_scene_dir(gt):
        if not _is_scene_dir(pred):
            raise ERRORS.InconsistentDatasetError('{} is a scene directory but {} is not'.format(gt, pred))
        pred_view = STACK_IO.read_image(os.path.join(pred, 'full'))
        gt_view = STACK_IO.read_image(os.path.join(gt, 'full'))
        return METRICS.evaluate_view(pred_view, gt_view, load_scene_ldi(pred), load_scene_ldi(gt), ssim_config)

    if _is_view_dir(gt):
        if not _is_view_dir(pred):
            raise ERRORS.InconsistentDatasetError('{} is a view directory but {} is not'.format(gt, pred))
        return METRICS.evaluate_view(STACK_IO.read_image(pred), STACK_IO.read_image(gt), ssim_config=ssim_config)

    names = _scene_names(gt)
    if not names:
        raise ERRORS.MissingFileError('{} holds no view, scene or dataset'.format(gt))
    if _scene_names(pred) != names:
        raise ERRORS.InconsistentDatasetError('Datasets {} and {} hold different scenes'.format(pred, gt))
    reports = {name: evaluate_dirs(os.path.join(pred, name), os.path.join(gt, name), ssim_config) for name in names}
    ldis = [load_scene_ldi(os.path.join(gt, name)) for name in names]
    return METRICS.aggregate_reports(reports, ldis)


def cmd_eval(run_config):
    """Evaluates predictions and writes a JSON report
    """

    if run_config.pred is None or run_config.gt is None:
        raise ERRORS.ConfigError('The eval command needs a prediction and a ground truth directory')
    with IO.logger.stage('evaluate'):
        report = evaluate_dirs(run_config.pred, run_config.gt, run_config.ssim)
    text = IO.config_writer.dumps_json(report.to_dict())

    report_path = run_config.report
    if report_path is None and run_config.out is not None:
        report_path = os.path.join(require_out(run_config), 'report.json')
    if report_path is None:
        print(text, end='')
        return report

    report_dir = os.path.dirname(os.path.abspath(report_path))
    os.makedirs(report_dir, exist_ok=True)
    with open(report_path, 'w', newline='\n') as report_file:
        report_file.write(text)
    IO.logger.output('evaluation report', report_path)
    record_run_config(run_config, report_dir)
    print('color MPE {:.4f}, color RMSE {:.4f}, depth MPE {:.4f}, depth RMSE {:.4f}, SSIM {:.4f}'.format(
        *[report.metrics[name] for name in METRICS.EvalReport.METRIC_NAMES]))
    print('Wrote report to {}'.format(report_path))
    return report


COMMANDS = {'gen': cmd_gen, 'compose': cmd_compose, 'synth': cmd_synth, 'remove': cmd_remove, 'eval': cmd_eval}


def build_parser():
    """Builds the argument parser with one subparser per command
    """

    common = argparse.ArgumentParser(add_help=False)
    config_group    = common.add_argument_group('configuration options')
    debug_group     = common.add_argument_group('logging options')

    config_group.add_argument('-c', '--config',         help='JSON (or YAML) run configuration, ex. a run_config.json of a previous run.')
    config_group.add_argument('-o', '--out',            help='Output directory.')
    config_group.add_argument('--seed',                 help='Global seed.', type=int)
    config_group.add_argument('-t', '--threads',        help='Number of threads used for ray casting.', type=int)

    debug_group.add_argument('-l', '--savelog',         action='store_true', help='Save the log to a file in the logs/ directory.')
    debug_group.add_argument('-d', '--debugmessages',   action='store_true', help='Print verbose debug messages.')
    debug_group.add_argument('-p', '--printkernels',    action='store_true', help='Print per-kernel statistics.')

    parser = argparse.ArgumentParser(description='Utility for generating, composing, re-rendering and evaluating layered depth images',
                                     epilog=ERRORS.describe_exit_codes(), formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest='command', metavar='{gen,compose,synth,remove,eval}')
    subparsers.required = True

    def add_command(name, help_text):
        return subparsers.add_parser(name, parents=[common], help=help_text, epilog=ERRORS.describe_exit_codes(),
                                     formatter_class=argparse.RawDescriptionHelpFormatter)

    gen = add_command('gen', 'Generate a seeded dataset of layered scenes.')
    gen_group = gen.add_argument_group('generation options')
    gen_group.add_argument('--count',               help='Number of scenes to generate.', type=int)
    gen_group.add_argument('--width',               help='Image width in pixels.', type=int)
    gen_group.add_argument('--height',              help='Image height in pixels.', type=int)
    gen_group.add_argument('--min-objects',         help='Minimum number of objects per scene.', type=int, dest='min_objects')
    gen_group.add_argument('--max-objects',         help='Maximum number of objects per scene.', type=int, dest='max_objects')
    gen_group.add_argument('--overlap-threshold',   help='Minimum fraction of multiply covered pixels for a scene to be kept.', type=float, dest='overlap_threshold')
    gen_group.add_argument('--keep-hidden',         help='Keep fully occluded objects in the generated stacks.', action='store_true', default=None, dest='keep_hidden')

    compose = add_command('compose', "Recompose a scene's layer stack by minimum depth pooling.")
    compose.add_argument('scene', help='Scene directory.')

    synth = add_command('synth', "Synthesize a novel view of a scene from its LDI.")
    synth.add_argument('scene', help='Scene directory.')
    synth.add_argument('--pose',    help='Target camera in the source camera frame, "tx,ty,tz,rx,ry,rz" in meters and degrees (yaw, pitch, roll about y, x, z), or "target" for the stored perturbation.')
    synth.add_argument('--frames',  help='Number of frames along the camera path, the last one at the full pose.', type=int)

    remove = add_command('remove', 'Remove every object of a class from a scene.')
    remove.add_argument('scene', help='Scene directory.')
    remove.add_argument('--class',  help='Name of the class to remove.', dest='class_name')

    evaluate = add_command('eval', 'Evaluate predicted views against ground truth.')
    evaluate.add_argument('pred',   help='Predicted view, scene or dataset directory.')
    evaluate.add_argument('gt',     help='Ground truth view, scene or dataset directory.')
    evaluate.add_argument('--report', help='Path of the JSON report.')

    return parser


def collect_overrides(arguments):
    """Converts parsed flags into configuration overrides, unset flags are left out
    """

    overrides = {key: arguments.get(key) for key in ('command', 'seed', 'count', 'threads', 'frames', 'out',
                                                     'scene', 'pose', 'class_name', 'pred', 'gt', 'report')}
    overrides['generation'] = {key: arguments.get(key) for key in ('width', 'height', 'min_objects',
                                                                   'max_objects', 'overlap_threshold', 'keep_hidden')}
    for key in ('out', 'scene', 'pred', 'gt', 'report'):
        if overrides[key] is not None:
            overrides[key] = layeredDepth.join_path(overrides[key])
    return overrides


def parse_user_input(argv=None):
    """Parses user's command line flags into an effective run configuration
    """

    arguments = vars(build_parser().parse_args(argv))

    # Initialize logging first
    if arguments['printkernels']:
        IO.logger.toggle_kernel_printing()

    # For a CLI client, we simply sys.stdout.write for logging.
    IO.logger.assign_write_function(sys.stdout.write)
    if arguments['savelog']:
        IO.logger.initialize_logger(arguments['command'])

    if arguments['debugmessages']:
        IO.logger.toggle_debug_logging()

    overrides = collect_overrides(arguments)
    if arguments['config'] is not None:
        run_config, message = IO.config_parser.ConfigParser(arguments['config']).parse_run_config(overrides)
    else:
        run_config, message = IO.config_parser.build_run_config(None, overrides)
    if run_config is None:
        raise ERRORS.ConfigError(message)
    return run_config


def execute(run_config):
    """Runs one subcommand, returning the process exit code
    """

    IO.logger.run_header(run_config.command, run_config.seed, run_config.threads, run_config.out)
    try:
        COMMANDS[run_config.command](run_config)
        return 0
    except ERRORS.LayeredDepthError as e:
        print('** ERROR - {} **'.format(str(e)))
        return e.exit_code
    except KeyboardInterrupt:
        print('\n\nAborting layeredDepth execution...\nGoodbye.')
        return 1


def main(argv=None):
    script_start_time = time.time()

    try:
        run_config = parse_user_input(argv)
    except ERRORS.LayeredDepthError as e:
        print('** ERROR - {} **'.format(str(e)))
        err_exit(e.exit_code)

    print_welcome_message()
    ret = execute(run_config)

    IO.logger.write_stage_summary()
    IO.logger.debug('Finished in {} seconds...'.format(time.time() - script_start_time))
    if ret != 0:
        err_exit(ret)
    clean_exit()


if __name__ == '__main__':
    main()
