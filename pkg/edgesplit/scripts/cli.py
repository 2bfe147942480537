# -*- coding: utf-8 -*-
"""
The edgesplit command line.

Subcommands:

- ``gen``: generate a synthetic calibration corpus
- ``build-tables``: build lookup tables from a calibration corpus
- ``plan``: print the decision for a scenario
- ``simulate``: replay a request stream through a scenario
- ``sweep``: simulate a scenario over budgets, bandwidths or edge throughputs
- ``serve-cloud``: run the cloud service, optionally with the HTTP plan API
- ``run-edge``: run the edge agent against a cloud service
- ``report``: write amplification, compression, accuracy or latency reports

Paths are taken from the command line, then from the environment variables
EDGESPLIT_SCENARIO and EDGESPLIT_TABLES, then from the ``edgesplit.*``
settings of the ini file given by ``--config`` or EDGESPLIT_CONFIG.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

import argparse
import logging
import os
import sys

from pyramid.paster import (
    get_appsettings,
    setup_logging,
)

from edgesplit.business.latency import model_for_devices
from edgesplit.business.plan_service import PlanService
from edgesplit.business.planner import (
    AdaptationController,
    EXHAUSTIVE,
    SOLVERS,
    decision_record,
    plan_scenario,
)
from edgesplit.business.predictor import (
    MEAN,
    build_tables,
    parse_size_statistic,
)
from edgesplit.business.simulator import (
    RequestStream,
    check_scenario,
    run,
    sweep_accuracy,
    sweep_bandwidth,
    sweep_edge_power,
)
from edgesplit.business.synthetic import (
    GeneratorSpec,
    gen_calibration_corpus,
)
from edgesplit.data.repository.profile_repository import (
    fixture_path,
    load_generator_spec,
    load_model_profile,
    load_scenario,
)
from edgesplit.data.repository.table_repository import (
    iter_calibration_records,
    save_calibration_records,
    save_tables,
    write_tables_csv,
)
from edgesplit.presentation import reports
from edgesplit.utils import (
    parse_bandwidth,
    parse_bandwidth_list,
    parse_flops,
)


LOG = logging.getLogger(__name__)

LOG_FORMAT = (
    '%(asctime)s %(levelname)-5.5s [%(name)s][%(threadName)s] %(message)s')

DEFAULT_SCENARIO = 'scenario-vgg16-tx2.json'
DEFAULT_BITS = '1-8'
SWEEP_KINDS = ('accuracy', 'bandwidth', 'edge')
REPORT_KINDS = (
    'amplification', 'compression', 'accuracy', 'layer-loss', 'latency')
SWEEP_DEFAULTS = {
    'accuracy': '0,0.01,0.05,0.1,1.0',
    'bandwidth': '100KBps,300KBps,1MBps,3MBps,10MBps',
    'edge': '300GFLOPS,2TFLOPS',
}
SWEEP_COLUMNS = {
    'accuracy': 'max_loss',
    'bandwidth': 'bandwidth',
    'edge': 'edge_flops',
}


class UsageError(Exception):
    """
    Invalid arguments detected after parsing.
    """


def parse_bits(value):
    """
    Parses bit-depths given as a list ``1,2,4`` or a range ``1-8``.
    """
    bits = set()
    for item in value.split(','):
        item = item.strip()
        if not item:
            continue
        if '-' in item:
            first, last = item.split('-', 1)
            bits.update(range(int(first), int(last) + 1))
        else:
            bits.add(int(item))
    if not bits or min(bits) < 1 or max(bits) > 16:
        raise ValueError('bit-depths must lie in 1..16')
    return sorted(bits)


def _argument_type(parse, name):
    def convert(value):
        try:
            return parse(value)
        except ValueError as error:
            raise argparse.ArgumentTypeError(
                'invalid {0} "{1}": {2}'.format(name, value, error))
    convert.__name__ = name
    return convert


bandwidth_type = _argument_type(parse_bandwidth, 'bandwidth')
bandwidth_list_type = _argument_type(parse_bandwidth_list, 'bandwidth list')
bits_type = _argument_type(parse_bits, 'bit-depths')


def _size_statistic(value):
    parse_size_statistic(value)
    return value


size_statistic_type = _argument_type(_size_statistic, 'size statistic')


def _scenario_arguments(parser):
    parser.add_argument(
        '--scenario', help='scenario file, default: vgg16-tx2 fixture')
    parser.add_argument(
        '--tables', help='lookup tables replacing those of the scenario')


def _solver_argument(parser):
    parser.add_argument(
        '--solver', choices=sorted(SOLVERS), default=EXHAUSTIVE)


def _stream_arguments(parser):
    parser.add_argument('--requests', type=int, default=100)
    parser.add_argument('--inter-arrival', type=float, default=0.0)
    parser.add_argument('--iterations', type=int, default=1)
    parser.add_argument('--rtt', type=float, default=0.0)
    parser.add_argument(
        '--payload', action='store_true',
        help='also report the sizes of generated feature maps')
    parser.add_argument('--spec', help='generator spec file')
    parser.add_argument('--seed', type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='edgesplit',
        description='Plan, simulate and run split inference between an '
                    'edge device and a cloud server.')
    parser.add_argument(
        '--config', help='PasteDeploy ini file, default: EDGESPLIT_CONFIG')
    parser.add_argument(
        '-v', '--verbose', action='store_true', help='log at INFO level')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    gen = subparsers.add_parser(
        'gen', help='generate a synthetic calibration corpus')
    gen.add_argument('--model', required=True, help='model profile file')
    gen.add_argument('--spec', help='generator spec file')
    gen.add_argument('--seed', type=int)
    gen.add_argument('--bits', type=bits_type, default=DEFAULT_BITS)
    gen.add_argument('--samples', type=int, default=100)
    gen.add_argument('--first-sample', type=int, default=0)
    gen.add_argument('--output', required=True, help='calibration CSV file')

    tables = subparsers.add_parser(
        'build-tables', help='build lookup tables from a corpus')
    tables.add_argument('--model', required=True, help='model profile file')
    tables.add_argument(
        '--calibration', required=True, help='calibration CSV file')
    tables.add_argument('--bits', type=bits_type, default=DEFAULT_BITS)
    tables.add_argument(
        '--size-statistic', type=size_statistic_type, default=MEAN,
        help='mean or a percentile like p95')
    tables.add_argument('--output', required=True, help='tables JSON file')
    tables.add_argument('--csv', help='also write the tables as CSV')

    plan = subparsers.add_parser('plan', help='plan a scenario')
    _scenario_arguments(plan)
    plan.add_argument(
        '--bw', type=bandwidth_type,
        help='bandwidth like 300KBps, default: start of the trace')
    plan.add_argument('--max-loss', type=float)
    plan.add_argument('--json', action='store_true',
                      help='print the JSON plan record')
    _solver_argument(plan)

    simulate = subparsers.add_parser('simulate', help='simulate a scenario')
    _scenario_arguments(simulate)
    _stream_arguments(simulate)
    _solver_argument(simulate)
    simulate.add_argument(
        '--output-dir', help='directory for requests.csv, '
                             'plan_changes.csv and summary.txt')

    sweep = subparsers.add_parser('sweep', help='sweep a scenario parameter')
    _scenario_arguments(sweep)
    _stream_arguments(sweep)
    _solver_argument(sweep)
    sweep.add_argument('--kind', choices=SWEEP_KINDS, required=True)
    sweep.add_argument(
        '--values', help='comma separated budgets, bandwidths or throughputs')
    sweep.add_argument('--output', help='sweep CSV file, default: stdout')

    cloud = subparsers.add_parser('serve-cloud', help='run the cloud service')
    _scenario_arguments(cloud)
    cloud.add_argument('--host')
    cloud.add_argument('--port', type=int)
    cloud.add_argument('--time-scale', type=float)
    cloud.add_argument(
        '--http-port', type=int,
        help='also serve the HTTP plan API with waitress')

    edge = subparsers.add_parser('run-edge', help='run the edge agent')
    _scenario_arguments(edge)
    _solver_argument(edge)
    edge.add_argument('--host')
    edge.add_argument('--port', type=int)
    edge.add_argument('--requests', type=int, default=10)
    edge.add_argument(
        '--bw', type=bandwidth_list_type,
        help='per-request bandwidth schedule, repeated cyclically')
    edge.add_argument('--max-loss', type=float)
    edge.add_argument('--spec', help='generator spec file')
    edge.add_argument('--seed', type=int)
    edge.add_argument('--time-scale', type=float)
    edge.add_argument('--sync-timeout', type=float)
    edge.add_argument('--max-retries', type=int)
    edge.add_argument('--output', help='per-request CSV file')

    report = subparsers.add_parser('report', help='write a report')
    _scenario_arguments(report)
    report.add_argument('--kind', choices=REPORT_KINDS, required=True)
    report.add_argument(
        '--bits', type=int, default=4, help='bit-depth of layer-loss')
    report.add_argument('--output', help='CSV file, default: stdout')
    return parser


def load_settings(args):
    """
    Reads the ini settings and configures logging.

    Returns:
        The settings of the ``[app:main]`` section, empty without ini file.
    """
    config_uri = args.config or os.environ.get('EDGESPLIT_CONFIG')
    if config_uri:
        if not os.path.exists(config_uri.split('#')[0]):
            raise UsageError('config file {0} not found'.format(config_uri))
        setup_logging(config_uri)
        return dict(get_appsettings(config_uri))
    logging.basicConfig(
        format=LOG_FORMAT,
        level=logging.INFO if args.verbose else logging.WARNING)
    return {}


def _existing(path, what):
    if path and not os.path.exists(path):
        raise UsageError('{0} file {1} not found'.format(what, path))
    return path


def resolve_paths(args, settings):
    """
    The scenario and tables paths of flags, environment and settings, in
    this order of precedence.
    """
    scenario = (
        args.scenario
        or os.environ.get('EDGESPLIT_SCENARIO')
        or settings.get('edgesplit.scenario')
        or fixture_path(DEFAULT_SCENARIO))
    tables = (
        args.tables
        or os.environ.get('EDGESPLIT_TABLES')
        or settings.get('edgesplit.tables')
        or None)
    return _existing(scenario, 'scenario'), _existing(tables, 'tables')


def _load_scenario(args, settings):
    scenario_path, tables_path = resolve_paths(args, settings)
    return load_scenario(scenario_path, tables_path)


def _generator_spec(args, settings):
    path = _existing(getattr(args, 'spec', None), 'generator spec')
    spec = load_generator_spec(path) if path else GeneratorSpec(
        seed=int(settings.get('edgesplit.seed', 0)))
    if getattr(args, 'seed', None) is not None:
        spec = spec.replace(seed=args.seed)
    return spec


def _setting(args, settings, name, key, convert, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return convert(settings.get(key, default))


def _output(path):
    if path:
        return open(path, 'wb')
    return _StdoutBytes()


class _StdoutBytes(object):

    def write(self, data):
        sys.stdout.buffer.write(data)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        sys.stdout.flush()


def gen_command(args, settings):
    model = load_model_profile(_existing(args.model, 'model'))
    if args.samples <= 0:
        raise UsageError('--samples must be > 0')
    spec = _generator_spec(args, settings)
    count = save_calibration_records(args.output, gen_calibration_corpus(
        spec, model, args.bits, args.samples, args.first_sample))
    print('wrote {0} calibration records to {1}'.format(count, args.output))
    return 0


def build_tables_command(args, settings):
    model = load_model_profile(_existing(args.model, 'model'))
    records = iter_calibration_records(
        _existing(args.calibration, 'calibration'))
    tables = build_tables(records, model, args.bits, args.size_statistic)
    save_tables(tables, args.output)
    if args.csv:
        with open(args.csv, 'wb') as output:
            write_tables_csv(tables, output)
    print('wrote {0}x{1} lookup tables to {2}'.format(
        tables.n_layers, len(tables.bit_depths), args.output))
    return 0


def plan_command(args, settings):
    """
    Prints the split point, bit-depth, latency breakdown and predicted loss
    of a scenario.
    """
    if args.max_loss is not None and args.max_loss < 0:
        raise UsageError(u'accuracy budget must be ≥ 0')
    scenario = _load_scenario(args, settings)
    check_scenario(scenario)
    decision = plan_scenario(
        scenario, bandwidth=args.bw, max_loss=args.max_loss,
        solver=args.solver)
    if args.json:
        print(decision_record(decision))
    else:
        print(reports.decision_text(decision))
    return 0


def _stream(args, settings):
    if args.requests <= 0 or args.iterations <= 0:
        raise UsageError('--requests and --iterations must be > 0')
    if args.inter_arrival < 0 or args.rtt < 0:
        raise UsageError('--inter-arrival and --rtt must be >= 0')
    payload_spec = None
    if args.payload or args.spec:
        payload_spec = _generator_spec(args, settings)
    return RequestStream(
        count=args.requests,
        inter_arrival=args.inter_arrival,
        iterations=args.iterations,
        rtt=args.rtt,
        payload_spec=payload_spec)


def simulate_command(args, settings):
    stream = _stream(args, settings)
    scenario = _load_scenario(args, settings)
    report = run(scenario, stream, solver=args.solver)
    summary = reports.summary_text(report)
    if args.output_dir:
        if not os.path.isdir(args.output_dir):
            os.makedirs(args.output_dir)
        reports.save_csv(
            os.path.join(args.output_dir, 'requests.csv'),
            reports.request_table(report))
        reports.save_csv(
            os.path.join(args.output_dir, 'plan_changes.csv'),
            reports.plan_change_table(report))
        with open(os.path.join(args.output_dir, 'summary.txt'), 'w') as out:
            out.write(summary + '\n')
    print(summary)
    return 0


def _sweep_values(kind, values):
    text = values or SWEEP_DEFAULTS[kind]
    try:
        if kind == 'accuracy':
            parsed = [float(item) for item in text.split(',') if item.strip()]
            if any(value < 0 for value in parsed):
                raise ValueError(u'accuracy budget must be ≥ 0')
            return parsed
        if kind == 'bandwidth':
            return parse_bandwidth_list(text)
        return [parse_flops(item) for item in text.split(',') if item.strip()]
    except ValueError as error:
        raise UsageError('invalid --values: {0}'.format(error))


def sweep_command(args, settings):
    values = _sweep_values(args.kind, args.values)
    if not values:
        raise UsageError('--values is empty')
    stream = _stream(args, settings)
    scenario = _load_scenario(args, settings)
    sweep = {
        'accuracy': sweep_accuracy,
        'bandwidth': sweep_bandwidth,
        'edge': sweep_edge_power,
    }[args.kind]
    rows = sweep(scenario, values, stream, solver=args.solver)
    with _output(args.output) as output:
        reports.write_csv(
            output, reports.sweep_table(rows, SWEEP_COLUMNS[args.kind]))
    return 0


def serve_cloud_command(args, settings):
    from edgesplit.transport.cloud_service import CloudService

    scenario = _load_scenario(args, settings)
    latency = model_for_devices(scenario.model, scenario.edge, scenario.cloud)
    service = CloudService(
        _setting(args, settings, 'host', 'edgesplit.cloud_host', str,
                 '127.0.0.1'),
        _setting(args, settings, 'port', 'edgesplit.cloud_port', int, 9300),
        latency=latency,
        time_scale=_setting(
            args, settings, 'time_scale', 'edgesplit.time_scale', float, 1.0))
    try:
        if args.http_port:
            import waitress
            from edgesplit import main

            service.start()
            app_settings = dict(settings)
            app_settings['edgesplit.plan_service'] = PlanService(
                lambda: scenario, cloud_service=service)
            waitress.serve(
                main({}, **app_settings),
                host=service.address[0], port=args.http_port)
        else:
            service.serve_forever()
    except KeyboardInterrupt:
        LOG.info('interrupted')
    finally:
        service.stop()
    print(service.stats_line())
    return 0


def run_edge_command(args, settings):
    from edgesplit.transport.edge_agent import EdgeAgent

    if args.requests <= 0:
        raise UsageError('--requests must be > 0')
    if args.max_loss is not None and args.max_loss < 0:
        raise UsageError(u'accuracy budget must be ≥ 0')
    scenario = _load_scenario(args, settings)
    check_scenario(scenario)
    controller = AdaptationController.for_scenario(
        scenario, max_loss=args.max_loss, solver=args.solver)
    bandwidths = args.bw or None
    controller.replan(bandwidths[0] if bandwidths else scenario.bandwidth_at(0))
    agent = EdgeAgent(
        _setting(args, settings, 'host', 'edgesplit.cloud_host', str,
                 '127.0.0.1'),
        _setting(args, settings, 'port', 'edgesplit.cloud_port', int, 9300),
        controller,
        scenario.model,
        _generator_spec(args, settings),
        time_scale=_setting(
            args, settings, 'time_scale', 'edgesplit.time_scale', float, 1.0),
        sync_timeout=_setting(
            args, settings, 'sync_timeout', 'edgesplit.sync_timeout', float,
            5.0),
        max_retries=_setting(
            args, settings, 'max_retries', 'edgesplit.max_retries', int, 3))
    try:
        agent.run(args.requests, bandwidths)
    except KeyboardInterrupt:
        LOG.info('interrupted')
    finally:
        agent.stop()
        if args.output:
            reports.save_csv(args.output, edge_result_table(agent.results))
    print(agent.stats_line())
    return 0


def edge_result_table(results):
    return {
        'header': [
            'request', 'epoch', 'split_layer', 'bit_depth', 'bytes',
            'edge_s', 'trans_s', 'cloud_s', 'total_s', 'attempts', 'digest'],
        'rows': [
            [result.request_id, result.epoch, result.split_layer,
             result.bit_depth, result.bytes_sent, result.edge_s,
             result.trans_s, result.cloud_s, result.total_s, result.attempts,
             result.digest]
            for result in results],
    }


def report_command(args, settings):
    scenario = _load_scenario(args, settings)
    model = scenario.model
    tables = scenario.tables
    if args.kind == 'amplification':
        table = reports.amplification_table(model)
    elif args.kind == 'compression':
        table = reports.compression_table(model, tables)
    elif args.kind == 'accuracy':
        table = reports.accuracy_table(tables)
    elif args.kind == 'layer-loss':
        table = reports.layer_loss_table(model, tables, args.bits)
    else:
        table = reports.latency_table(
            model_for_devices(model, scenario.edge, scenario.cloud))
    with _output(args.output) as output:
        reports.write_csv(output, table)
    return 0


COMMANDS = {
    'gen': gen_command,
    'build-tables': build_tables_command,
    'plan': plan_command,
    'simulate': simulate_command,
    'sweep': sweep_command,
    'serve-cloud': serve_cloud_command,
    'run-edge': run_edge_command,
    'report': report_command,
}


def main(argv=None):
    """
    Runs a subcommand.

    Returns:
        The exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return error.code
    try:
        settings = load_settings(args)
        return COMMANDS[args.command](args, settings)
    except UsageError as error:
        parser.print_usage(sys.stderr)
        sys.stderr.write('edgesplit: error: {0}\n'.format(error))
        return 2
    except (ValueError, OSError) as error:
        LOG.debug('command %s failed', args.command, exc_info=True)
        sys.stderr.write('edgesplit: error: {0}\n'.format(error))
        return 1
    except KeyboardInterrupt:
        return 0


def run_main():
    sys.exit(main())
