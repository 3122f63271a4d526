"""Main script for corner-space experiments."""

import argparse
import dataclasses
import json
import sys

from pytorch_corner import errors
from pytorch_corner import experiments

# Element types of the list-valued RunConfig fields.
_LIST_TYPES = {
    'L_list': int,
    'gamma_over_delta_list': float,
    'scaling_states': str,
    'sweep_noises': str,
}


def _add_config_flags(parser):
  """One flag per RunConfig field; unset flags keep the RunConfig default."""
  parser.add_argument(
      '--config', type=str, help='JSON config file, overrides the flags')
  for field in dataclasses.fields(experiments.RunConfig):
    if field.name == 'experiment':
      continue
    flag = f'--{field.name}'
    if field.type is bool:
      parser.add_argument(flag, action=argparse.BooleanOptionalAction,
                          default=argparse.SUPPRESS)
    elif field.type is list:
      parser.add_argument(flag, type=_LIST_TYPES[field.name], nargs='+',
                          default=argparse.SUPPRESS)
    else:
      parser.add_argument(flag, type=field.type, default=argparse.SUPPRESS)


def build_config(args):
  flags = {k: v for k, v in vars(args).items() if k not in ('command', 'config')}
  if args.command != 'validate-config':
    flags['experiment'] = args.command
  if args.config is None:
    return experiments.RunConfig.from_dict(flags).validate()
  config = experiments.RunConfig.load(args.config, defaults=flags)
  if args.command not in ('validate-config', config.experiment):
    raise errors.ConfigError(
        f"experiment: file configures '{config.experiment}', not "
        f"'{args.command}'", args.config, config._lines.get('experiment'))
  return config.validate()


def main(argv=None):
  parser = argparse.ArgumentParser(description=__doc__)
  commands = parser.add_subparsers(dest='command', required=True)
  for name in list(experiments.EXPERIMENT_MAP) + ['validate-config']:
    _add_config_flags(commands.add_parser(name))
  args = parser.parse_args(argv)

  try:
    config = build_config(args)
    if args.command == 'validate-config':
      print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
      return 0
    with experiments.configured_threads(config):
      record = experiments.EXPERIMENT_MAP[config.experiment](config)
  except errors.ConfigError as e:
    print(f'config error: {e}', file=sys.stderr)
    return 2
  except errors.NumericalError as e:
    print(f'numerical error: {e}', file=sys.stderr)
    return 3
  print(json.dumps(record, indent=2, sort_keys=True))
  return 0


if __name__ == '__main__':
  sys.exit(main())
