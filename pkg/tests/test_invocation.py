# -*- coding: utf-8 -*-

import json
from pathlib import Path
import pytest

from laplace_hdc.tools.cli import bench_main, eval_main, main, robustness_main, train_main, visualize_main


def dataset_args(digit_files, train=True):
    args = ['--test-images', str(digit_files.test_images), '--test-labels', str(digit_files.test_labels)]
    if train:
        args += ['--train-images', str(digit_files.train_images), '--train-labels', str(digit_files.train_labels)]
    return args


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'n-cap': 2048, 'repetitions': 1, 'dataset': 'toy', 'epochs': 2,
                                'bandwidth-samples': 100}))
    return path


def test_train_and_eval(capsys, digit_files, config_file, tmp_path):
    out = tmp_path / 'results'
    train_main(['--config', str(config_file), '-o', str(out), '--omit-runtime', '--batch-size', '8']
               + dataset_args(digit_files))
    captured = capsys.readouterr()
    assert 'Mean accuracy' in captured.out
    assert '(N=2048)' in captured.out
    model = out / 'toy-raw-cyclic1d-sgd_float-run0.lhdc'
    assert model.is_file()

    eval_main([str(model), '--config', str(config_file), '-o', str(out)] + dataset_args(digit_files, train=False))
    assert f'Accuracy of {model}' in capsys.readouterr().out


def test_flags_override_the_config_file(capsys, digit_files, config_file, tmp_path):
    train_main(['--config', str(config_file), '-o', str(tmp_path), '--n-cap', '1024', '--classifier',
                'majority_binary'] + dataset_args(digit_files))
    assert '(N=1024)' in capsys.readouterr().out
    assert (tmp_path / 'toy-raw-cyclic1d-majority_binary.csv').is_file()


def test_robustness_and_visualize(capsys, digit_files, config_file, tmp_path):
    robustness_main(['--config', str(config_file), '-o', str(tmp_path), '--flip-ratios', '0', '0.1']
                    + dataset_args(digit_files))
    assert 'flipped' in capsys.readouterr().out
    visualize_main(['--config', str(config_file), '-o', str(tmp_path), '--cyclic2d-side', '12', '--shift', '1', '1']
                   + dataset_args(digit_files))
    assert '6 images saved' in capsys.readouterr().out
    assert len(list(Path(tmp_path).glob('*.pgm'))) == 6


def test_bench(capsys, tmp_path):
    bench_main(['-o', str(tmp_path), '--n-cap', '1024', '--bench-samples', '10'])
    assert 'samples/s' in capsys.readouterr().out


@pytest.mark.parametrize('args', (
    ['--alpha', '2'],
    ['--kind', 'cyclic2d', '--n-cap', '1024', '--cyclic2d-side', '40'],
))
def test_configuration_errors_exit_with_2(capsys, digit_files, tmp_path, args):
    with pytest.raises(SystemExit) as e:
        train_main(['-o', str(tmp_path)] + args + dataset_args(digit_files))
    assert e.value.code == 2
    assert 'Configuration error' in capsys.readouterr().out


def test_missing_files_exit_with_2(tmp_path):
    with pytest.raises(SystemExit) as e:
        train_main(['-o', str(tmp_path), '--train-images', str(tmp_path / 'absent')])
    assert e.value.code == 2


def test_unreadable_config_exits_with_2(tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"n-cap": ')
    with pytest.raises(SystemExit) as e:
        train_main(['--config', str(broken)])
    assert e.value.code == 2


def test_stage_failures_exit_with_1(capsys, digit_files, tmp_path):
    Path(digit_files.train_labels).write_bytes(b'\0\0\x08\x01\0\0\0\x05\x01')
    with pytest.raises(SystemExit) as e:
        train_main(['-o', str(tmp_path)] + dataset_args(digit_files))
    assert e.value.code == 1
    assert 'Failure in stage load' in capsys.readouterr().out


@pytest.mark.parametrize('args, code', (([], 2), (['fit'], 2), (['--help'], 0), (['train', '--help'], 0)))
def test_dispatcher(args, code):
    with pytest.raises(SystemExit) as e:
        main(args)
    assert e.value.code == code


@pytest.mark.parametrize('file_config, flags, kind', (
    ({}, [], 'cyclic2d'),
    ({'kind': 'block2d'}, [], 'block2d'),
    ({'kind': 'block2d'}, ['--kind', 'cyclic2d'], 'cyclic2d'),
))
def test_visualize_family_precedence(monkeypatch, capsys, digit_files, tmp_path, file_config, flags, kind):
    received = []
    monkeypatch.setattr('laplace_hdc.tools.cli.run_visualize', lambda config, shift=None: received.append(config) or [])
    path = tmp_path / 'visualize.json'
    path.write_text(json.dumps(file_config))
    visualize_main(['--config', str(path), '-o', str(tmp_path)] + flags + dataset_args(digit_files))
    assert [c.kind for c in received] == [kind]
    assert '0 images saved' in capsys.readouterr().out


def test_config_file_must_be_an_object(tmp_path):
    path = tmp_path / 'list.json'
    path.write_text('[1, 2]')
    with pytest.raises(SystemExit) as e:
        train_main(['--config', str(path)])
    assert e.value.code == 2
